#include "igatherm/export.hpp"

#include <charconv>
#include <fstream>
#include <set>

namespace igatherm {

std::string format_double(double value) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    return out;
}

}  // namespace

void write_vtk_fields(const std::string& path, const MultiPatchModel& model, const Eigen::VectorXd& T,
                      const Eigen::VectorXd& T_bar, const DensityField* field,
                      const std::vector<double>& density, const RegionLaws& laws, int subdivision) {
    struct Node {
        Vec2 x;
        double t, tdiff, rho, qx, qy;
    };
    std::vector<Node> nodes;
    std::vector<std::array<int, 4>> cells;

    for (size_t p = 0; p < model.patches.size(); ++p) {
        const Patch& patch = model.patches[p];
        const MaterialLaw& law = laws.of(patch.region);
        for (const auto& [u0, u1] : patch.basis.ku().elements()) {
            for (const auto& [v0, v1] : patch.basis.kv().elements()) {
                const int base = static_cast<int>(nodes.size());
                for (int jj = 0; jj <= subdivision; ++jj) {
                    for (int ii = 0; ii <= subdivision; ++ii) {
                        const double u = u0 + (u1 - u0) * ii / subdivision;
                        const double v = v0 + (v1 - v0) * jj / subdivision;
                        const auto g = patch.eval_geometry(u, v);
                        Node node{};
                        node.x = g.x;
                        double tv = 0.0, tb = 0.0;
                        Vec2 grad;
                        for (int l = 0; l < g.local.count(); ++l) {
                            const int id = model.dof_id(static_cast<int>(p), g.local.index_u(l), g.local.index_v(l));
                            tv += g.local.value[l] * T[id];
                            if (T_bar.size() == T.size()) tb += g.local.value[l] * T_bar[id];
                            if (std::abs(g.detJ) > 1e-30) {
                                const Vec2 gb = patch.grad_basis(g, l);
                                grad.x += gb.x * T[id];
                                grad.y += gb.y * T[id];
                            }
                        }
                        node.t = tv;
                        node.tdiff = T_bar.size() == T.size() ? tv - tb : 0.0;
                        double rho = -1.0;
                        double kappa = law.is_constant() ? law.kappa(0.0) : 0.0;
                        if (patch.region == Region::Design && field) {
                            rho = 0.0;
                            const auto de = field->basis().eval(u, v);
                            for (int l = 0; l < de.count(); ++l)
                                rho += de.value[l] * density[field->coeff_index(de.index_u(l), de.index_v(l))];
                            kappa = law.is_constant() ? law.kappa(0.0) : law.kappa(rho);
                        }
                        node.rho = rho;
                        node.qx = -kappa * grad.x;
                        node.qy = -kappa * grad.y;
                        nodes.push_back(node);
                    }
                }
                for (int jj = 0; jj < subdivision; ++jj) {
                    for (int ii = 0; ii < subdivision; ++ii) {
                        const int a = base + jj * (subdivision + 1) + ii;
                        cells.push_back({a, a + 1, a + subdivision + 2, a + subdivision + 1});
                    }
                }
            }
        }
    }

    std::ofstream out = open_out(path);
    out << "# vtk DataFile Version 3.0\nthermal meta-structure fields\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << nodes.size() << " double\n";
    for (const Node& n : nodes) out << format_double(n.x.x) << " " << format_double(n.x.y) << " 0\n";
    out << "CELLS " << cells.size() << " " << cells.size() * 5 << "\n";
    for (const auto& c : cells) out << "4 " << c[0] << " " << c[1] << " " << c[2] << " " << c[3] << "\n";
    out << "CELL_TYPES " << cells.size() << "\n";
    for (size_t i = 0; i < cells.size(); ++i) out << "9\n";
    out << "POINT_DATA " << nodes.size() << "\n";
    out << "SCALARS temperature double 1\nLOOKUP_TABLE default\n";
    for (const Node& n : nodes) out << format_double(n.t) << "\n";
    out << "SCALARS temperature_diff double 1\nLOOKUP_TABLE default\n";
    for (const Node& n : nodes) out << format_double(n.tdiff) << "\n";
    out << "SCALARS density double 1\nLOOKUP_TABLE default\n";
    for (const Node& n : nodes) out << format_double(n.rho) << "\n";
    out << "SCALARS flux_magnitude double 1\nLOOKUP_TABLE default\n";
    for (const Node& n : nodes) out << format_double(std::hypot(n.qx, n.qy)) << "\n";
    out << "VECTORS flux double\n";
    for (const Node& n : nodes) out << format_double(n.qx) << " " << format_double(n.qy) << " 0\n";
}

void write_density_csv(const std::string& path, const DensityField& field, const std::string& symmetry) {
    std::ofstream out = open_out(path);
    const DesignBasisSpec& spec = field.spec();
    out << "# structure="
        << (spec.structure == DesignBasisSpec::Circ::QuarterStructured ? "quarter" : "uniform")
        << " circ=" << spec.circ_count << " radial=" << spec.radial_count << " symmetry=" << symmetry << "\n";
    out << "index,value\n";
    for (int i = 0; i < field.num_coefficients(); ++i)
        out << i << "," << format_double(field.coefficients()[i]) << "\n";
}

DensityCsv read_density_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open density CSV: " + path);
    DensityCsv csv;
    std::string line;
    if (!std::getline(in, line) || line.rfind("# structure=", 0) != 0)
        throw std::invalid_argument("density CSV missing its basis header: " + path);
    {
        std::string token;
        std::istringstream ss(line.substr(2));
        while (ss >> token) {
            const auto eq = token.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = token.substr(0, eq), val = token.substr(eq + 1);
            if (key == "structure")
                csv.spec.structure = val == "quarter" ? DesignBasisSpec::Circ::QuarterStructured
                                                      : DesignBasisSpec::Circ::Uniform;
            else if (key == "circ")
                csv.spec.circ_count = std::stoi(val);
            else if (key == "radial")
                csv.spec.radial_count = std::stoi(val);
            else if (key == "symmetry")
                csv.symmetry = val;
        }
    }
    std::getline(in, line);  // column header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw std::invalid_argument("malformed density CSV row: " + line);
        csv.coefficients.push_back(std::stod(line.substr(comma + 1)));
    }
    if (csv.coefficients.empty()) throw std::invalid_argument("density CSV holds no coefficients: " + path);
    return csv;
}

void write_run_csv(const std::string& path, const RunRecord& record) {
    std::set<std::string> keys;
    for (const IterationRow& row : record.rows)
        for (const auto& [k, v] : row.terms) keys.insert(k);
    std::ofstream out = open_out(path);
    out << "iteration,J";
    for (const std::string& k : keys) out << "," << k;
    out << ",constraint,grad_norm,step_norm\n";
    for (const IterationRow& row : record.rows) {
        out << row.iteration << "," << format_double(row.J);
        for (const std::string& k : keys) {
            auto it = row.terms.find(k);
            out << "," << (it == row.terms.end() ? "" : format_double(it->second));
        }
        out << "," << format_double(row.constraint) << "," << format_double(row.grad_norm) << ","
            << format_double(row.step_norm) << "\n";
    }
}

void write_convergence_csv(const std::string& path, const std::vector<ConvergenceRow>& rows) {
    std::ofstream out = open_out(path);
    out << "level,dofs,rel_error,meets_2pct\n";
    for (const ConvergenceRow& row : rows)
        out << row.level << "," << row.dofs << "," << format_double(row.rel_error) << ","
            << (row.meets_threshold ? 1 : 0) << "\n";
}

void write_pgm(const std::string& path, const Raster& raster) {
    std::ofstream out = open_out(path);
    out << "P2\n" << raster.nx << " " << raster.ny << "\n255\n";
    for (int j = raster.ny - 1; j >= 0; --j) {
        for (int i = 0; i < raster.nx; ++i) out << static_cast<int>(raster.at(i, j)) << (i + 1 < raster.nx ? " " : "");
        out << "\n";
    }
}

void write_contours_csv(const std::string& path, const std::vector<std::vector<Vec2>>& contours) {
    std::ofstream out = open_out(path);
    out << "polyline,x,y\n";
    for (size_t c = 0; c < contours.size(); ++c)
        for (const Vec2& p : contours[c])
            out << c << "," << format_double(p.x) << "," << format_double(p.y) << "\n";
}

}  // namespace igatherm
