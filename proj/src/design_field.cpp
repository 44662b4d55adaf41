#include "igatherm/design_field.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace igatherm {

namespace {

KnotVector circ_knots(const DesignBasisSpec& spec) {
    std::vector<double> ks;
    if (spec.structure == DesignBasisSpec::Circ::QuarterStructured) {
        const int nq = spec.circ_count;
        if (nq < 3) throw std::invalid_argument("DesignBasisSpec: need at least 3 functions per quarter");
        ks.insert(ks.end(), {0.0, 0.0, 0.0});
        for (int q = 0; q < 4; ++q) {
            const double lo = q / 4.0;
            for (int i = 1; i <= nq - 3; ++i) ks.push_back(lo + 0.25 * i / (nq - 2));
            if (q < 3) {
                ks.push_back((q + 1) / 4.0);
                ks.push_back((q + 1) / 4.0);
            }
        }
        ks.insert(ks.end(), {1.0, 1.0, 1.0});
    } else {
        const int nc = spec.circ_count;
        if (nc < 3) throw std::invalid_argument("DesignBasisSpec: need at least 3 circumferential functions");
        ks.insert(ks.end(), {0.0, 0.0, 0.0});
        for (int i = 1; i <= nc - 3; ++i) ks.push_back(static_cast<double>(i) / (nc - 2));
        ks.insert(ks.end(), {1.0, 1.0, 1.0});
    }
    return KnotVector(2, ks);
}

KnotVector radial_knots(int n) {
    if (n < 2) throw std::invalid_argument("DesignBasisSpec: need at least 2 radial functions");
    std::vector<double> ks{0.0, 0.0};
    for (int i = 1; i <= n - 2; ++i) ks.push_back(static_cast<double>(i) / (n - 1));
    ks.insert(ks.end(), {1.0, 1.0});
    return KnotVector(1, ks);
}

}  // namespace

DensityField::DensityField(const DesignBasisSpec& spec) : spec_(spec) {
    KnotVector ku = circ_knots(spec);
    KnotVector kv = radial_knots(spec.radial_count);
    basis_ = RationalBasis(ku, kv, Grid<double>(ku.num_basis(), kv.num_basis(), 1.0));
    m_ = ku.num_basis() * kv.num_basis();
    coeff_.assign(m_, 0.0);
}

DensityField::Eval DensityField::eval(double u, double v) const {
    const auto e = basis_.eval(u, v);
    Eval r{0.0, 0.0, 0.0};
    for (int l = 0; l < e.count(); ++l) {
        const double c = coeff_[coeff_index(e.index_u(l), e.index_v(l))];
        r.value += e.value[l] * c;
        r.du += e.du[l] * c;
        r.dv += e.dv[l] * c;
    }
    return r;
}

DensityField::PhysEval DensityField::eval_physical(const Patch& design_patch, double u, double v) const {
    const Eval e = eval(u, v);
    const auto g = design_patch.eval_geometry(u, v);
    return {e.value, (g.x_v.y * e.du - g.x_u.y * e.dv) / g.detJ, (-g.x_v.x * e.du + g.x_u.x * e.dv) / g.detJ};
}

namespace {

// Circumferential parameter maps of the physical reflections for a ring whose
// seam sits at -45 degrees: x-mirror is xi -> 1/4 - xi, y-mirror is 3/4 - xi.
double wrap_unit(double x) {
    x = std::fmod(x, 1.0);
    return x < 0.0 ? x + 1.0 : x;
}

int find_site(const std::vector<double>& site_xi, double xi) {
    const double w = wrap_unit(xi);
    for (size_t s = 0; s < site_xi.size(); ++s) {
        double d = std::abs(site_xi[s] - w);
        d = std::min(d, 1.0 - d);
        if (d < 1e-9) return static_cast<int>(s);
    }
    return -1;
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

}  // namespace

SymmetryMap::SymmetryMap(const DensityField& field, SymmetryMode mode) : mode_(mode) {
    const int nc = field.num_circ();
    const int nr = field.num_radial();
    const int n_sites = nc - 1;  // seam closure ties the last column to the first

    std::vector<double> site_xi = field.basis().ku().greville();
    site_xi.resize(n_sites);

    UnionFind uf(n_sites);
    auto apply_mirror = [&](double offset) {
        for (int s = 0; s < n_sites; ++s) {
            const int t = find_site(site_xi, offset - site_xi[s]);
            if (t < 0)
                throw std::invalid_argument(
                    "SymmetryMap: circumferential sites are not symmetric; use a quarter-structured design basis");
            uf.unite(s, t);
        }
    };
    if (mode == SymmetryMode::X || mode == SymmetryMode::XY) apply_mirror(0.25);
    if (mode == SymmetryMode::XY) apply_mirror(0.75);

    std::vector<int> orbit_rank(n_sites, -1);
    int n_orbits = 0;
    for (int s = 0; s < n_sites; ++s)
        if (uf.find(s) == s) orbit_rank[s] = n_orbits++;
    for (int s = 0; s < n_sites; ++s) orbit_rank[s] = orbit_rank[uf.find(s)];

    n_var_ = n_orbits * nr;
    coeff_to_var_.assign(static_cast<size_t>(nc) * nr, -1);
    for (int j = 0; j < nr; ++j) {
        for (int i = 0; i < nc; ++i) {
            const int site = (i == nc - 1) ? 0 : i;
            coeff_to_var_[i + static_cast<size_t>(nc) * j] = orbit_rank[site] + n_orbits * j;
        }
    }
}

std::vector<double> SymmetryMap::expand(const std::vector<double>& vars) const {
    if (static_cast<int>(vars.size()) != n_var_)
        throw std::invalid_argument("SymmetryMap::expand: variable count mismatch");
    std::vector<double> coeff(coeff_to_var_.size());
    for (size_t i = 0; i < coeff.size(); ++i) coeff[i] = vars[coeff_to_var_[i]];
    return coeff;
}

std::vector<double> SymmetryMap::reduce_gradient(const std::vector<double>& coeff_grad) const {
    if (coeff_grad.size() != coeff_to_var_.size())
        throw std::invalid_argument("SymmetryMap::reduce_gradient: coefficient count mismatch");
    std::vector<double> g(n_var_, 0.0);
    for (size_t i = 0; i < coeff_grad.size(); ++i) g[coeff_to_var_[i]] += coeff_grad[i];
    return g;
}

}  // namespace igatherm
