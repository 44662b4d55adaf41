// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Bands are pinned here, not configurable.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <vector>

#include "igatherm/optimizer.hpp"
#include "igatherm/problem.hpp"
#include "igatherm/reconstruct.hpp"

using namespace igatherm;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("%s  C%d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RegionLaws base_laws(MaterialLaw in, MaterialLaw design) {
    RegionLaws laws;
    laws.in = std::move(in);
    laws.design = std::move(design);
    laws.out = MaterialLaw::constant(kKappaIron);
    return laws;
}

SquareSideBC vertical_bc() {
    SquareSideBC bc;
    bc.left = EdgeBC::neumann(0.0);
    bc.right = EdgeBC::neumann(0.0);
    bc.top = EdgeBC::dirichlet(300.0);
    bc.bottom = EdgeBC::dirichlet(200.0);
    return bc;
}

struct Workbench {
    MultiPatchModel model;
    DensityField field;
    SymmetryMap sym;
    Discretization disc;

    Workbench(MaterialLaw in, int levels, DesignBasisSpec dspec, SymmetryMode mode,
              SquareSideBC bc = SquareSideBC{}, AnnulusModelSpec spec = AnnulusModelSpec{})
        : model([&] {
              MultiPatchModel m = build_annulus_model(spec, bc);
              refine_model(m, levels);
              return m;
          }()),
          field(dspec),
          sym(field, mode),
          disc(model, &field) {}
};

DesignBasisSpec nvar25() { return DesignBasisSpec{DesignBasisSpec::Circ::QuarterStructured, 5, 5}; }
DesignBasisSpec nvar50() { return DesignBasisSpec{DesignBasisSpec::Circ::QuarterStructured, 6, 5}; }

Objective oracle(const DesignProblem& problem) {
    return [&problem](const std::vector<double>& x, std::vector<double>& g, std::map<std::string, double>* t) {
        auto ev = problem.evaluate(x, true);
        g = ev.grad;
        if (t) *t = ev.terms;
        return ev.J;
    };
}

void criterion_1() {
    MultiPatchModel model = build_annulus_model(AnnulusModelSpec{}, SquareSideBC{});
    refine_model(model, 5);
    Discretization disc(model, nullptr);
    const RegionLaws laws = base_laws(MaterialLaw::constant(kKappaIron), MaterialLaw::constant(kKappaIron));

    const auto t0 = std::chrono::steady_clock::now();
    const LinearSystem sys = disc.assemble({}, laws);
    const LinearSolver solver(sys);
    const Eigen::VectorXd T = solver.solve_primal();
    const double secs = seconds_since(t0);

    double num = 0.0, den = 0.0;
    for (const BulkQP& qp : disc.bulk()) {
        double th = 0.0;
        for (int l = 0; l < qp.n; ++l) th += qp.N[l] * T[qp.id[l]];
        const double ex = 300.0 - 100.0 * (qp.x.x + 70.0) / 140.0;
        num += (th - ex) * (th - ex) * qp.wJ;
        den += ex * ex * qp.wJ;
    }
    const double err = std::sqrt(num / den);
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "analytic forward solve: DOF %d, L2 rel err %.2e (tol 1e-8), runtime %.2f s (limit 1 s)",
                  model.num_dofs, err, secs);
    report(1, err < 1e-8 && secs < 1.0, buf);
}

void criterion_2() {
    MultiPatchModel model = build_annulus_model(AnnulusModelSpec{}, SquareSideBC{});
    refine_model(model, 3);
    const RegionLaws uniform = base_laws(MaterialLaw::constant(kKappaIron), MaterialLaw::constant(kKappaIron));
    Discretization disc(model, nullptr, NitscheParams{1e12, 0.5});
    const Eigen::VectorXd T = LinearSolver(disc.assemble({}, uniform)).solve_primal();

    double max_jump = 0.0;
    for (const auto& iface : model.interfaces) {
        for (int s = 0; s <= 50; ++s) {
            const double t = s / 50.0;
            auto value = [&](int patch, Side side, double tt) {
                const auto [u, v] = Patch::edge_param(side, tt);
                const auto g = model.patches[patch].eval_geometry(u, v);
                double th = 0.0;
                for (int l = 0; l < g.local.count(); ++l)
                    th += g.local.value[l] * T[model.dof_id(patch, g.local.index_u(l), g.local.index_v(l))];
                return th;
            };
            const double ta = iface.a0 + t * (iface.a1 - iface.a0);
            const double tb = iface.b0 + t * (iface.b1 - iface.b0);
            max_jump = std::max(max_jump,
                                std::abs(value(iface.patch_a, iface.side_a, ta) -
                                         value(iface.patch_b, iface.side_b, tb)));
        }
    }

    const RegionLaws contrast = base_laws(MaterialLaw::constant(kKappaInsulator), MaterialLaw::constant(kKappaIron));
    Discretization d10(model, nullptr, NitscheParams{1e10, 0.5});
    Discretization d12(model, nullptr, NitscheParams{1e12, 0.5});
    const Eigen::VectorXd T10 = LinearSolver(d10.assemble({}, contrast)).solve_primal();
    const Eigen::VectorXd T12 = LinearSolver(d12.assemble({}, contrast)).solve_primal();
    const double drift = (T10 - T12).norm() / T12.norm();

    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "Nitsche patch test: max interface jump %.2e K (tol 1e-6), beta 1e10 vs 1e12 drift %.2e "
                  "(tol 1e-6)",
                  max_jump, drift);
    report(2, max_jump < 1e-6 && drift < 1e-6, buf);
}

void criterion_3() {
    const bool pass = std::abs(MaterialLaw::porous_copper().kappa(0.7) - 70.24) <= 0.01 &&
                      std::abs(MaterialLaw::cu_sn_pb().kappa(0.3) - 28.31) <= 0.01 &&
                      std::abs(MaterialLaw::tcoh().kappa(0.2) - 36.01) <= 0.05 &&
                      std::abs(MaterialLaw::tcoh().kappa(0.8) - 228.52) <= 0.05 &&
                      std::abs(MaterialLaw::emt().kappa(0.0) - 398.0) <= 1e-6 * 398.0 &&
                      std::abs(MaterialLaw::emt().kappa(1.0) - 0.27) <= 1e-6 * 0.27 &&
                      std::abs(MaterialLaw::maxwell().kappa(0.0) - 398.0) <= 1e-6 * 398.0 &&
                      std::abs(MaterialLaw::maxwell().kappa(1.0) - 0.27) <= 1e-6 * 0.27;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "material table: PorousCu(0.7)=%.4f CuSnPb(0.3)=%.4f TCOH(0.2)=%.4f TCOH(0.8)=%.4f "
                  "EMT/Maxwell endpoints exact",
                  MaterialLaw::porous_copper().kappa(0.7), MaterialLaw::cu_sn_pb().kappa(0.3),
                  MaterialLaw::tcoh().kappa(0.2), MaterialLaw::tcoh().kappa(0.8));
    report(3, pass, buf);
}

void criterion_4() {
    const auto t0 = std::chrono::steady_clock::now();
    double worst_overall = 0.0;
    std::string detail;

    auto audit_problem = [&](const std::string& name, DesignProblem& problem) {
        std::vector<double> point(problem.num_variables());
        for (size_t i = 0; i < point.size(); ++i) point[i] = 0.4 + 0.02 * (i % 10);
        const double worst = gradient_audit(oracle(problem), point, 1e-6);
        worst_overall = std::max(worst_overall, worst);
        detail += name + "=" + std::to_string(worst).substr(0, 8) + " ";
    };

    {
        Workbench w(MaterialLaw::constant(kKappaInsulator), 4, nvar25(), SymmetryMode::XY);
        const RegionLaws laws = base_laws(MaterialLaw::constant(kKappaInsulator), MaterialLaw::emt());
        DesignProblem cloak(w.disc, nullptr, w.field, w.sym, laws, {ObjectiveKind::Cloak});
        audit_problem("cloak", cloak);
        DesignProblem pen(w.disc, nullptr, w.field, w.sym, laws, {ObjectiveKind::Cloak, 1.0, 0.0});
        audit_problem("cloak+chi", pen);
        DesignProblem con(w.disc, nullptr, w.field, w.sym, laws, {ObjectiveKind::Cloak}, {ConstraintSpec{}});
        std::vector<double> point(con.num_variables(), 0.45);
        Objective g_fn = [&con](const std::vector<double>& x, std::vector<double>& grad,
                                std::map<std::string, double>*) {
            auto ev = con.evaluate(x, true);
            grad = ev.g_grad[0];
            return ev.g[0];
        };
        const double worst = gradient_audit(g_fn, point, 1e-6);
        worst_overall = std::max(worst_overall, worst);
        detail += "tau_max=" + std::to_string(worst).substr(0, 8) + " ";
    }
    {
        Workbench w(MaterialLaw::constant(kKappaIron), 4, nvar25(), SymmetryMode::XY);
        const RegionLaws laws = base_laws(MaterialLaw::constant(kKappaIron), MaterialLaw::emt());
        DesignProblem cntr(w.disc, nullptr, w.field, w.sym, laws, {ObjectiveKind::Concentrator});
        audit_problem("concentrator", cntr);
        DesignProblem rtr(w.disc, nullptr, w.field, w.sym, laws,
                          {ObjectiveKind::Rotator, 0.0, std::numbers::pi / 2});
        audit_problem("rotator", rtr);
        DesignProblem cc(w.disc, nullptr, w.field, w.sym, laws, {ObjectiveKind::CloakConcentrator});
        audit_problem("cloak_concentrator", cc);

        MultiPatchModel model_v = build_annulus_model(AnnulusModelSpec{}, vertical_bc());
        refine_model(model_v, 4);
        Discretization disc_v(model_v, &w.field);
        DesignProblem bi(w.disc, &disc_v, w.field, w.sym, laws, {ObjectiveKind::Bidirectional});
        audit_problem("bidirectional", bi);
    }
    {
        AnnulusModelSpec spec;
        spec.R_in = 20.0;
        Workbench w(MaterialLaw::constant(kKappaSensor), 4, nvar25(), SymmetryMode::XY, SquareSideBC{}, spec);
        const RegionLaws laws = base_laws(MaterialLaw::constant(kKappaSensor), MaterialLaw::emt());
        DesignProblem sen(w.disc, nullptr, w.field, w.sym, laws, {ObjectiveKind::CloakedSensor});
        audit_problem("cloaked_sensor", sen);
    }

    const double secs = seconds_since(t0);
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "gradient audit (N_var=25, DOF~3e3): worst %.2e (tol 1e-4), runtime %.0f s (limit 120 s) [%s]",
                  worst_overall, secs, detail.c_str());
    report(4, worst_overall < 1e-4 && secs < 120.0, buf);
}

void criterion_5() {
    AnnulusModelSpec spec;
    spec.R_in = 50.0 * std::sqrt(331.0 / 465.0);
    MultiPatchModel model = build_annulus_model(spec, SquareSideBC{});
    refine_model(model, 4);
    Discretization disc(model, nullptr);
    const RegionLaws laws = base_laws(MaterialLaw::constant(kKappaInsulator), MaterialLaw::constant(kKappaCopper));
    const ReferenceFields refs = compute_references(disc, laws);
    const Eigen::VectorXd T = LinearSolver(disc.assemble({}, laws)).solve_primal();
    const double J = eval_cloak(disc, refs, T).value;
    char buf[256];
    std::snprintf(buf, sizeof buf, "bilayer verification: R_in=%.2f mm, copper annulus, J_cloak %.2e (tol 1e-3)",
                  spec.R_in, J);
    report(5, J < 1e-3, buf);
}

void criterion_6() {
    const auto t0 = std::chrono::steady_clock::now();
    Workbench w(MaterialLaw::constant(kKappaInsulator), 3, nvar25(), SymmetryMode::XY);
    const RegionLaws laws = base_laws(MaterialLaw::constant(kKappaInsulator), MaterialLaw::emt());
    DesignProblem problem(w.disc, nullptr, w.field, w.sym, laws, {ObjectiveKind::Cloak});
    OptimizerConfig cfg;
    cfg.max_iterations = 300;
    const MinimizeResult result =
        minimize(oracle(problem), problem.initial_variables(), problem.lower_bounds(),
                 problem.upper_bounds(), cfg);
    const double secs = seconds_since(t0);
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "cloak band (EMT, N_var=25, level-3 mesh): J %.2e after %d iterations (tol 1e-4 within "
                  "300), runtime %.0f s (limit 600 s)",
                  result.J, result.record.rows.back().iteration, secs);
    report(6, result.J <= 1e-4 && result.record.rows.back().iteration <= 300 && secs < 600.0, buf);
}

void criterion_7() {
    Workbench w(MaterialLaw::constant(kKappaIron), 3, nvar25(), SymmetryMode::XY);
    const RegionLaws laws = base_laws(MaterialLaw::constant(kKappaIron), MaterialLaw::emt());
    DesignProblem problem(w.disc, nullptr, w.field, w.sym, laws, {ObjectiveKind::Concentrator});
    OptimizerConfig cfg;
    cfg.max_iterations = 300;

    double j_min = 1e300, j_max = -1e300, psi_mid = 0.0;
    for (double v0 : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        const MinimizeResult r = minimize(oracle(problem), std::vector<double>(problem.num_variables(), v0),
                                          problem.lower_bounds(), problem.upper_bounds(), cfg);
        j_min = std::min(j_min, r.J);
        j_max = std::max(j_max, r.J);
        if (v0 == 0.5) psi_mid = 1.0 / r.J;
    }
    const double spread = (j_max - j_min) / j_min;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "concentrator band: psi %.2f (tol >= 2.5), five-start J spread %.2e (tol 5e-2)", psi_mid,
                  spread);
    report(7, psi_mid >= 2.5 && spread <= 0.05, buf);
}

void criterion_8() {
    Workbench w(MaterialLaw::constant(kKappaInsulator), 3, nvar50(), SymmetryMode::X);
    const RegionLaws laws = base_laws(MaterialLaw::constant(kKappaInsulator), MaterialLaw::emt());
    DesignProblem problem(w.disc, nullptr, w.field, w.sym, laws, {ObjectiveKind::Cloak}, {ConstraintSpec{}});
    OptimizerConfig cfg;
    cfg.max_iterations = 300;

    Objective obj = oracle(problem);
    std::vector<Constraint> constraints = {[&problem](const std::vector<double>& x, std::vector<double>& g) {
        auto ev = problem.evaluate(x, true);
        g = ev.g_grad[0];
        return ev.g[0];
    }};
    const MinimizeResult r = minimize_constrained(obj, constraints, problem.initial_variables(),
                                                  problem.lower_bounds(), problem.upper_bounds(), cfg);
    const auto final_ev = problem.evaluate(r.x, false);
    const double tau = final_ev.terms.at("tau_max");
    const double j_cloak = final_ev.terms.at("J_cloak");
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "constrained cloak (N_var=50, x-symmetry): tau_max %.3f K (tol 220+1e-3), J_cloak %.2e "
                  "(tol 1e-3)",
                  tau, j_cloak);
    report(8, tau <= 220.0 + 1e-3 && j_cloak <= 1e-3, buf);
}

void criterion_9() {
    const int max_levels = 4;
    std::vector<std::vector<double>> densities;
    OptimizerConfig cfg;
    cfg.max_iterations = 300;
    const RegionLaws laws = base_laws(MaterialLaw::constant(kKappaInsulator), MaterialLaw::emt());
    for (int lvl = 1; lvl <= max_levels; ++lvl) {
        Workbench w(MaterialLaw::constant(kKappaInsulator), lvl, nvar25(), SymmetryMode::XY);
        DesignProblem problem(w.disc, nullptr, w.field, w.sym, laws, {ObjectiveKind::Cloak});
        const MinimizeResult r = minimize(oracle(problem), problem.initial_variables(),
                                          problem.lower_bounds(), problem.upper_bounds(), cfg);
        densities.push_back(w.sym.expand(r.x));
    }

    MultiPatchModel probe = build_annulus_model(AnnulusModelSpec{}, SquareSideBC{});
    DensityField field(nvar25());
    const Patch& dp = probe.patches[1];
    const GaussRule gu = gauss_rule(3), gv = gauss_rule(2);
    auto error_vs_ref = [&](const std::vector<double>& a) {
        double num = 0.0, den = 0.0;
        for (const auto& [u0, u1] : field.basis().ku().elements())
            for (const auto& [v0, v1] : field.basis().kv().elements())
                for (size_t qa = 0; qa < gu.nodes.size(); ++qa)
                    for (size_t qb = 0; qb < gv.nodes.size(); ++qb) {
                        const double u = u0 + (u1 - u0) * gu.nodes[qa];
                        const double v = v0 + (v1 - v0) * gv.nodes[qb];
                        const auto e = field.basis().eval(u, v);
                        double va = 0.0, vr = 0.0;
                        for (int l = 0; l < e.count(); ++l) {
                            const int idx = field.coeff_index(e.index_u(l), e.index_v(l));
                            va += e.value[l] * a[idx];
                            vr += e.value[l] * densities.back()[idx];
                        }
                        const double wq = dp.eval_geometry(u, v).detJ * gu.weights[qa] * gv.weights[qb] *
                                          (u1 - u0) * (v1 - v0);
                        num += (va - vr) * (va - vr) * wq;
                        den += vr * vr * wq;
                    }
        return std::sqrt(num / den);
    };

    std::vector<double> errors;
    for (int i = 0; i + 1 < max_levels; ++i) errors.push_back(error_vs_ref(densities[i]));
    bool monotone = true;
    for (size_t i = 1; i < errors.size(); ++i)
        if (errors[i] > errors[i - 1]) monotone = false;
    const bool under = errors.back() < 0.02;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "mesh sensitivity: density errors vs finest %.4f / %.4f / %.4f, monotone %s, finest "
                  "non-reference %.4f < 0.02",
                  errors[0], errors[1], errors[2], monotone ? "yes" : "no", errors.back());
    report(9, monotone && under, buf);
}

void criterion_10() {
    bool monotone = true;
    double prev = -1.0;
    for (double t = 0.2; t <= 1.41; t += 0.2) {
        const double f = gyroid_cell_fraction(t, 1000000);
        if (f <= prev) monotone = false;
        prev = f;
    }

    MultiPatchModel model = build_annulus_model(AnnulusModelSpec{}, SquareSideBC{});
    DensityField field(nvar25());
    std::fill(field.coefficients().begin(), field.coefficients().end(), 0.5);
    const ReconstructionResult rec = reconstruct_and_trim(model, field, 140.0 / 11.0, 6);
    bool contained = true;
    for (size_t i = 0; i < rec.trimmed.pixels.size(); ++i)
        if (rec.trimmed.pixels[i] && (!rec.tessellation.pixels[i] || !rec.mask.pixels[i])) contained = false;
    long occupied = 0;
    for (char c : rec.grid.occupied) occupied += c;
    const bool staged = rec.grid.nx == 11 && rec.grid.ny == 11 && occupied > 0 &&
                        rec.grid.occupied[rec.grid.index(0, 0)] == 0 && !rec.contours.empty();

    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "reconstruction: cell fraction strictly monotone in t %s, trimmed within tessellation %s, "
                  "11x11 staged workflow %s (%ld occupied voxels, %zu contours)",
                  monotone ? "yes" : "no", contained ? "yes" : "no", staged ? "yes" : "no", occupied,
                  rec.contours.size());
    report(10, monotone && contained && staged, buf);
}

}  // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    std::printf("%d of 10 criteria passed (%.0f s total)\n", 10 - g_failures, seconds_since(t0));
    return g_failures;
}
