#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "igatherm/assembly.hpp"
#include "igatherm/linsolve.hpp"

using namespace igatherm;

namespace {

RegionLaws all_base(double kappa = 67.0) {
    RegionLaws laws;
    laws.in = MaterialLaw::constant(kappa);
    laws.design = MaterialLaw::constant(kappa);
    laws.out = MaterialLaw::constant(kappa);
    return laws;
}

double linear_plate_field(double x, double L) { return 300.0 - 100.0 * (x + 0.5 * L) / L; }

double l2_relative_error(const Discretization& disc, const Eigen::VectorXd& T, double L) {
    double num = 0.0, den = 0.0;
    for (const BulkQP& qp : disc.bulk()) {
        double th = 0.0;
        for (int l = 0; l < qp.n; ++l) th += qp.N[l] * T[qp.id[l]];
        const double ex = linear_plate_field(qp.x.x, L);
        num += (th - ex) * (th - ex) * qp.wJ;
        den += ex * ex * qp.wJ;
    }
    return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("homogeneous plate reproduces the linear conduction field") {
    MultiPatchModel model = build_annulus_model(AnnulusModelSpec{}, SquareSideBC{});
    refine_model(model, 3);
    Discretization disc(model, nullptr);
    LinearSystem sys = disc.assemble({}, all_base());
    LinearSolver solver(sys);
    const Eigen::VectorXd T = solver.solve_primal();
    CHECK(solver.last_residual() < 1e-10);
    CHECK(l2_relative_error(disc, T, model.L) < 1e-8);
}

TEST_CASE("two-patch Nitsche coupling passes the patch test") {
    MultiPatchModel model = build_two_patch_plate(140.0, 300.0, 200.0);
    refine_model(model, 2);
    Discretization disc(model, nullptr);
    LinearSystem sys = disc.assemble({}, all_base());
    LinearSolver solver(sys);
    const Eigen::VectorXd T = solver.solve_primal();
    CHECK(l2_relative_error(disc, T, model.L) < 1e-8);

    // interface temperature jump below 1e-6 K at 50 samples
    auto field_at = [&](int patch, double u, double v) {
        const auto g = model.patches[patch].eval_geometry(u, v);
        double th = 0.0;
        for (int l = 0; l < g.local.count(); ++l)
            th += g.local.value[l] * T[model.dof_id(patch, g.local.index_u(l), g.local.index_v(l))];
        return th;
    };
    for (int s = 0; s <= 50; ++s) {
        const double t = s / 50.0;
        CHECK(std::abs(field_at(0, 1.0, t) - field_at(1, 0.0, t)) < 1e-6);
    }
}

TEST_CASE("annulus-model interfaces carry no spurious jump for uniform material") {
    MultiPatchModel model = build_annulus_model(AnnulusModelSpec{}, SquareSideBC{});
    refine_model(model, 2);
    Discretization disc(model, nullptr);
    LinearSolver solver(disc.assemble({}, all_base()));
    const Eigen::VectorXd T = solver.solve_primal();
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
            CHECK(std::abs(value(iface.patch_a, iface.side_a, ta) - value(iface.patch_b, iface.side_b, tb)) < 1e-6);
        }
    }
}

TEST_CASE("solution is insensitive to the stabilization parameter") {
    MultiPatchModel model = build_annulus_model(AnnulusModelSpec{}, SquareSideBC{});
    refine_model(model, 2);
    RegionLaws laws = all_base();
    laws.in = MaterialLaw::constant(kKappaInsulator);  // non-trivial field

    Discretization d10(model, nullptr, NitscheParams{1e10, 0.5});
    Discretization d12(model, nullptr, NitscheParams{1e12, 0.5});
    const Eigen::VectorXd T10 = LinearSolver(d10.assemble({}, laws)).solve_primal();
    const Eigen::VectorXd T12 = LinearSolver(d12.assemble({}, laws)).solve_primal();
    CHECK((T10 - T12).norm() / T12.norm() < 1e-6);
}

TEST_CASE("smoothed Dirac kernel values and integral") {
    const double delta = 0.005;
    CHECK(dirac_kernel(0.0, delta) == doctest::Approx(3.0 / (4.0 * delta)).epsilon(1e-14));
    CHECK(dirac_kernel(delta, delta) == doctest::Approx(0.0));
    CHECK(dirac_kernel(2 * delta, delta) == 0.0);

    // dense radial quadrature of the 2D integral over the support disk
    const int n = 200000;
    double integral = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = (i + 0.5) * delta / n;
        integral += dirac_kernel(r, delta) * 2.0 * std::numbers::pi * r * (delta / n);
    }
    CHECK(integral == doctest::Approx(3.0 * std::numbers::pi * delta / 8.0).epsilon(1e-6));
}

TEST_CASE("point sources load the system consistently") {
    AnnulusModelSpec spec;
    MultiPatchModel model = build_annulus_model(spec, SquareSideBC{});
    model.sources = {{{-40.0, 20.0}, 2.0}};
    model.source_bandwidth = 8.0;
    refine_model(model, 3);
    Discretization disc(model, nullptr);
    const Eigen::VectorXd F = disc.assemble_F();
    // sum over partition-of-unity test functions equals the total injected power
    CHECK(F.sum() == doctest::Approx(2.0 * 3.0 * std::numbers::pi * 8.0 / 8.0).epsilon(2e-2));

    MultiPatchModel bad = build_annulus_model(spec, SquareSideBC{});
    bad.sources = {{{200.0, 0.0}, 1.0}};
    bad.source_bandwidth = 8.0;
    CHECK_THROWS_AS(Discretization(bad, nullptr), std::invalid_argument);
}

TEST_CASE("stiffness matrix is symmetric and positive on the constrained space") {
    MultiPatchModel model = build_annulus_model(AnnulusModelSpec{}, SquareSideBC{});
    refine_model(model, 1);
    Discretization disc(model, nullptr);
    RegionLaws laws = all_base();
    laws.in = MaterialLaw::constant(kKappaInsulator);
    const Eigen::SparseMatrix<double> K = disc.assemble_K({}, laws).cast<double>();
    const Eigen::SparseMatrix<double> Kt = Eigen::SparseMatrix<double>(K.transpose());
    double asym = 0.0, scale = 0.0;
    for (int c = 0; c < K.outerSize(); ++c) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(K, c), jt(Kt, c); it; ++it, ++jt) {
            asym = std::max(asym, std::abs(it.value() - jt.value()));
            scale = std::max(scale, std::abs(it.value()));
        }
    }
    CHECK(asym / scale < 1e-9);

    std::mt19937 rng(21);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        Eigen::VectorXd x(model.num_dofs);
        for (int i = 0; i < x.size(); ++i) x[i] = uni(rng);
        for (int dof : disc.dirichlet_dofs()) x[dof] = 0.0;
        CHECK(x.dot(K * x) > 0.0);
    }
}

TEST_CASE("flux balance on the reference plate") {
    MultiPatchModel model = build_annulus_model(AnnulusModelSpec{}, SquareSideBC{});
    refine_model(model, 3);
    Discretization disc(model, nullptr);
    const RegionLaws laws = all_base();
    LinearSolver solver(disc.assemble({}, laws));
    const Eigen::VectorXd T = solver.solve_primal();

    // kappa dT/dn integrated along the left (patch 4) and right (patch 2) sides
    auto edge_flux = [&](int patch) {
        const Patch& p = model.patches[patch];
        const GaussRule rule = gauss_rule(3);
        double total = 0.0;
        for (const auto& [t0, t1] : p.basis.ku().elements()) {
            for (size_t q = 0; q < rule.nodes.size(); ++q) {
                const double t = t0 + (t1 - t0) * rule.nodes[q];
                const auto g = p.eval_geometry(t, 0.0);
                double tx = 0.0, ty = 0.0;
                for (int l = 0; l < g.local.count(); ++l) {
                    const Vec2 grad = p.grad_basis(g, l);
                    const double coef = T[model.dof_id(patch, g.local.index_u(l), g.local.index_v(l))];
                    tx += grad.x * coef;
                    ty += grad.y * coef;
                }
                const Vec2 ref = Patch::reference_normal(Side::VMin);
                Vec2 n{(g.x_v.y * ref.x - g.x_u.y * ref.y) / g.detJ,
                       (-g.x_v.x * ref.x + g.x_u.x * ref.y) / g.detJ};
                n = n * (1.0 / n.norm());
                total += 67.0 * (tx * n.x + ty * n.y) * g.x_u.norm() * rule.weights[q] * (t1 - t0);
            }
        }
        return total;
    };
    const double inflow = edge_flux(4);    // left side: kappa dT/dn > 0 (heat enters)
    const double outflow = -edge_flux(2);  // right side
    CHECK(inflow == doctest::Approx(100.0 * 67.0).epsilon(1e-8));
    CHECK(outflow == doctest::Approx(inflow).epsilon(1e-8));
}

TEST_CASE("dK/dv matches finite differences of the assembled matrix") {
    MultiPatchModel model = build_annulus_model(AnnulusModelSpec{}, SquareSideBC{});
    refine_model(model, 1);
    DesignBasisSpec dspec;
    dspec.circ_count = 3;
    dspec.radial_count = 2;
    DensityField field(dspec);
    // dK/dv has no beta dependence; a unit penalty keeps P^T K T free of the
    // cancellation noise the 1e12 penalty would inject into the difference
    // quotient. The asymmetric gamma exercises the averaging weights.
    Discretization disc(model, &field, NitscheParams{1.0, 0.3});
    RegionLaws laws;
    laws.in = MaterialLaw::constant(kKappaInsulator);
    laws.design = MaterialLaw::emt();
    laws.out = MaterialLaw::constant(67.0);

    std::mt19937 rng(33);
    std::uniform_real_distribution<double> uni(0.3, 0.7);
    std::vector<double> density(field.num_coefficients());
    for (auto& d : density) d = uni(rng);
    Eigen::VectorXd P(model.num_dofs), T(model.num_dofs);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    for (int i = 0; i < model.num_dofs; ++i) {
        P[i] = val(rng);
        T[i] = val(rng);
    }

    const std::vector<double> s = disc.apply_dK_dv(density, laws, P, T);
    const double eps = 1e-6;
    const VectorLd Pl = P.cast<long double>(), Tl = T.cast<long double>();
    for (int i = 0; i < field.num_coefficients(); ++i) {
        std::vector<double> dp = density, dm = density;
        dp[i] += eps;
        dm[i] -= eps;
        const long double jp = Pl.dot(disc.assemble_K(dp, laws) * Tl);
        const long double jm = Pl.dot(disc.assemble_K(dm, laws) * Tl);
        const double fd = static_cast<double>((jp - jm) / (2 * eps));
        CHECK(std::abs(s[i] - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
    }

    // bilinearity and constant-law edge cases
    const std::vector<double> zero_p =
        disc.apply_dK_dv(density, laws, Eigen::VectorXd::Zero(model.num_dofs), T);
    for (double v : zero_p) CHECK(v == 0.0);
    RegionLaws const_laws = all_base();
    const std::vector<double> zero_c = disc.apply_dK_dv(density, const_laws, P, T);
    for (double v : zero_c) CHECK(v == 0.0);
}

TEST_CASE("all-Dirichlet constant boundary gives the constant field") {
    SquareSideBC bc;
    bc.left = bc.right = bc.top = bc.bottom = EdgeBC::dirichlet(250.0);
    MultiPatchModel model = build_annulus_model(AnnulusModelSpec{}, bc);
    refine_model(model, 1);
    Discretization disc(model, nullptr);
    LinearSolver solver(disc.assemble({}, all_base()));
    const Eigen::VectorXd T = solver.solve_primal();
    CHECK((T.array() - 250.0).abs().maxCoeff() < 1e-10 * 250.0);
}

TEST_CASE("a model without Dirichlet or Robin boundaries is rejected") {
    SquareSideBC bc;
    bc.left = bc.right = EdgeBC::neumann(10.0);
    MultiPatchModel model = build_annulus_model(AnnulusModelSpec{}, bc);
    Discretization disc(model, nullptr);
    CHECK_THROWS_AS(LinearSolver(disc.assemble({}, all_base())), SolverError);
}

TEST_CASE("Robin boundary reproduces the analytic linear profile") {
    SquareSideBC bc;
    bc.left = EdgeBC::dirichlet(300.0);
    bc.right = EdgeBC::robin(5.0, 200.0);
    MultiPatchModel model = build_annulus_model(AnnulusModelSpec{}, bc);
    refine_model(model, 3);
    Discretization disc(model, nullptr);
    LinearSolver solver(disc.assemble({}, all_base()));
    const Eigen::VectorXd T = solver.solve_primal();

    // T(x) = 300 + B (x + L/2), kappa B = h (T_inf - T(L/2))
    const double B = 5.0 * (200.0 - 300.0) / (67.0 + 5.0 * 140.0);
    double err = 0.0, scale = 0.0;
    for (const BulkQP& qp : disc.bulk()) {
        double th = 0.0;
        for (int l = 0; l < qp.n; ++l) th += qp.N[l] * T[qp.id[l]];
        const double ex = 300.0 + B * (qp.x.x + 70.0);
        err += (th - ex) * (th - ex) * qp.wJ;
        scale += ex * ex * qp.wJ;
    }
    CHECK(std::sqrt(err / scale) < 1e-8);
}

TEST_CASE("adjoint solve reuses the factorization and matches the homogenized primal") {
    MultiPatchModel model = build_annulus_model(AnnulusModelSpec{}, SquareSideBC{});
    refine_model(model, 1);
    Discretization disc(model, nullptr);
    RegionLaws laws = all_base();
    laws.in = MaterialLaw::constant(kKappaInsulator);
    LinearSystem sys = disc.assemble({}, laws);
    LinearSolver solver(sys);

    const Eigen::VectorXd zero = solver.solve_adjoint(Eigen::VectorXd::Zero(model.num_dofs));
    CHECK(zero.norm() == 0.0);

    LinearSystem homog = sys;
    std::fill(homog.dirichlet_values.begin(), homog.dirichlet_values.end(), 0.0);
    homog.F = sys.F;
    LinearSolver hsolver(homog);
    const Eigen::VectorXd a = solver.solve_adjoint(sys.F);
    const Eigen::VectorXd b = hsolver.solve_primal();
    CHECK((a - b).norm() <= 1e-12 * std::max(1.0, b.norm()));
}
