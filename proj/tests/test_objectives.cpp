#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include "igatherm/optimizer.hpp"
#include "igatherm/problem.hpp"

using namespace igatherm;

namespace {

SquareSideBC horizontal_bc() { return SquareSideBC{}; }

SquareSideBC vertical_bc() {
    SquareSideBC bc;
    bc.left = EdgeBC::neumann(0.0);
    bc.right = EdgeBC::neumann(0.0);
    bc.top = EdgeBC::dirichlet(300.0);
    bc.bottom = EdgeBC::dirichlet(200.0);
    return bc;
}

struct Env {
    MultiPatchModel model;
    std::unique_ptr<DensityField> field;
    std::unique_ptr<SymmetryMap> sym;
    std::unique_ptr<Discretization> disc;
    RegionLaws laws;

    Env(const MaterialLaw& in_law, const MaterialLaw& design_law, int levels, const SquareSideBC& bc,
        double r_in = 10.0, SymmetryMode mode = SymmetryMode::XY) {
        AnnulusModelSpec spec;
        spec.R_in = r_in;
        model = build_annulus_model(spec, bc);
        refine_model(model, levels);
        DesignBasisSpec dspec;
        dspec.circ_count = 3;
        dspec.radial_count = 2;
        field = std::make_unique<DensityField>(dspec);
        sym = std::make_unique<SymmetryMap>(*field, mode);
        disc = std::make_unique<Discretization>(model, field.get());
        laws.in = in_law;
        laws.design = design_law;
        laws.out = MaterialLaw::constant(kKappaIron);
    }
};

Objective problem_objective(const DesignProblem& problem) {
    return [&problem](const std::vector<double>& x, std::vector<double>& grad,
                      std::map<std::string, double>* terms) {
        auto ev = problem.evaluate(x, true);
        grad = ev.grad;
        if (terms) *terms = ev.terms;
        return ev.J;
    };
}

}  // namespace

TEST_CASE("cloak normalization fixed points") {
    Env env(MaterialLaw::constant(kKappaInsulator), MaterialLaw::emt(), 1, horizontal_bc());
    const ReferenceFields refs = compute_references(*env.disc, env.laws);
    CHECK(refs.jt_cloak > 0.0);
    CHECK(!refs.insulator_fallback);
    CHECK(eval_cloak(*env.disc, refs, refs.T_tilde).value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(eval_cloak(*env.disc, refs, refs.T_bar).value == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("intermediate penalty values") {
    Env env(MaterialLaw::constant(kKappaInsulator), MaterialLaw::emt(), 2, horizontal_bc());
    std::vector<double> density(env.field->num_coefficients());

    std::fill(density.begin(), density.end(), 0.0);
    CHECK(eval_intermediate_penalty(*env.disc, density).value == doctest::Approx(0.0));
    std::fill(density.begin(), density.end(), 1.0);
    CHECK(eval_intermediate_penalty(*env.disc, density).value == doctest::Approx(0.0));
    std::fill(density.begin(), density.end(), 0.5);
    const double area = std::numbers::pi * (50.0 * 50.0 - 10.0 * 10.0);
    CHECK(eval_intermediate_penalty(*env.disc, density).value ==
          doctest::Approx(0.00390625 * area).epsilon(1e-6));
}

TEST_CASE("concentrator normalization and sign") {
    Env env(MaterialLaw::constant(kKappaIron), MaterialLaw::emt(), 1, horizontal_bc());
    const ReferenceFields refs = compute_references(*env.disc, env.laws);
    CHECK(refs.psi_tilde > 0.0);
    CHECK(eval_concentrator(*env.disc, refs, refs.T_bar).terms.at("psi") == doctest::Approx(1.0).epsilon(1e-12));
    // reversing the applied gradient negates the entering flux
    const Eigen::VectorXd T_rev = Eigen::VectorXd::Constant(refs.T_bar.size(), 500.0) - refs.T_bar;
    CHECK(eval_concentrator(*env.disc, refs, T_rev).terms.at("psi") == doctest::Approx(-1.0).epsilon(1e-10));
}

TEST_CASE("rotator fixed points and constant invariance") {
    Env env(MaterialLaw::constant(kKappaIron), MaterialLaw::emt(), 1, horizontal_bc());
    const ReferenceFields refs = compute_references(*env.disc, env.laws);
    CHECK(eval_rotator(*env.disc, refs, refs.T_bar, 0.0).value == doctest::Approx(0.0).epsilon(1e-12));
    const Eigen::VectorXd T_rev = Eigen::VectorXd::Constant(refs.T_bar.size(), 500.0) - refs.T_bar;
    CHECK(eval_rotator(*env.disc, refs, T_rev, std::numbers::pi).value == doctest::Approx(0.0).epsilon(1e-12));

    const Eigen::VectorXd shifted = refs.T_bar.array() + 17.0;
    const double theta = 0.7;
    CHECK(eval_rotator(*env.disc, refs, shifted, theta).value ==
          doctest::Approx(eval_rotator(*env.disc, refs, refs.T_bar, theta).value).epsilon(1e-10));
}

TEST_CASE("cloaked sensor normalization") {
    Env env(MaterialLaw::constant(kKappaSensor), MaterialLaw::emt(), 1, horizontal_bc(), 20.0);
    const ReferenceFields refs = compute_references(*env.disc, env.laws);
    CHECK(eval_cloaked_sensor(*env.disc, refs, refs.T_bar).value == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(eval_cloaked_sensor(*env.disc, refs, refs.T_tilde).value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cloak-concentrator composition") {
    Env env(MaterialLaw::constant(kKappaIron), MaterialLaw::emt(), 1, horizontal_bc());
    const ReferenceFields refs = compute_references(*env.disc, env.laws);
    CHECK(refs.insulator_fallback);  // inner region equals the base material
    CHECK(refs.jt_cloak > 0.0);
    // T_bar is a perfect cloak with psi = 1
    const FunctionalEval fe = eval_cloak_concentrator(*env.disc, refs, refs.T_bar);
    CHECK(fe.value == doctest::Approx(1.0).epsilon(1e-10));
    // the penalty vanishes as psi grows: scale the deviation from uniform flow
    CHECK(fe.terms.at("psi") == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("bidirectional composition at the reference fields") {
    Env env(MaterialLaw::constant(kKappaIron), MaterialLaw::emt(), 1, horizontal_bc());
    Discretization disc2(env.model, env.field.get());
    // the second BC set is not needed for the composition identity:
    // evaluate the two parts on their own references
    const ReferenceFields refs_h = compute_references(*env.disc, env.laws);
    MultiPatchModel model_v = build_annulus_model(AnnulusModelSpec{}, vertical_bc());
    refine_model(model_v, 1);
    Discretization disc_v(model_v, env.field.get());
    const ReferenceFields refs_v = compute_references(disc_v, env.laws);

    const double psi = eval_concentrator(*env.disc, refs_h, refs_h.T_bar).terms.at("psi");
    const double jc = eval_cloak(disc_v, refs_v, refs_v.T_tilde).value;
    CHECK(psi == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(jc == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(jc + 1.0 / (psi * psi * psi * psi) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("weighted maximum temperature properties") {
    Env env(MaterialLaw::constant(kKappaInsulator), MaterialLaw::emt(), 1, horizontal_bc());
    ConstraintSpec spec;
    spec.radius = 15.0;
    spec.t_max = 220.0;

    const Eigen::VectorXd constant = Eigen::VectorXd::Constant(env.model.num_dofs, 241.5);
    const FunctionalEval ce = eval_max_temperature(*env.disc, spec, constant);
    CHECK(ce.terms.at("tau_max") == doctest::Approx(241.5).epsilon(1e-12));
    CHECK(ce.value == doctest::Approx(241.5 - 220.0).epsilon(1e-10));

    std::mt19937 rng(3);
    std::uniform_real_distribution<double> uni(200.0, 300.0);
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::VectorXd T(env.model.num_dofs);
        for (int i = 0; i < T.size(); ++i) T[i] = uni(rng);
        const double tau = eval_max_temperature(*env.disc, spec, T).terms.at("tau_max");
        // bounded by the sampled extremes of the region
        double tmax = -1e300, tsum = 0.0, area = 0.0;
        for (const BulkQP& qp : env.disc->bulk()) {
            if (qp.x.norm() > spec.radius) continue;
            double t = 0.0;
            for (int l = 0; l < qp.n; ++l) t += qp.N[l] * T[qp.id[l]];
            tmax = std::max(tmax, t);
            tsum += t * qp.wJ;
            area += qp.wJ;
        }
        CHECK(tau <= tmax + 1e-10);
        CHECK(tau >= tsum / area - 1e-10);

        // pointwise increase does not decrease the weighted maximum
        Eigen::VectorXd bump(env.model.num_dofs);
        std::uniform_real_distribution<double> pos(0.0, 5.0);
        for (int i = 0; i < bump.size(); ++i) bump[i] = pos(rng);
        const double tau_up = eval_max_temperature(*env.disc, spec, T + bump).terms.at("tau_max");
        CHECK(tau_up >= tau - 1e-9);
    }
}

TEST_CASE("adjoint gradients match central differences for every functional") {
    std::mt19937 rng(17);

    auto audit = [&rng](DesignProblem& problem, double tol) {
        std::uniform_real_distribution<double> uni(0.35, 0.65);
        std::vector<double> point(problem.num_variables());
        for (auto& v : point) v = uni(rng);
        const double worst = gradient_audit(problem_objective(problem), point, 1e-6);
        CHECK(worst < tol);
        return worst;
    };

    {
        Env env(MaterialLaw::constant(kKappaInsulator), MaterialLaw::emt(), 1, horizontal_bc());
        DesignProblem plain(*env.disc, nullptr, *env.field, *env.sym, env.laws, {ObjectiveKind::Cloak});
        audit(plain, 1e-5);
        DesignProblem penalized(*env.disc, nullptr, *env.field, *env.sym, env.laws,
                                {ObjectiveKind::Cloak, 1.0, 0.0});
        audit(penalized, 1e-5);
    }
    {
        Env env(MaterialLaw::constant(kKappaIron), MaterialLaw::emt(), 1, horizontal_bc());
        DesignProblem cntr(*env.disc, nullptr, *env.field, *env.sym, env.laws, {ObjectiveKind::Concentrator});
        audit(cntr, 1e-5);
        DesignProblem rtr(*env.disc, nullptr, *env.field, *env.sym, env.laws,
                          {ObjectiveKind::Rotator, 0.0, std::numbers::pi / 2});
        audit(rtr, 1e-5);
        DesignProblem both(*env.disc, nullptr, *env.field, *env.sym, env.laws,
                           {ObjectiveKind::CloakConcentrator});
        audit(both, 1e-5);
    }
    {
        Env env(MaterialLaw::constant(kKappaSensor), MaterialLaw::emt(), 1, horizontal_bc(), 20.0);
        DesignProblem sensor(*env.disc, nullptr, *env.field, *env.sym, env.laws,
                             {ObjectiveKind::CloakedSensor});
        audit(sensor, 1e-5);
    }
    {
        Env env(MaterialLaw::constant(kKappaIron), MaterialLaw::emt(), 1, horizontal_bc());
        MultiPatchModel model_v = build_annulus_model(AnnulusModelSpec{}, vertical_bc());
        refine_model(model_v, 1);
        Discretization disc_v(model_v, env.field.get());
        DesignProblem bi(*env.disc, &disc_v, *env.field, *env.sym, env.laws,
                         {ObjectiveKind::Bidirectional});
        audit(bi, 1e-5);
    }
}

TEST_CASE("penalty-only objective has a purely explicit gradient") {
    Env env(MaterialLaw::constant(kKappaInsulator), MaterialLaw::emt(), 1, horizontal_bc());
    DesignProblem pen(*env.disc, nullptr, *env.field, *env.sym, env.laws,
                      {ObjectiveKind::IntermediatePenalty});
    std::vector<double> point(pen.num_variables(), 0.4);
    CHECK(gradient_audit(problem_objective(pen), point, 1e-6) < 1e-7);
}

TEST_CASE("constraint gradient matches central differences") {
    Env env(MaterialLaw::constant(kKappaInsulator), MaterialLaw::emt(), 1, horizontal_bc());
    DesignProblem problem(*env.disc, nullptr, *env.field, *env.sym, env.laws, {ObjectiveKind::Cloak},
                          {ConstraintSpec{}});
    Objective g_as_objective = [&problem](const std::vector<double>& x, std::vector<double>& grad,
                                          std::map<std::string, double>*) {
        auto ev = problem.evaluate(x, true);
        grad = ev.g_grad[0];
        return ev.g[0];
    };
    std::vector<double> point(problem.num_variables(), 0.45);
    CHECK(gradient_audit(g_as_objective, point, 1e-6) < 1e-5);
}

TEST_CASE("bidirectional evaluation runs two primal solves per call") {
    Env env(MaterialLaw::constant(kKappaIron), MaterialLaw::emt(), 0, horizontal_bc());
    MultiPatchModel model_v = build_annulus_model(AnnulusModelSpec{}, vertical_bc());
    Discretization disc_v(model_v, env.field.get());
    DesignProblem bi(*env.disc, &disc_v, *env.field, *env.sym, env.laws, {ObjectiveKind::Bidirectional});
    const long before = bi.primal_solve_count();
    bi.evaluate(bi.initial_variables(), false);
    CHECK(bi.primal_solve_count() - before == 2);
}

TEST_CASE("mismatched DOF layouts are rejected") {
    Env env(MaterialLaw::constant(kKappaInsulator), MaterialLaw::emt(), 1, horizontal_bc());
    const ReferenceFields refs = compute_references(*env.disc, env.laws);
    CHECK_THROWS_AS(eval_cloak(*env.disc, refs, Eigen::VectorXd::Zero(3)), std::invalid_argument);
}

TEST_CASE("swapping the two boundary sets swaps the bidirectional roles") {
    Env env(MaterialLaw::constant(kKappaIron), MaterialLaw::emt(), 1, horizontal_bc());
    MultiPatchModel model_v = build_annulus_model(AnnulusModelSpec{}, vertical_bc());
    refine_model(model_v, 1);
    Discretization disc_v(model_v, env.field.get());

    DesignProblem swapped(disc_v, env.disc.get(), *env.field, *env.sym, env.laws,
                          {ObjectiveKind::Bidirectional});
    std::vector<double> vars(swapped.num_variables(), 0.45);
    const auto ev = swapped.evaluate(vars, false);

    // compose the swapped roles by hand: concentrate on the vertical set,
    // cloak on the horizontal one
    const std::vector<double> density = env.sym->expand(vars);
    const Eigen::VectorXd T_v = LinearSolver(disc_v.assemble(density, env.laws)).solve_primal();
    const Eigen::VectorXd T_h = LinearSolver(env.disc->assemble(density, env.laws)).solve_primal();
    const ReferenceFields refs_v = compute_references(disc_v, env.laws);
    const ReferenceFields refs_h = compute_references(*env.disc, env.laws);
    const double psi = eval_concentrator(disc_v, refs_v, T_v).terms.at("psi");
    const double jc = eval_cloak(*env.disc, refs_h, T_h).value;
    CHECK(ev.J == doctest::Approx(jc + 1.0 / (psi * psi * psi * psi)).epsilon(1e-12));
}
