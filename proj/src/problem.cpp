#include "igatherm/problem.hpp"

namespace igatherm {

DesignProblem::DesignProblem(const Discretization& disc, const Discretization* disc_secondary,
                             const DensityField& field, const SymmetryMap& sym, RegionLaws laws,
                             ObjectiveSpec objective, std::vector<ConstraintSpec> constraints)
    : disc_(&disc),
      disc2_(disc_secondary),
      field_(&field),
      sym_(&sym),
      laws_(std::move(laws)),
      objective_(objective),
      constraints_(std::move(constraints)) {
    if (objective_.kind == ObjectiveKind::Bidirectional && !disc2_)
        throw std::invalid_argument("DesignProblem: bidirectional objective needs a second BC set");
    refs_ = compute_references(*disc_, laws_);
    if (disc2_) refs2_ = compute_references(*disc2_, laws_);
}

std::vector<double> DesignProblem::lower_bounds() const {
    return std::vector<double>(num_variables(), laws_.design.v_min());
}

std::vector<double> DesignProblem::upper_bounds() const {
    return std::vector<double>(num_variables(), laws_.design.v_max());
}

std::vector<double> DesignProblem::initial_variables() const {
    return std::vector<double>(num_variables(), 0.5 * (laws_.design.v_min() + laws_.design.v_max()));
}

FunctionalEval DesignProblem::objective_eval(const Discretization& disc, const ReferenceFields& refs,
                                             const Eigen::VectorXd& T,
                                             const std::vector<double>& density) const {
    switch (objective_.kind) {
        case ObjectiveKind::Cloak: {
            FunctionalEval out = eval_cloak(disc, refs, T);
            if (objective_.chi > 0.0) {
                const FunctionalEval pen = eval_intermediate_penalty(disc, density);
                out.terms["J_cloak"] = out.value;
                out.terms["J_intpen"] = pen.value;
                out.value += objective_.chi * pen.value;
                for (size_t i = 0; i < out.explicit_dv.size(); ++i)
                    out.explicit_dv[i] += objective_.chi * pen.explicit_dv[i];
            }
            return out;
        }
        case ObjectiveKind::IntermediatePenalty: {
            FunctionalEval out = eval_intermediate_penalty(disc, density);
            out.adjoint_load = Eigen::VectorXd::Zero(disc.num_dofs());
            return out;
        }
        case ObjectiveKind::Concentrator: return eval_concentrator(disc, refs, T);
        case ObjectiveKind::Rotator: return eval_rotator(disc, refs, T, objective_.theta);
        case ObjectiveKind::CloakedSensor: return eval_cloaked_sensor(disc, refs, T);
        case ObjectiveKind::CloakConcentrator: return eval_cloak_concentrator(disc, refs, T);
        default:
            throw std::logic_error("objective_eval: bidirectional handled at the evaluate level");
    }
}

DesignProblem::Evaluation DesignProblem::evaluate(const std::vector<double>& vars,
                                                  bool with_gradients) const {
    const std::vector<double> density = sym_->expand(vars);
    Evaluation out;

    const LinearSystem sys = disc_->assemble(density, laws_);
    const LinearSolver solver(sys);
    out.T = solver.solve_primal();
    ++primal_solves_;

    std::vector<double> sens(density.size(), 0.0);

    if (objective_.kind == ObjectiveKind::Bidirectional) {
        const LinearSystem sys2 = disc2_->assemble(density, laws_);
        const LinearSolver solver2(sys2);
        out.T_secondary = solver2.solve_primal();
        ++primal_solves_;

        // horizontal set concentrates, vertical set cloaks
        FunctionalEval cntr = eval_concentrator(*disc_, refs_, out.T);
        FunctionalEval cloak = eval_cloak(*disc2_, refs2_, out.T_secondary);
        const double psi = cntr.terms["psi"];
        out.J = cloak.value + 1.0 / (psi * psi * psi * psi);
        out.terms = {{"J_cloakcntr", out.J}, {"J_cloak", cloak.value}, {"psi", psi}};
        if (with_gradients) {
            const double chain = 4.0 / (psi * psi * psi);
            const Eigen::VectorXd P1 = solver.solve_adjoint(chain * cntr.adjoint_load);
            const Eigen::VectorXd P2 = solver2.solve_adjoint(cloak.adjoint_load);
            const std::vector<double> s1 = disc_->apply_dK_dv(density, laws_, P1, out.T);
            const std::vector<double> s2 = disc2_->apply_dK_dv(density, laws_, P2, out.T_secondary);
            for (size_t i = 0; i < sens.size(); ++i) sens[i] -= s1[i] + s2[i];
        }
    } else {
        FunctionalEval fe = objective_eval(*disc_, refs_, out.T, density);
        out.J = fe.value;
        out.terms = fe.terms;
        if (with_gradients) {
            sens = fe.explicit_dv;
            if (fe.adjoint_load.size() == disc_->num_dofs() && fe.adjoint_load.norm() > 0.0) {
                const Eigen::VectorXd P = solver.solve_adjoint(fe.adjoint_load);
                const std::vector<double> s = disc_->apply_dK_dv(density, laws_, P, out.T);
                for (size_t i = 0; i < sens.size(); ++i) sens[i] -= s[i];
            }
        }
    }

    if (with_gradients) out.grad = sym_->reduce_gradient(sens);

    for (const ConstraintSpec& spec : constraints_) {
        FunctionalEval ge = eval_max_temperature(*disc_, spec, out.T);
        out.g.push_back(ge.value);
        out.terms["tau_max"] = ge.terms["tau_max"];
        if (with_gradients) {
            const Eigen::VectorXd Pg = solver.solve_adjoint(ge.adjoint_load);
            std::vector<double> gs = disc_->apply_dK_dv(density, laws_, Pg, out.T);
            for (auto& v : gs) v = -v;
            out.g_grad.push_back(sym_->reduce_gradient(gs));
        }
    }
    return out;
}

}  // namespace igatherm
