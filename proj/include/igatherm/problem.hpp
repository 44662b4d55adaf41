#pragma once

#include "igatherm/design_field.hpp"
#include "igatherm/objectives.hpp"

namespace igatherm {

/// The objective/gradient oracle the optimizer drives: expands symmetry
/// variables, assembles, solves the primal and adjoint systems and combines
/// the explicit and adjoint sensitivity paths per design variable.
class DesignProblem {
public:
    DesignProblem(const Discretization& disc, const Discretization* disc_secondary, const DensityField& field,
                  const SymmetryMap& sym, RegionLaws laws, ObjectiveSpec objective,
                  std::vector<ConstraintSpec> constraints = {});

    int num_variables() const { return sym_->num_variables(); }
    std::vector<double> lower_bounds() const;
    std::vector<double> upper_bounds() const;
    /// Midpoint of the admissible interval unless overridden.
    std::vector<double> initial_variables() const;

    const ObjectiveSpec& objective() const { return objective_; }
    const std::vector<ConstraintSpec>& constraints() const { return constraints_; }
    const ReferenceFields& references() const { return refs_; }
    const ReferenceFields* references_secondary() const { return disc2_ ? &refs2_ : nullptr; }
    const Discretization& discretization() const { return *disc_; }
    const SymmetryMap& symmetry() const { return *sym_; }
    const RegionLaws& laws() const { return laws_; }

    struct Evaluation {
        double J = 0.0;
        std::map<std::string, double> terms;
        std::vector<double> grad;
        std::vector<double> g;                    // inequality constraint values
        std::vector<std::vector<double>> g_grad;  // one gradient per constraint
        Eigen::VectorXd T;                        // primary temperature field
        Eigen::VectorXd T_secondary;
    };

    Evaluation evaluate(const std::vector<double>& vars, bool with_gradients) const;

    long primal_solve_count() const { return primal_solves_; }

private:
    FunctionalEval objective_eval(const Discretization& disc, const ReferenceFields& refs,
                                  const Eigen::VectorXd& T, const std::vector<double>& density) const;

    const Discretization* disc_;
    const Discretization* disc2_;
    const DensityField* field_;
    const SymmetryMap* sym_;
    RegionLaws laws_;
    ObjectiveSpec objective_;
    std::vector<ConstraintSpec> constraints_;
    ReferenceFields refs_;
    ReferenceFields refs2_;
    mutable long primal_solves_ = 0;
};

}  // namespace igatherm
