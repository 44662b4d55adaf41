#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <memory>

#include "igatherm/assembly.hpp"

namespace igatherm {

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Direct-preconditioned solver for the reduced symmetric system. Dirichlet
/// rows/columns are eliminated with lifting, so one factorization serves the
/// primal solve and every adjoint right-hand side of an iteration.
///
/// The operator is applied matrix-free with paired interface jumps and the
/// residual driven down by conjugate gradients preconditioned with the
/// factorized assembled matrix; this keeps the 1e12-penalty system accurate
/// to the discretization, not the penalty-polluted roundoff.
class LinearSolver {
public:
    explicit LinearSolver(const LinearSystem& system);

    /// Solve K T = F with prescribed values lifted onto the right-hand side.
    Eigen::VectorXd solve_primal() const;

    /// Solve K^T P = FJ with P = 0 at Dirichlet DOFs. FJ entries at Dirichlet
    /// DOFs are ignored, matching the reduced adjoint problem.
    Eigen::VectorXd solve_adjoint(const Eigen::VectorXd& adjoint_load) const;

    /// Relative residual of the most recent solve on the reduced system.
    double last_residual() const { return last_residual_; }

    int num_free() const { return static_cast<int>(free_.size()); }

private:
    VectorLd apply_free(const VectorLd& x_free) const;
    VectorLd precondition(const VectorLd& r) const;
    VectorLd solve_reduced(const VectorLd& rhs_reduced) const;

    std::shared_ptr<LinearSystem> sys_;
    std::vector<int> free_;            // free dof -> global dof
    std::vector<int> global_to_free_;  // -1 for constrained
    VectorLd scale_;                   // Jacobi equilibration of the preconditioner
    VectorLd lift_;                    // prescribed values scattered to full size
    VectorLd lift_shift_;              // A * lift, full size
    Eigen::VectorXd F_;
    std::unique_ptr<Eigen::SimplicialLDLT<SparseLd>> ldlt_;
    mutable double last_residual_ = 0.0;
};

}  // namespace igatherm
