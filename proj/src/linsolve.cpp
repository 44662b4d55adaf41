#include "igatherm/linsolve.hpp"

#include <string>

namespace igatherm {

LinearSolver::LinearSolver(const LinearSystem& system) : F_(system.F) {
    const int n = static_cast<int>(system.K_pre.rows());
    if (system.dirichlet_dofs.empty() && !system.has_robin)
        throw SolverError("LinearSolver: model has neither Dirichlet nor Robin boundaries; problem is singular");

    sys_ = std::make_shared<LinearSystem>(system);

    global_to_free_.assign(n, 0);
    for (int dof : system.dirichlet_dofs) global_to_free_[dof] = -1;
    for (int i = 0; i < n; ++i) {
        if (global_to_free_[i] == 0) {
            global_to_free_[i] = static_cast<int>(free_.size());
            free_.push_back(i);
        }
    }

    lift_ = VectorLd::Zero(n);
    for (size_t k = 0; k < system.dirichlet_dofs.size(); ++k)
        lift_[system.dirichlet_dofs[k]] = system.dirichlet_values[k];
    lift_shift_ = sys_->apply(lift_);

    // Preconditioner: LDLT of the assembled operator on the free block,
    // Jacobi-equilibrated so the collapsed-edge rows do not destabilize it.
    std::vector<Eigen::Triplet<long double>> trip;
    trip.reserve(system.K_pre.nonZeros());
    for (int col = 0; col < system.K_pre.outerSize(); ++col) {
        const int jc = global_to_free_[col];
        if (jc < 0) continue;
        for (SparseLd::InnerIterator it(system.K_pre, col); it; ++it) {
            const int ir = global_to_free_[static_cast<int>(it.row())];
            if (ir >= 0) trip.emplace_back(ir, jc, it.value());
        }
    }
    SparseLd K_ff(free_.size(), free_.size());
    K_ff.setFromTriplets(trip.begin(), trip.end());

    scale_ = VectorLd::Ones(free_.size());
    for (int i = 0; i < K_ff.outerSize(); ++i) {
        const long double d = K_ff.coeff(i, i);
        if (d > 0.0L) scale_[i] = 1.0L / std::sqrt(d);
    }
    for (int col = 0; col < K_ff.outerSize(); ++col)
        for (SparseLd::InnerIterator it(K_ff, col); it; ++it)
            it.valueRef() *= scale_[it.row()] * scale_[col];

    ldlt_ = std::make_unique<Eigen::SimplicialLDLT<SparseLd>>();
    ldlt_->compute(K_ff);
    if (ldlt_->info() != Eigen::Success)
        throw SolverError("LinearSolver: factorization failed (dofs=" + std::to_string(n) +
                          ", free=" + std::to_string(free_.size()) + ")");
}

VectorLd LinearSolver::apply_free(const VectorLd& x_free) const {
    VectorLd full = VectorLd::Zero(global_to_free_.size());
    for (size_t i = 0; i < free_.size(); ++i) full[free_[i]] = x_free[i];
    const VectorLd y = sys_->apply(full);
    VectorLd out(free_.size());
    for (size_t i = 0; i < free_.size(); ++i) out[i] = y[free_[i]];
    return out;
}

VectorLd LinearSolver::precondition(const VectorLd& r) const {
    return scale_.cwiseProduct(ldlt_->solve(scale_.cwiseProduct(r)));
}

VectorLd LinearSolver::solve_reduced(const VectorLd& b) const {
    const long double bn = b.norm();
    if (bn == 0.0L) {
        last_residual_ = 0.0;
        return VectorLd::Zero(b.size());
    }
    VectorLd x = VectorLd::Zero(b.size());
    VectorLd r = b;
    VectorLd z = precondition(r);
    VectorLd p = z;
    long double rz = r.dot(z);
    long double res = 1.0L;
    for (int it = 0; it < 80; ++it) {
        const VectorLd Ap = apply_free(p);
        const long double pap = p.dot(Ap);
        if (!(pap > 0.0L)) break;
        const long double alpha = rz / pap;
        x += alpha * p;
        r -= alpha * Ap;
        res = r.norm() / bn;
        if (res < 1e-16L) break;
        z = precondition(r);
        const long double rz_next = r.dot(z);
        p = z + (rz_next / rz) * p;
        rz = rz_next;
    }
    last_residual_ = static_cast<double>(res);
    return x;
}

Eigen::VectorXd LinearSolver::solve_primal() const {
    VectorLd rhs(free_.size());
    for (size_t i = 0; i < free_.size(); ++i)
        rhs[i] = static_cast<long double>(F_[free_[i]]) - lift_shift_[free_[i]];
    const VectorLd x = solve_reduced(rhs);
    VectorLd full = lift_;
    for (size_t i = 0; i < free_.size(); ++i) full[free_[i]] = x[i];
    return full.cast<double>();
}

Eigen::VectorXd LinearSolver::solve_adjoint(const Eigen::VectorXd& adjoint_load) const {
    if (adjoint_load.size() != static_cast<Eigen::Index>(global_to_free_.size()))
        throw std::invalid_argument("solve_adjoint: load size mismatch");
    VectorLd rhs(free_.size());
    for (size_t i = 0; i < free_.size(); ++i) rhs[i] = adjoint_load[free_[i]];
    const VectorLd x = solve_reduced(rhs);
    Eigen::VectorXd full = Eigen::VectorXd::Zero(global_to_free_.size());
    for (size_t i = 0; i < free_.size(); ++i) full[free_[i]] = static_cast<double>(x[i]);
    return full;
}

}  // namespace igatherm
