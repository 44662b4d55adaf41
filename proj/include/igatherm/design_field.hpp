#pragma once

#include <vector>

#include "igatherm/geometry.hpp"
#include "igatherm/splines.hpp"

namespace igatherm {

/// Layout of the density basis over the design annulus' parametric domain.
/// The basis is decoupled from the solution mesh: refining the model never
/// touches it. Degrees follow the solution field (2 circumferential, 1 radial).
struct DesignBasisSpec {
    enum class Circ {
        QuarterStructured,  // double knots at 1/4, 1/2, 3/4; circ_count = functions per quarter
        Uniform             // single uniform interior knots; circ_count = total functions
    };
    Circ structure = Circ::QuarterStructured;
    int circ_count = 5;
    int radial_count = 5;

    bool operator==(const DesignBasisSpec&) const = default;
};

enum class SymmetryMode { None, X, XY };

/// NURBS-parameterized relative-density surface over the design patch.
class DensityField {
public:
    explicit DensityField(const DesignBasisSpec& spec);

    const DesignBasisSpec& spec() const { return spec_; }
    const RationalBasis& basis() const { return basis_; }
    int num_coefficients() const { return m_; }
    int num_circ() const { return basis_.num_u(); }
    int num_radial() const { return basis_.num_v(); }

    std::vector<double>& coefficients() { return coeff_; }
    const std::vector<double>& coefficients() const { return coeff_; }

    int coeff_index(int i_circ, int j_radial) const { return i_circ + basis_.num_u() * j_radial; }

    struct Eval {
        double value;
        double du, dv;  // parametric derivatives
    };
    Eval eval(double u, double v) const;

    struct PhysEval {
        double value;
        double dx, dy;  // physical gradient through the patch Jacobian
    };
    PhysEval eval_physical(const Patch& design_patch, double u, double v) const;

private:
    DesignBasisSpec spec_;
    RationalBasis basis_;
    int m_ = 0;
    std::vector<double> coeff_;
};

/// Assignment from independent optimizer variables to density control
/// coefficients: seam closure plus the requested mirror symmetries.
class SymmetryMap {
public:
    SymmetryMap(const DensityField& field, SymmetryMode mode);

    SymmetryMode mode() const { return mode_; }
    int num_variables() const { return n_var_; }
    int num_coefficients() const { return static_cast<int>(coeff_to_var_.size()); }
    const std::vector<int>& coefficient_to_variable() const { return coeff_to_var_; }

    /// vars (length N_var) -> control coefficients (length m).
    std::vector<double> expand(const std::vector<double>& vars) const;

    /// Transpose map: per-coefficient gradient (length m) -> per-variable gradient.
    std::vector<double> reduce_gradient(const std::vector<double>& coeff_grad) const;

private:
    SymmetryMode mode_;
    int n_var_ = 0;
    std::vector<int> coeff_to_var_;
};

}  // namespace igatherm
