#pragma once

#include <Eigen/Sparse>

#include "igatherm/design_field.hpp"
#include "igatherm/geometry.hpp"
#include "igatherm/materials.hpp"

namespace igatherm {

struct NitscheParams {
    double beta = 1e12;
    double gamma = 0.5;
};

struct RegionLaws {
    MaterialLaw in = MaterialLaw::constant(kKappaInsulator);
    MaterialLaw design = MaterialLaw::emt();
    MaterialLaw out = MaterialLaw::constant(kKappaIron);

    const MaterialLaw& of(Region r) const {
        switch (r) {
            case Region::In: return in;
            case Region::Design: return design;
            default: return out;
        }
    }
};

inline constexpr int kMaxLocal = 9;

struct BulkQP {
    int patch = 0;
    Region region = Region::Out;
    double u = 0, v = 0;
    Vec2 x;
    double wJ = 0;
    int n = 0;
    int id[kMaxLocal];
    double N[kMaxLocal], gx[kMaxLocal], gy[kMaxLocal];
    // local design-basis functions when the point lies in the design region
    int n_des = 0;
    int des[kMaxLocal];
    double R[kMaxLocal];
};

struct IfaceSide {
    Region region = Region::Out;
    int n = 0;
    int id[kMaxLocal];
    double N[kMaxLocal], gx[kMaxLocal], gy[kMaxLocal];
    int n_des = 0;
    int des[kMaxLocal];
    double R[kMaxLocal];
};

struct IfaceQP {
    int pairing = 0;
    double wL = 0;  // Gauss weight times physical edge length element
    Vec2 normal;    // outward from side 1
    Vec2 x;
    IfaceSide s1, s2;
    // Matched edge parameterizations make the two sides' nonzero trace
    // functions identical 1D functions; the jump is computed through paired
    // coefficient differences so continuous fields see an exactly zero
    // penalty regardless of the penalty scale.
    int m = 0;
    double e[kMaxDegree + 1];
    int eid1[kMaxDegree + 1], eid2[kMaxDegree + 1];
};

struct BoundaryQP {
    int patch = 0;
    BCType type = BCType::None;
    double value = 0, h_coeff = 0, t_ambient = 0;
    double wL = 0;
    Vec2 x;
    int n = 0;
    int id[kMaxLocal];
    double N[kMaxLocal];
};

// The Nitsche penalty beta = 1e12 produces matrix entries eleven orders above
// the bulk terms; double-precision storage alone already breaks the penalty
// block's row-sum cancellation by beta*ulp. The operator is therefore built
// and factorized in extended precision.
using SparseLd = Eigen::SparseMatrix<long double>;
using VectorLd = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

/// Interface contribution of one quadrature point with the conductivities
/// folded in; consumed by the matrix-free operator application.
struct IfaceApplyQP {
    double wL = 0;
    double c1 = 0, c2 = 0;  // gamma*kappa1, (1-gamma)*kappa2
    int m = 0;
    double e[kMaxDegree + 1];
    int eid1[kMaxDegree + 1], eid2[kMaxDegree + 1];
    int n1 = 0, n2 = 0;
    int id1[kMaxLocal], id2[kMaxLocal];
    double gn1[kMaxLocal], gn2[kMaxLocal];  // n . grad of each side's locals
};

struct LinearSystem {
    SparseLd K_pre;   // fully assembled operator; used only to precondition
    SparseLd K_rest;  // bulk + Robin terms (interface terms applied matrix-free)
    std::vector<IfaceApplyQP> iface;
    double beta = 0;
    Eigen::VectorXd F;
    std::vector<int> dirichlet_dofs;
    std::vector<double> dirichlet_values;
    bool has_robin = false;

    /// y = A x with the interface terms evaluated through paired jumps.
    VectorLd apply(const VectorLd& x) const;
};

/// Quadrature-level cache for one model: basis traces, physical gradients,
/// interface pairs and the design-basis values at every point. Materials and
/// density enter only at assemble time, so one cache serves every solve of an
/// optimization run, reference fields included.
class Discretization {
public:
    Discretization(const MultiPatchModel& model, const DensityField* density, NitscheParams params = {});

    const MultiPatchModel& model() const { return *model_; }
    const NitscheParams& nitsche() const { return params_; }
    int num_dofs() const { return model_->num_dofs; }
    bool has_robin() const { return has_robin_; }

    const std::vector<BulkQP>& bulk() const { return bulk_; }
    const std::vector<IfaceQP>& iface() const { return iface_; }
    const std::vector<BoundaryQP>& boundary() const { return boundary_; }
    const std::vector<int>& dirichlet_dofs() const { return dirichlet_dofs_; }
    const std::vector<double>& dirichlet_values() const { return dirichlet_values_; }

    SparseLd assemble_K(const std::vector<double>& density, const RegionLaws& laws) const;
    SparseLd assemble_K_bulk_robin(const std::vector<double>& density, const RegionLaws& laws) const;
    std::vector<IfaceApplyQP> interface_apply_data(const std::vector<double>& density,
                                                   const RegionLaws& laws) const;
    Eigen::VectorXd assemble_F() const;
    LinearSystem assemble(const std::vector<double>& density, const RegionLaws& laws) const;

    /// s_i = P^T (dK/dv_i) T for every design control coefficient i, including
    /// the density-dependent Nitsche consistency terms on interface edges.
    std::vector<double> apply_dK_dv(const std::vector<double>& density, const RegionLaws& laws,
                                    const Eigen::VectorXd& P, const Eigen::VectorXd& T) const;

    int num_design_coefficients() const { return density_ ? density_->num_coefficients() : 0; }

    static double density_value(const BulkQP& qp, const std::vector<double>& density);
    static double density_value(const IfaceSide& side, const std::vector<double>& density);

private:
    const MultiPatchModel* model_;
    const DensityField* density_;
    NitscheParams params_;
    std::vector<BulkQP> bulk_;
    std::vector<IfaceQP> iface_;
    std::vector<BoundaryQP> boundary_;
    std::vector<int> dirichlet_dofs_;
    std::vector<double> dirichlet_values_;
    bool has_robin_ = false;

};

/// Smoothed Dirac kernel of the point-source model: 3/(4 delta) (1 - r^2/delta^2)
/// inside the support, zero outside. One-dimensional normalization, as printed.
double dirac_kernel(double r, double delta);

}  // namespace igatherm
