#pragma once

#include <array>
#include <optional>
#include <vector>

#include "igatherm/splines.hpp"

namespace igatherm {

enum class Region { In = 0, Design = 1, Out = 2 };

enum class Side { UMin = 0, UMax = 1, VMin = 2, VMax = 3 };

enum class BCType { None, Dirichlet, Neumann, Robin, Interface };

struct EdgeBC {
    BCType type = BCType::None;
    double value = 0.0;  // prescribed temperature (Dirichlet) or normal flux (Neumann)
    double h_coeff = 0.0;
    double t_ambient = 0.0;

    static EdgeBC dirichlet(double t) { return {BCType::Dirichlet, t, 0.0, 0.0}; }
    static EdgeBC neumann(double q) { return {BCType::Neumann, q, 0.0, 0.0}; }
    static EdgeBC robin(double h, double t_inf) { return {BCType::Robin, 0.0, h, t_inf}; }
    static EdgeBC interface() { return {BCType::Interface, 0.0, 0.0, 0.0}; }
};

/// One rational tensor-product patch mapping [0,1]^2 into the plane (mm).
struct Patch {
    RationalBasis basis;
    Grid<Vec2> ctrl;
    Region region = Region::Out;
    std::array<EdgeBC, 4> edge_bc{};

    struct GeomEval {
        Vec2 x;
        Vec2 x_u, x_v;
        double detJ = 0.0;
        RationalBasis::LocalEval local;
    };

    GeomEval eval_geometry(double u, double v) const;

    /// Physical gradient of local basis function l given a geometry evaluation.
    Vec2 grad_basis(const GeomEval& g, int l) const;

    /// (u, v) of a point on the given edge at edge parameter t in [0, 1].
    static std::pair<double, double> edge_param(Side side, double t);

    /// Reference outward normal of the given edge.
    static Vec2 reference_normal(Side side);
};

struct InterfacePairing {
    int patch_a = 0;  // region-1 side; interface normal points out of this patch
    Side side_a = Side::VMin;
    double a0 = 0.0, a1 = 1.0;
    int patch_b = 0;
    Side side_b = Side::VMin;
    double b0 = 0.0, b1 = 1.0;
};

struct PointSource {
    Vec2 pos;      // mm
    double power;  // W
};

struct MultiPatchModel {
    std::vector<Patch> patches;
    std::vector<InterfacePairing> interfaces;
    std::vector<PointSource> sources;
    double source_bandwidth = 0.0;  // support radius of the smoothed Dirac kernel (mm)

    double L = 0.0, R_in = 0.0, R_out = 0.0;

    // Global solution numbering: coincident control points of the same region
    // share one DOF; interface control points across regions stay independent.
    std::vector<std::vector<int>> dof;  // per patch, flat (i + nu*j) -> global id
    int num_dofs = 0;

    int dof_id(int patch, int i, int j) const {
        return dof[patch][static_cast<size_t>(j) * patches[patch].ctrl.ni() + i];
    }

    void rebuild_dof_map();
};

struct StarPerturbation {
    double amplitude = 0.0;  // C
    int lobes = 0;           // k
    double phase = 0.0;      // theta0
};

struct AnnulusModelSpec {
    double L = 140.0;
    double R_in = 10.0;
    double R_out = 50.0;
    std::optional<StarPerturbation> star_inner;
    std::optional<StarPerturbation> star_outer;
};

struct SquareSideBC {
    EdgeBC left = EdgeBC::dirichlet(300.0);
    EdgeBC right = EdgeBC::dirichlet(200.0);
    EdgeBC top = EdgeBC::neumann(0.0);
    EdgeBC bottom = EdgeBC::neumann(0.0);
};

/// The standard exact-conic full circle: 9 control points, quadratic,
/// knots [0,0,0,1/4,1/4,1/2,1/2,3/4,3/4,1,1,1], seam placed at -45 degrees
/// so that each quarter arc faces one square edge.
NurbsCurve make_circle_ring(double radius);

/// Radial control-point perturbation r -> r + C r sin(k(theta + theta0)).
std::vector<Vec2> perturb_star(const std::vector<Vec2>& points, double amplitude, int lobes, double phase);

/// Three-region model: polar disk (in), exact annulus (design), four outer
/// patches each mapping one square edge onto a quarter of the outer circle.
MultiPatchModel build_annulus_model(const AnnulusModelSpec& spec, const SquareSideBC& bc);

/// Square plate split into two Nitsche-coupled halves; left/right Dirichlet,
/// adiabatic top and bottom. Scaffolding for interface patch tests.
MultiPatchModel build_two_patch_plate(double L, double t_left, double t_right);

/// Midpoint knot insertion in every direction of every patch, repeated `levels` times.
void refine_model(MultiPatchModel& model, int levels);

struct PatchQuadPoint {
    double u, v;
    Vec2 x;
    double weight_jacobian;  // Gauss weight times |J|
};

/// Per-element Gauss points, (degree+1) per direction. Throws std::runtime_error
/// on a non-positive Jacobian at a quadrature point.
std::vector<PatchQuadPoint> quadrature_points(const Patch& patch);

double patch_area(const Patch& patch);
double model_area(const MultiPatchModel& model);

}  // namespace igatherm
