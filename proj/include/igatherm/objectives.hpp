#pragma once

#include <map>
#include <string>

#include "igatherm/linsolve.hpp"

namespace igatherm {

enum class ObjectiveKind {
    Cloak,
    IntermediatePenalty,
    Concentrator,
    Rotator,
    CloakedSensor,
    CloakConcentrator,
    Bidirectional
};

ObjectiveKind objective_kind_from_name(const std::string& name);
std::string objective_kind_name(ObjectiveKind kind);

struct ObjectiveSpec {
    ObjectiveKind kind = ObjectiveKind::Cloak;
    double chi = 0.0;    // weight of the intermediate-density penalty term
    double theta = 0.0;  // rotator angle (radians)
};

struct ConstraintSpec {
    double radius = 15.0;  // constrained disk radius around the origin (mm)
    double t_max = 220.0;  // permissible temperature (K)
    double base = 1.5;     // A in the weighted-maximum approximation
};

/// Reference solutions and normalizers for one (geometry, BC) pair.
/// T_bar: every region filled with the base (outer) material. T_tilde: the
/// design annulus filled with base material, inner region as configured; when
/// that coincides with T_bar (no inclusion), the insulator stands in so the
/// cloak normalizer stays positive.
struct ReferenceFields {
    Eigen::VectorXd T_bar;
    Eigen::VectorXd T_tilde;
    double jt_cloak = 1.0;
    double psi_tilde = 1.0;
    double jt_rotator = 1.0;
    double jt_sensor = 1.0;
    std::vector<char> inflow;  // per interface qp: reference flux enters the inner region
    bool insulator_fallback = false;
    double kappa_in = 0.0;
    double kappa_base = 0.0;
};

ReferenceFields compute_references(const Discretization& disc, const RegionLaws& laws);

struct FunctionalEval {
    double value = 0.0;
    std::map<std::string, double> terms;
    Eigen::VectorXd adjoint_load;     // dJ/dT, sized to the global DOFs
    std::vector<double> explicit_dv;  // dJ/dv per design control coefficient
};

/// J_cloak = int_out (T - Tbar)^2 / jt_cloak.
FunctionalEval eval_cloak(const Discretization& disc, const ReferenceFields& refs, const Eigen::VectorXd& T);

/// Intermediate-density penalty int_design v^4 (1-v)^4; explicit path only.
FunctionalEval eval_intermediate_penalty(const Discretization& disc, const std::vector<double>& density);

/// Entering flux through the inner interface relative to the reference plate.
/// Returns psi in terms["psi"] and J = 1/psi as the value.
FunctionalEval eval_concentrator(const Discretization& disc, const ReferenceFields& refs,
                                 const Eigen::VectorXd& T);

/// Flux-rotation mismatch over the inner region for rotation angle theta.
FunctionalEval eval_rotator(const Discretization& disc, const ReferenceFields& refs, const Eigen::VectorXd& T,
                            double theta);

/// Temperature disturbance over the inner and outer regions (sensor case).
FunctionalEval eval_cloaked_sensor(const Discretization& disc, const ReferenceFields& refs,
                                   const Eigen::VectorXd& T);

/// J_cloak + psi^-4 on a single temperature field.
FunctionalEval eval_cloak_concentrator(const Discretization& disc, const ReferenceFields& refs,
                                       const Eigen::VectorXd& T);

/// Weighted-maximum temperature over the constrained disk and its load.
/// terms["tau_max"] carries the approximate maximum; value = tau_max - t_max.
FunctionalEval eval_max_temperature(const Discretization& disc, const ConstraintSpec& spec,
                                    const Eigen::VectorXd& T);

}  // namespace igatherm
