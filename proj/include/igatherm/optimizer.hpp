#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace igatherm {

struct OptimizerConfig {
    int max_iterations = 300;
    double objective_limit = 1e-10;
    double step_tolerance = 1e-10;
    double optimality_tolerance = 1e-10;
    int history = 10;  // curvature pairs kept by the quasi-Newton update

    // augmented-Lagrangian schedule for inequality constraints
    double al_mu0 = 10.0;
    double al_growth = 10.0;
    int al_max_outer = 10;
    double al_feasibility_tol = 1e-6;
};

enum class StopReason { ObjectiveLimit, StepTolerance, OptimalityTolerance, MaxIterations };

std::string stop_reason_name(StopReason reason);

struct IterationRow {
    int iteration = 0;
    double J = 0.0;
    std::map<std::string, double> terms;
    double constraint = 0.0;  // max over inequality constraints, 0 if none
    double grad_norm = 0.0;   // projected-gradient infinity norm
    double step_norm = 0.0;
    double seconds = 0.0;  // wall time; kept out of the deterministic CSV log
};

struct RunRecord {
    std::vector<IterationRow> rows;
};

/// Objective oracle: value plus gradient (required) and named sub-terms
/// (optional out-parameter).
using Objective =
    std::function<double(const std::vector<double>&, std::vector<double>&, std::map<std::string, double>*)>;

/// One inequality constraint g(x) <= 0 with gradient.
using Constraint = std::function<double(const std::vector<double>&, std::vector<double>&)>;

struct MinimizeResult {
    std::vector<double> x;
    double J = 0.0;
    StopReason reason = StopReason::MaxIterations;
    RunRecord record;
};

/// Projected quasi-Newton minimization over box bounds: limited-memory
/// curvature with gradient-projection active sets and a backtracking
/// line search (c = 1e-4, shrink 0.5, at most 40 trials).
MinimizeResult minimize(const Objective& objective, std::vector<double> x0, const std::vector<double>& lower,
                        const std::vector<double>& upper, const OptimizerConfig& config);

/// Augmented-Lagrangian treatment of inequality constraints wrapped around
/// minimize(); with no constraints it reduces to minimize() exactly.
MinimizeResult minimize_constrained(const Objective& objective, const std::vector<Constraint>& constraints,
                                    std::vector<double> x0, const std::vector<double>& lower,
                                    const std::vector<double>& upper, const OptimizerConfig& config);

/// Largest relative discrepancy between the supplied gradient and a central
/// finite difference across all variables.
double gradient_audit(const Objective& objective, const std::vector<double>& point, double epsilon);

}  // namespace igatherm
