#pragma once

#include <memory>

#include "igatherm/config.hpp"
#include "igatherm/export.hpp"

namespace igatherm {

/// Owns every long-lived object a run needs so the pointer-based problem
/// layers stay valid for the whole command.
struct ProblemBundle {
    RunConfig config;
    MultiPatchModel model;
    std::unique_ptr<MultiPatchModel> model_secondary;
    std::unique_ptr<DensityField> field;
    std::unique_ptr<SymmetryMap> symmetry;
    std::unique_ptr<Discretization> disc;
    std::unique_ptr<Discretization> disc_secondary;
    std::unique_ptr<DesignProblem> problem;  // present when the config has an objective

    std::vector<double> initial_vars() const;
};

ProblemBundle build_bundle(const RunConfig& config, int levels_override = -1);

int cmd_solve(const RunConfig& config, const std::string& out_dir);
int cmd_optimize(const RunConfig& config, const std::string& out_dir);
int cmd_gradcheck(const RunConfig& config, double epsilon);
int cmd_convergence(const RunConfig& config, const std::string& out_dir, int max_levels);
int cmd_reconstruct(const RunConfig& config, const std::string& out_dir, const std::string& density_csv,
                    double voxel, int samples_per_cell = 8);

}  // namespace igatherm
