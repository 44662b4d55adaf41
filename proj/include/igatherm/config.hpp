#pragma once

#include <optional>
#include <string>

#include "igatherm/assembly.hpp"
#include "igatherm/objectives.hpp"
#include "igatherm/optimizer.hpp"

namespace igatherm {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Everything a run needs, validated against a strict schema: unknown keys,
/// missing sections and out-of-range values are rejected with the offending
/// path in the message.
struct RunConfig {
    AnnulusModelSpec geometry;
    int levels = 3;

    SquareSideBC bc;
    std::vector<PointSource> sources;
    double source_bandwidth = 0.0;
    std::optional<SquareSideBC> bc_secondary;

    RegionLaws laws;
    NitscheParams nitsche;

    DesignBasisSpec design;
    SymmetryMode symmetry = SymmetryMode::XY;
    std::optional<double> initial_value;
    std::optional<std::vector<double>> initial_list;
    std::optional<std::string> initial_csv;

    std::optional<ObjectiveSpec> objective;
    std::vector<ConstraintSpec> constraints;

    OptimizerConfig optimizer;

    std::string out_dir = "out";
    int subdivision = 4;
};

RunConfig parse_config_text(const std::string& text, const std::string& name);
RunConfig parse_config_file(const std::string& path);

}  // namespace igatherm
