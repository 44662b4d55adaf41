#pragma once

#include <string>
#include <vector>

#include "igatherm/optimizer.hpp"
#include "igatherm/problem.hpp"
#include "igatherm/reconstruct.hpp"

namespace igatherm {

/// Shortest round-trip decimal of a double; pins the CSV byte layout.
std::string format_double(double value);

/// Legacy ASCII visualization-toolkit unstructured grid with temperature,
/// reference difference, density, and flux sampled on a fixed per-element
/// subdivision. T_bar and field may be empty/null.
void write_vtk_fields(const std::string& path, const MultiPatchModel& model, const Eigen::VectorXd& T,
                      const Eigen::VectorXd& T_bar, const DensityField* field,
                      const std::vector<double>& density, const RegionLaws& laws, int subdivision);

struct DensityCsv {
    DesignBasisSpec spec;
    std::string symmetry;
    std::vector<double> coefficients;
};

void write_density_csv(const std::string& path, const DensityField& field, const std::string& symmetry);
DensityCsv read_density_csv(const std::string& path);

void write_run_csv(const std::string& path, const RunRecord& record);

struct ConvergenceRow {
    int level = 0;
    int dofs = 0;
    double rel_error = 0.0;
    bool meets_threshold = false;
};
void write_convergence_csv(const std::string& path, const std::vector<ConvergenceRow>& rows);

void write_pgm(const std::string& path, const Raster& raster);
void write_contours_csv(const std::string& path, const std::vector<std::vector<Vec2>>& contours);

}  // namespace igatherm
