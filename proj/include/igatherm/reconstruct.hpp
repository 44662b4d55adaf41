#pragma once

#include "igatherm/design_field.hpp"

namespace igatherm {

struct ProjectionResult {
    double u = 0, v = 0;
    double residual = 0;  // distance between the target and the projected point (mm)
    bool inside = false;  // converged with v strictly within the parametric domain
};

/// Inverse of the design patch map by damped Newton iteration; v is clamped so
/// exterior points land on the nearest parametric boundary point. Throws
/// std::runtime_error when the iteration fails to settle in 50 steps.
ProjectionResult project_to_patch(const Patch& patch, Vec2 x, double tol = 1e-10);

/// Density at a physical point: inverse-mapped inside the design domain,
/// extended by the nearest parametric point outside.
double sample_density(const DensityField& field, const Patch& design_patch, Vec2 x);

/// Gyroid wall parameter from the porosity density: t = 0.65 / (1 - v).
double gyroid_t(double v);

/// Gyroid implicit value at voxel-local coordinates for cell size a.
double gyroid_value(double x, double y, double z, double cell);

/// Material test |g| <= t (wall of level-set thickness 2t).
bool gyroid_inside(double x, double y, double z, double cell, double t);

/// Monte-Carlo material fraction of a single unit cell (deterministic seed).
double gyroid_cell_fraction(double t, int samples = 1000000, unsigned seed = 2024);

struct VoxelGrid {
    double origin_x = 0, origin_y = 0;
    double cell = 0;  // voxel side a; one unit cell per voxel
    int nx = 0, ny = 0;
    std::vector<double> density;  // porosity at each voxel center (1 outside)
    std::vector<double> t;        // control parameter (0 for empty voxels)
    std::vector<char> occupied;   // voxel intersects the design domain

    int index(int i, int j) const { return i + nx * j; }
};

/// Voxelize the background box and evaluate the density-to-parameter map per
/// voxel center, extrapolating centers that fall just outside the domain.
VoxelGrid build_voxel_grid(const MultiPatchModel& model, const DensityField& field, double cell);

struct Raster {
    int nx = 0, ny = 0;
    double origin_x = 0, origin_y = 0, pixel = 0;
    std::vector<unsigned char> pixels;  // 0 void, 255 material

    unsigned char& at(int i, int j) { return pixels[static_cast<size_t>(j) * nx + i]; }
    unsigned char at(int i, int j) const { return pixels[static_cast<size_t>(j) * nx + i]; }
};

struct ReconstructionResult {
    VoxelGrid grid;
    Raster mask;          // design-domain indicator
    Raster tessellation;  // gyroid pattern of every occupied voxel, untrimmed
    Raster trimmed;       // Boolean intersection of the two
    std::vector<std::vector<Vec2>> contours;  // closed polylines (mm)
};

/// Full reconstruction pass: voxelize, tessellate on the z = a/4 slice, trim
/// against the design domain and extract closed contours.
ReconstructionResult reconstruct_and_trim(const MultiPatchModel& model, const DensityField& field, double cell,
                                          int samples_per_cell = 8);

}  // namespace igatherm
