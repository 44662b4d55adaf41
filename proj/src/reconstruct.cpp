#include "igatherm/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

namespace igatherm {

namespace {

double wrap_unit(double x) {
    x = std::fmod(x, 1.0);
    return x < 0.0 ? x + 1.0 : x;
}

}  // namespace

ProjectionResult project_to_patch(const Patch& patch, Vec2 target, double tol) {
    // initial guess from the polar layout: seam at -45 degrees, v inward
    const double theta = std::atan2(target.y, target.x);
    double u = wrap_unit((theta + 0.25 * std::numbers::pi) / (2.0 * std::numbers::pi));
    double v = 0.5;
    {
        const double r = target.norm();
        const Vec2 outer = patch.eval_geometry(u, 0.0).x;
        const Vec2 inner = patch.eval_geometry(u, 1.0).x;
        const double r0 = outer.norm(), r1 = inner.norm();
        if (std::abs(r0 - r1) > 1e-12) v = std::clamp((r0 - r) / (r0 - r1), 0.0, 1.0);
    }

    const double eps = 1e-13;
    for (int it = 0; it < 50; ++it) {
        const auto g = patch.eval_geometry(u, v);
        const Vec2 r{target.x - g.x.x, target.y - g.x.y};
        const double dist = r.norm();

        // full Newton step on x(u, v) = target
        const double det = g.x_u.x * g.x_v.y - g.x_v.x * g.x_u.y;
        double du = (r.x * g.x_v.y - g.x_v.x * r.y) / det;
        double dv = (g.x_u.x * r.y - r.x * g.x_u.y) / det;

        const bool at_lo = v <= eps, at_hi = v >= 1.0 - eps;
        const bool pushing_out = (at_lo && dv < 0.0) || (at_hi && dv > 0.0);

        if (dist < tol && !pushing_out) return {u, v, dist, v > eps && v < 1.0 - eps};
        if ((at_lo || at_hi) && pushing_out) {
            // nearest-point condition on the boundary curve: residual orthogonal
            // to the tangent
            const double tang = std::abs(r.x * g.x_u.x + r.y * g.x_u.y) / g.x_u.norm();
            if (tang < tol * std::max(1.0, dist)) return {u, v, dist, false};
            dv = 0.0;
            // Newton on the arc-distance stationarity; the curvature term keeps
            // far exterior points from overshooting
            const double h = 1e-7;
            const auto gp = patch.eval_geometry(wrap_unit(u + h), v);
            const auto gm = patch.eval_geometry(wrap_unit(u - h), v);
            const Vec2 x_uu{(gp.x_u.x - gm.x_u.x) / (2 * h), (gp.x_u.y - gm.x_u.y) / (2 * h)};
            const double numer = g.x_u.x * r.x + g.x_u.y * r.y;
            const double denom = g.x_u.dot(g.x_u) - (x_uu.x * r.x + x_uu.y * r.y);
            du = denom > 0.0 ? numer / denom : 0.5 * numer / g.x_u.dot(g.x_u);
        }

        const double limit = 0.2;
        du = std::clamp(du, -limit, limit);
        dv = std::clamp(dv, -limit, limit);
        u = wrap_unit(u + du);
        v = std::clamp(v + dv, 0.0, 1.0);
    }
    throw std::runtime_error("project_to_patch: Newton iteration did not converge");
}

double sample_density(const DensityField& field, const Patch& design_patch, Vec2 x) {
    const ProjectionResult p = project_to_patch(design_patch, x);
    return field.eval(p.u, p.v).value;
}

double gyroid_t(double v) {
    if (!(v >= 0.0 && v < 1.0)) throw std::invalid_argument("gyroid_t: porosity must lie in [0, 1)");
    return 0.65 / (1.0 - v);
}

double gyroid_value(double x, double y, double z, double cell) {
    const double w = 2.0 * std::numbers::pi / cell;
    return std::cos(w * x) * std::sin(w * y) + std::cos(w * y) * std::sin(w * z) +
           std::cos(w * z) * std::sin(w * x);
}

bool gyroid_inside(double x, double y, double z, double cell, double t) {
    const double g = gyroid_value(x, y, z, cell);
    return g + t >= 0.0 && g - t <= 0.0;
}

double gyroid_cell_fraction(double t, int samples, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    long hits = 0;
    for (int i = 0; i < samples; ++i) {
        const double x = uni(rng), y = uni(rng), z = uni(rng);
        if (gyroid_inside(x, y, z, 1.0, t)) ++hits;
    }
    return static_cast<double>(hits) / samples;
}

namespace {

const Patch& design_patch_of(const MultiPatchModel& model) {
    for (const Patch& p : model.patches)
        if (p.region == Region::Design) return p;
    throw std::invalid_argument("reconstruct: model has no design patch");
}

bool point_in_design(const Patch& patch, Vec2 x) {
    const ProjectionResult p = project_to_patch(patch, x);
    return p.inside && p.residual < 1e-6;
}

// signed distance to the design-domain boundary, positive inside
double design_margin(const Patch& patch, Vec2 x) {
    const ProjectionResult p = project_to_patch(patch, x);
    const Vec2 outer = patch.eval_geometry(p.u, 0.0).x;
    const Vec2 inner = patch.eval_geometry(p.u, 1.0).x;
    const double d = std::min((x - outer).norm(), (x - inner).norm());
    return (p.inside && p.residual < 1e-6) ? d : -std::max(p.residual, 1e-30);
}

}  // namespace

VoxelGrid build_voxel_grid(const MultiPatchModel& model, const DensityField& field, double cell) {
    if (!(cell > 0.0)) throw std::invalid_argument("build_voxel_grid: voxel size must be positive");
    const double L = model.L;
    const int n = static_cast<int>(std::lround(L / cell));
    if (n < 1 || std::abs(n * cell - L) > 0.5 * cell)
        throw std::invalid_argument("build_voxel_grid: voxel size must tile the background box");

    const Patch& dp = design_patch_of(model);
    VoxelGrid grid;
    grid.cell = cell;
    grid.nx = grid.ny = n;
    grid.origin_x = -0.5 * n * cell;
    grid.origin_y = -0.5 * n * cell;
    grid.density.assign(static_cast<size_t>(n) * n, 1.0);
    grid.t.assign(static_cast<size_t>(n) * n, 0.0);
    grid.occupied.assign(static_cast<size_t>(n) * n, 0);

    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const double x0 = grid.origin_x + i * cell, y0 = grid.origin_y + j * cell;
            const Vec2 center{x0 + 0.5 * cell, y0 + 0.5 * cell};
            const Vec2 probes[5] = {center, {x0, y0}, {x0 + cell, y0}, {x0, y0 + cell}, {x0 + cell, y0 + cell}};
            bool touches = false;
            for (const Vec2& p : probes)
                if (point_in_design(dp, p)) {
                    touches = true;
                    break;
                }
            if (!touches) continue;  // wholly outside: stays empty
            const int id = grid.index(i, j);
            grid.occupied[id] = 1;
            // center density, extrapolated when the center sits outside
            double v = sample_density(field, dp, center);
            v = std::clamp(v, 0.0, 0.999);
            grid.density[id] = v;
            grid.t[id] = gyroid_t(v);
        }
    }
    return grid;
}

namespace {

struct FieldSampler {
    const VoxelGrid* grid;
    const Patch* patch;

    int voxel_of(double x, double y, int& i, int& j) const {
        i = std::clamp(static_cast<int>((x - grid->origin_x) / grid->cell), 0, grid->nx - 1);
        j = std::clamp(static_cast<int>((y - grid->origin_y) / grid->cell), 0, grid->ny - 1);
        return grid->index(i, j);
    }

    bool tessellated(double x, double y) const {
        int i, j;
        const int id = voxel_of(x, y, i, j);
        if (!grid->occupied[id]) return false;
        const double lx = x - (grid->origin_x + i * grid->cell);
        const double ly = y - (grid->origin_y + j * grid->cell);
        return gyroid_inside(lx, ly, 0.25 * grid->cell, grid->cell, grid->t[id]);
    }

    // continuous level for marching squares: min(gyroid wall margin, domain margin)
    double trimmed_level(double x, double y) const {
        int i, j;
        const int id = voxel_of(x, y, i, j);
        if (!grid->occupied[id]) return -1.0;
        const double lx = x - (grid->origin_x + i * grid->cell);
        const double ly = y - (grid->origin_y + j * grid->cell);
        const double g = gyroid_value(lx, ly, 0.25 * grid->cell, grid->cell);
        const double wall = grid->t[id] - std::abs(g);
        const double dom = design_margin(*patch, {x, y}) * (3.0 / grid->cell);
        return std::min(wall, dom);
    }
};

void stitch_contours(const std::vector<std::pair<Vec2, Vec2>>& segments,
                     std::vector<std::vector<Vec2>>& contours, double quantum) {
    auto key = [quantum](const Vec2& p) {
        return std::make_pair(static_cast<long long>(std::llround(p.x / quantum)),
                              static_cast<long long>(std::llround(p.y / quantum)));
    };
    std::multimap<std::pair<long long, long long>, size_t> from;
    std::vector<char> used(segments.size(), 0);
    for (size_t s = 0; s < segments.size(); ++s) from.emplace(key(segments[s].first), s);

    for (size_t s = 0; s < segments.size(); ++s) {
        if (used[s]) continue;
        std::vector<Vec2> line{segments[s].first, segments[s].second};
        used[s] = 1;
        bool extended = true;
        while (extended) {
            extended = false;
            auto range = from.equal_range(key(line.back()));
            for (auto it = range.first; it != range.second; ++it) {
                if (used[it->second]) continue;
                used[it->second] = 1;
                line.push_back(segments[it->second].second);
                extended = true;
                break;
            }
        }
        contours.push_back(std::move(line));
    }
}

}  // namespace

ReconstructionResult reconstruct_and_trim(const MultiPatchModel& model, const DensityField& field, double cell,
                                          int samples_per_cell) {
    ReconstructionResult out;
    out.grid = build_voxel_grid(model, field, cell);
    const Patch& dp = design_patch_of(model);
    FieldSampler sampler{&out.grid, &dp};

    const int px = out.grid.nx * samples_per_cell, py = out.grid.ny * samples_per_cell;
    const double pixel = cell / samples_per_cell;
    auto make_raster = [&] {
        Raster r;
        r.nx = px;
        r.ny = py;
        r.origin_x = out.grid.origin_x;
        r.origin_y = out.grid.origin_y;
        r.pixel = pixel;
        r.pixels.assign(static_cast<size_t>(px) * py, 0);
        return r;
    };
    out.mask = make_raster();
    out.tessellation = make_raster();
    out.trimmed = make_raster();

    for (int j = 0; j < py; ++j) {
        for (int i = 0; i < px; ++i) {
            const double x = out.grid.origin_x + (i + 0.5) * pixel;
            const double y = out.grid.origin_y + (j + 0.5) * pixel;
            const bool in_dom = point_in_design(dp, {x, y});
            const bool tess = sampler.tessellated(x, y);
            if (in_dom) out.mask.at(i, j) = 255;
            if (tess) out.tessellation.at(i, j) = 255;
            if (in_dom && tess) out.trimmed.at(i, j) = 255;
        }
    }

    // marching squares over nodal samples of the trimmed level set, padded so
    // every contour closes
    const int gx = px + 3, gy = py + 3;
    std::vector<double> level(static_cast<size_t>(gx) * gy, -1.0);
    for (int j = 1; j < gy - 1; ++j)
        for (int i = 1; i < gx - 1; ++i)
            level[static_cast<size_t>(j) * gx + i] = sampler.trimmed_level(
                out.grid.origin_x + (i - 1) * pixel, out.grid.origin_y + (j - 1) * pixel);

    std::vector<std::pair<Vec2, Vec2>> segments;
    auto node = [&](int i, int j) {
        return Vec2{out.grid.origin_x + (i - 1) * pixel, out.grid.origin_y + (j - 1) * pixel};
    };
    auto lerp = [&](const Vec2& a, const Vec2& b, double fa, double fb) {
        const double s = fa / (fa - fb);
        return Vec2{a.x + s * (b.x - a.x), a.y + s * (b.y - a.y)};
    };
    for (int j = 0; j + 1 < gy; ++j) {
        for (int i = 0; i + 1 < gx; ++i) {
            const double f00 = level[static_cast<size_t>(j) * gx + i];
            const double f10 = level[static_cast<size_t>(j) * gx + i + 1];
            const double f01 = level[static_cast<size_t>(j + 1) * gx + i];
            const double f11 = level[static_cast<size_t>(j + 1) * gx + i + 1];
            int c = 0;
            if (f00 > 0) c |= 1;
            if (f10 > 0) c |= 2;
            if (f11 > 0) c |= 4;
            if (f01 > 0) c |= 8;
            if (c == 0 || c == 15) continue;
            const Vec2 p00 = node(i, j), p10 = node(i + 1, j), p01 = node(i, j + 1), p11 = node(i + 1, j + 1);
            const Vec2 bottom = lerp(p00, p10, f00, f10);
            const Vec2 top = lerp(p01, p11, f01, f11);
            const Vec2 left = lerp(p00, p01, f00, f01);
            const Vec2 right = lerp(p10, p11, f10, f11);
            auto emit = [&](const Vec2& a, const Vec2& b) { segments.emplace_back(a, b); };
            switch (c) {
                case 1: emit(left, bottom); break;
                case 2: emit(bottom, right); break;
                case 3: emit(left, right); break;
                case 4: emit(right, top); break;
                case 5: {
                    const double fc = 0.25 * (f00 + f10 + f01 + f11);
                    if (fc > 0) {
                        emit(left, top);
                        emit(right, bottom);
                    } else {
                        emit(left, bottom);
                        emit(right, top);
                    }
                    break;
                }
                case 6: emit(bottom, top); break;
                case 7: emit(left, top); break;
                case 8: emit(top, left); break;
                case 9: emit(top, bottom); break;
                case 10: {
                    const double fc = 0.25 * (f00 + f10 + f01 + f11);
                    if (fc > 0) {
                        emit(bottom, left);
                        emit(top, right);
                    } else {
                        emit(top, left);
                        emit(bottom, right);
                    }
                    break;
                }
                case 11: emit(top, right); break;
                case 12: emit(right, left); break;
                case 13: emit(right, bottom); break;
                default: emit(bottom, left); break;
            }
        }
    }
    stitch_contours(segments, out.contours, 1e-7 * cell);
    return out;
}

}  // namespace igatherm
