#include "igatherm/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

namespace igatherm {

Patch::GeomEval Patch::eval_geometry(double u, double v) const {
    GeomEval g;
    g.local = basis.eval(u, v);
    for (int l = 0; l < g.local.count(); ++l) {
        const Vec2& p = ctrl(g.local.index_u(l), g.local.index_v(l));
        g.x += g.local.value[l] * p;
        g.x_u += g.local.du[l] * p;
        g.x_v += g.local.dv[l] * p;
    }
    g.detJ = g.x_u.x * g.x_v.y - g.x_v.x * g.x_u.y;
    return g;
}

Vec2 Patch::grad_basis(const GeomEval& g, int l) const {
    const double nu = g.local.du[l], nv = g.local.dv[l];
    return {(g.x_v.y * nu - g.x_u.y * nv) / g.detJ, (-g.x_v.x * nu + g.x_u.x * nv) / g.detJ};
}

std::pair<double, double> Patch::edge_param(Side side, double t) {
    switch (side) {
        case Side::UMin: return {0.0, t};
        case Side::UMax: return {1.0, t};
        case Side::VMin: return {t, 0.0};
        default: return {t, 1.0};
    }
}

Vec2 Patch::reference_normal(Side side) {
    switch (side) {
        case Side::UMin: return {-1.0, 0.0};
        case Side::UMax: return {1.0, 0.0};
        case Side::VMin: return {0.0, -1.0};
        default: return {0.0, 1.0};
    }
}

void MultiPatchModel::rebuild_dof_map() {
    dof.assign(patches.size(), {});
    // Coincident control points are bitwise-identical by construction, so exact
    // keys are a safe merge criterion within a region.
    std::map<std::tuple<int, double, double>, int> ids;
    int next = 0;
    for (size_t p = 0; p < patches.size(); ++p) {
        const Patch& patch = patches[p];
        dof[p].resize(static_cast<size_t>(patch.ctrl.ni()) * patch.ctrl.nj());
        for (int j = 0; j < patch.ctrl.nj(); ++j) {
            for (int i = 0; i < patch.ctrl.ni(); ++i) {
                const Vec2& x = patch.ctrl(i, j);
                auto key = std::make_tuple(static_cast<int>(patch.region), x.x, x.y);
                auto it = ids.find(key);
                int id;
                if (it == ids.end()) {
                    id = next++;
                    ids.emplace(key, id);
                } else {
                    id = it->second;
                }
                dof[p][static_cast<size_t>(j) * patch.ctrl.ni() + i] = id;
            }
        }
    }
    num_dofs = next;
}

NurbsCurve make_circle_ring(double radius) {
    const double c = std::sqrt(0.5);
    const double d = radius * std::sqrt(2.0);
    NurbsCurve ring;
    ring.knots = KnotVector(2, {0, 0, 0, 0.25, 0.25, 0.5, 0.5, 0.75, 0.75, 1, 1, 1});
    ring.points = {{radius * c, -radius * c}, {d, 0.0},  {radius * c, radius * c},
                   {0.0, d},                 {-radius * c, radius * c}, {-d, 0.0},
                   {-radius * c, -radius * c}, {0.0, -d}, {radius * c, -radius * c}};
    ring.weights = {1.0, c, 1.0, c, 1.0, c, 1.0, c, 1.0};
    return ring;
}

std::vector<Vec2> perturb_star(const std::vector<Vec2>& points, double amplitude, int lobes, double phase) {
    if (std::abs(amplitude) >= 1.0)
        throw std::invalid_argument("perturb_star: |amplitude| must be below 1");
    std::vector<Vec2> out(points.size());
    for (size_t i = 0; i < points.size(); ++i) {
        const double r = points[i].norm();
        const double theta = std::atan2(points[i].y, points[i].x);
        const double r_new = r + amplitude * r * std::sin(lobes * (theta + phase));
        out[i] = {r_new * std::cos(theta), r_new * std::sin(theta)};
    }
    return out;
}

namespace {

// Knots of the sixteenth-level circle refinement (every sixteenth not already present).
std::vector<double> sixteenth_knots() {
    std::vector<double> ks;
    for (int i = 1; i < 16; ++i)
        if (i % 4 != 0) ks.push_back(i / 16.0);
    return ks;
}

struct RingSlice {
    KnotVector knots;           // local, rescaled to [0,1]
    std::vector<Vec2> points;
    std::vector<double> weights;
};

// Restriction of a full ring to quarter q. Quarter boundaries carry
// multiplicity-degree knots, so the sliced basis is exact.
RingSlice slice_quarter(const NurbsCurve& ring, int quarter) {
    const int p = ring.knots.degree();
    const double lo = quarter / 4.0, hi = (quarter + 1) / 4.0;
    const auto& kn = ring.knots.knots();

    std::vector<double> local(p + 1, 0.0);
    for (double t : kn)
        if (t > lo && t < hi) local.push_back((t - lo) / (hi - lo));
    local.insert(local.end(), p + 1, 1.0);
    KnotVector kv(p, local);

    // First global basis index alive on (lo, hi).
    int start = 0;
    while (start + p + 1 < static_cast<int>(kn.size()) && kn[start + p + 1] <= lo) ++start;

    RingSlice s{kv, {}, {}};
    for (int i = 0; i < kv.num_basis(); ++i) {
        s.points.push_back(ring.points[start + i]);
        s.weights.push_back(ring.weights[start + i]);
    }
    return s;
}

Grid<double> two_row_weights(const std::vector<double>& circ_w) {
    Grid<double> w(static_cast<int>(circ_w.size()), 2);
    for (int j = 0; j < 2; ++j)
        for (int i = 0; i < w.ni(); ++i) w(i, j) = circ_w[i];
    return w;
}

Patch make_ring_patch(const RingSlice& outer_row, const std::vector<Vec2>& inner_row, Region region) {
    Patch patch;
    Grid<Vec2> ctrl(static_cast<int>(outer_row.points.size()), 2);
    for (int i = 0; i < ctrl.ni(); ++i) {
        ctrl(i, 0) = outer_row.points[i];  // v=0: outer contour
        ctrl(i, 1) = inner_row[i];         // v=1: inner contour
    }
    patch.basis = RationalBasis(outer_row.knots, KnotVector(1, {0, 0, 1, 1}), two_row_weights(outer_row.weights));
    patch.ctrl = std::move(ctrl);
    patch.region = region;
    return patch;
}

}  // namespace

MultiPatchModel build_annulus_model(const AnnulusModelSpec& spec, const SquareSideBC& bc) {
    if (!(spec.R_in > 0.0 && spec.R_in < spec.R_out && spec.R_out < 0.5 * spec.L))
        throw std::invalid_argument("build_annulus_model: requires 0 < R_in < R_out < L/2");

    NurbsCurve ring_in = make_circle_ring(spec.R_in);
    NurbsCurve ring_out = make_circle_ring(spec.R_out);
    if (spec.star_inner || spec.star_outer) {
        const auto ks = sixteenth_knots();
        ring_in = knot_insert(ring_in, ks);
        ring_out = knot_insert(ring_out, ks);
        if (spec.star_inner)
            ring_in.points =
                perturb_star(ring_in.points, spec.star_inner->amplitude, spec.star_inner->lobes, spec.star_inner->phase);
        if (spec.star_outer)
            ring_out.points = perturb_star(ring_out.points, spec.star_outer->amplitude, spec.star_outer->lobes,
                                           spec.star_outer->phase);
    }

    MultiPatchModel model;
    model.L = spec.L;
    model.R_in = spec.R_in;
    model.R_out = spec.R_out;

    // Patch 0: inner disk, collapsed edge at the center (v=1).
    {
        RingSlice full{ring_in.knots, ring_in.points, ring_in.weights};
        std::vector<Vec2> center(ring_in.points.size(), Vec2{0.0, 0.0});
        Patch disk = make_ring_patch(full, center, Region::In);
        disk.edge_bc[static_cast<int>(Side::VMin)] = EdgeBC::interface();
        model.patches.push_back(std::move(disk));
    }

    // Patch 1: design annulus, v from the outer circle to the inner circle.
    {
        RingSlice full{ring_out.knots, ring_out.points, ring_out.weights};
        Patch annulus = make_ring_patch(full, ring_in.points, Region::Design);
        annulus.edge_bc[static_cast<int>(Side::VMin)] = EdgeBC::interface();
        annulus.edge_bc[static_cast<int>(Side::VMax)] = EdgeBC::interface();
        model.patches.push_back(std::move(annulus));
    }

    // Patches 2..5: outer quarters; v=0 on the square side, v=1 on the circle.
    const double h = 0.5 * spec.L;
    const std::array<Vec2, 4> corners = {Vec2{h, -h}, Vec2{h, h}, Vec2{-h, h}, Vec2{-h, -h}};
    const std::array<EdgeBC, 4> side_bc = {bc.right, bc.top, bc.left, bc.bottom};
    for (int q = 0; q < 4; ++q) {
        RingSlice arc = slice_quarter(ring_out, q);
        const Vec2 a = corners[q], b = corners[(q + 1) % 4];
        std::vector<Vec2> edge_row;
        for (double g : arc.knots.greville()) edge_row.push_back(a + g * (b - a));

        // Same patch structure as the ring patches: square side outside, arc inside.
        RingSlice edge_slice{arc.knots, edge_row, arc.weights};
        Patch outer = make_ring_patch(edge_slice, arc.points, Region::Out);
        outer.edge_bc[static_cast<int>(Side::VMin)] = side_bc[q];
        outer.edge_bc[static_cast<int>(Side::VMax)] = EdgeBC::interface();
        model.patches.push_back(std::move(outer));
    }

    // Interface pairings. Normals point out of patch_a.
    model.interfaces.push_back({0, Side::VMin, 0.0, 1.0, 1, Side::VMax, 0.0, 1.0});
    for (int q = 0; q < 4; ++q)
        model.interfaces.push_back({1, Side::VMin, q / 4.0, (q + 1) / 4.0, 2 + q, Side::VMax, 0.0, 1.0});

    model.rebuild_dof_map();
    return model;
}

MultiPatchModel build_two_patch_plate(double L, double t_left, double t_right) {
    MultiPatchModel model;
    model.L = L;
    const double h = 0.5 * L;
    auto bilinear = [&](double x0, double x1) {
        Patch patch;
        Grid<Vec2> ctrl(2, 2);
        ctrl(0, 0) = {x0, -h};
        ctrl(1, 0) = {x1, -h};
        ctrl(0, 1) = {x0, h};
        ctrl(1, 1) = {x1, h};
        Grid<double> w(2, 2, 1.0);
        patch.basis = RationalBasis(KnotVector(1, {0, 0, 1, 1}), KnotVector(1, {0, 0, 1, 1}), w);
        patch.ctrl = std::move(ctrl);
        return patch;
    };
    Patch left = bilinear(-h, 0.0);
    left.region = Region::In;
    left.edge_bc[static_cast<int>(Side::UMin)] = EdgeBC::dirichlet(t_left);
    left.edge_bc[static_cast<int>(Side::UMax)] = EdgeBC::interface();
    left.edge_bc[static_cast<int>(Side::VMin)] = EdgeBC::neumann(0.0);
    left.edge_bc[static_cast<int>(Side::VMax)] = EdgeBC::neumann(0.0);
    Patch right = bilinear(0.0, h);
    right.region = Region::Out;
    right.edge_bc[static_cast<int>(Side::UMin)] = EdgeBC::interface();
    right.edge_bc[static_cast<int>(Side::UMax)] = EdgeBC::dirichlet(t_right);
    right.edge_bc[static_cast<int>(Side::VMin)] = EdgeBC::neumann(0.0);
    right.edge_bc[static_cast<int>(Side::VMax)] = EdgeBC::neumann(0.0);
    model.patches.push_back(std::move(left));
    model.patches.push_back(std::move(right));
    model.interfaces.push_back({0, Side::UMax, 0.0, 1.0, 1, Side::UMin, 0.0, 1.0});
    model.rebuild_dof_map();
    return model;
}

void refine_model(MultiPatchModel& model, int levels) {
    if (levels < 0) throw std::invalid_argument("refine_model: levels must be non-negative");
    for (int lvl = 0; lvl < levels; ++lvl) {
        for (Patch& patch : model.patches) {
            NurbsSurface surf{patch.basis.ku(), patch.basis.kv(), patch.ctrl, patch.basis.weights()};
            surf = knot_insert(surf, 0, surf.ku.span_midpoints());
            surf = knot_insert(surf, 1, surf.kv.span_midpoints());
            patch.basis = RationalBasis(surf.ku, surf.kv, surf.weights);
            patch.ctrl = surf.points;
        }
    }
    model.rebuild_dof_map();
}

std::vector<PatchQuadPoint> quadrature_points(const Patch& patch) {
    std::vector<PatchQuadPoint> pts;
    const GaussRule gu = gauss_rule(patch.basis.ku().degree() + 1);
    const GaussRule gv = gauss_rule(patch.basis.kv().degree() + 1);
    for (const auto& [u0, u1] : patch.basis.ku().elements()) {
        for (const auto& [v0, v1] : patch.basis.kv().elements()) {
            for (size_t a = 0; a < gu.nodes.size(); ++a) {
                for (size_t b = 0; b < gv.nodes.size(); ++b) {
                    const double u = u0 + (u1 - u0) * gu.nodes[a];
                    const double v = v0 + (v1 - v0) * gv.nodes[b];
                    const auto g = patch.eval_geometry(u, v);
                    if (!(g.detJ > 0.0))
                        throw std::runtime_error("quadrature_points: non-positive Jacobian inside patch");
                    pts.push_back({u, v, g.x, g.detJ * gu.weights[a] * gv.weights[b] * (u1 - u0) * (v1 - v0)});
                }
            }
        }
    }
    return pts;
}

double patch_area(const Patch& patch) {
    double area = 0.0;
    for (const auto& qp : quadrature_points(patch)) area += qp.weight_jacobian;
    return area;
}

double model_area(const MultiPatchModel& model) {
    double area = 0.0;
    for (const auto& patch : model.patches) area += patch_area(patch);
    return area;
}

}  // namespace igatherm
