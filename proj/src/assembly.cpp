#include "igatherm/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace igatherm {

double dirac_kernel(double r, double delta) {
    if (r > delta) return 0.0;
    return 3.0 / (4.0 * delta) * (1.0 - r * r / (delta * delta));
}

namespace {

Vec2 edge_tangent(const Patch::GeomEval& g, Side side) {
    return (side == Side::UMin || side == Side::UMax) ? g.x_v : g.x_u;
}

Vec2 outward_normal(const Patch::GeomEval& g, Side side) {
    const Vec2 ref = Patch::reference_normal(side);
    Vec2 n{(g.x_v.y * ref.x - g.x_u.y * ref.y) / g.detJ, (-g.x_v.x * ref.x + g.x_u.x * ref.y) / g.detJ};
    const double len = n.norm();
    return n * (1.0 / len);
}

std::vector<double> edge_breakpoints(const KnotVector& kv, double lo, double hi) {
    std::vector<double> pts{lo, hi};
    for (const auto& [a, b] : kv.elements()) {
        if (a > lo && a < hi) pts.push_back(a);
        if (b > lo && b < hi) pts.push_back(b);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end(), [](double a, double b) { return std::abs(a - b) < 1e-13; }),
              pts.end());
    return pts;
}

const KnotVector& edge_knots(const Patch& patch, Side side) {
    return (side == Side::UMin || side == Side::UMax) ? patch.basis.kv() : patch.basis.ku();
}

}  // namespace

Discretization::Discretization(const MultiPatchModel& model, const DensityField* density, NitscheParams params)
    : model_(&model), density_(density), params_(params) {
    if (!(params_.beta > 0.0) || !(params_.gamma > 0.0 && params_.gamma < 1.0))
        throw std::invalid_argument("Discretization: requires beta > 0 and gamma in (0,1)");

    // Bulk quadrature with basis traces and physical gradients.
    for (size_t p = 0; p < model.patches.size(); ++p) {
        const Patch& patch = model.patches[p];
        const GaussRule gu = gauss_rule(patch.basis.ku().degree() + 1);
        const GaussRule gv = gauss_rule(patch.basis.kv().degree() + 1);
        for (const auto& [u0, u1] : patch.basis.ku().elements()) {
            for (const auto& [v0, v1] : patch.basis.kv().elements()) {
                for (size_t a = 0; a < gu.nodes.size(); ++a) {
                    for (size_t b = 0; b < gv.nodes.size(); ++b) {
                        BulkQP qp;
                        qp.patch = static_cast<int>(p);
                        qp.region = patch.region;
                        qp.u = u0 + (u1 - u0) * gu.nodes[a];
                        qp.v = v0 + (v1 - v0) * gv.nodes[b];
                        const auto g = patch.eval_geometry(qp.u, qp.v);
                        if (!(g.detJ > 0.0))
                            throw std::runtime_error("Discretization: non-positive Jacobian at a bulk point");
                        qp.x = g.x;
                        qp.wJ = g.detJ * gu.weights[a] * gv.weights[b] * (u1 - u0) * (v1 - v0);
                        qp.n = g.local.count();
                        for (int l = 0; l < qp.n; ++l) {
                            qp.id[l] = model.dof_id(qp.patch, g.local.index_u(l), g.local.index_v(l));
                            qp.N[l] = g.local.value[l];
                            const Vec2 grad = patch.grad_basis(g, l);
                            qp.gx[l] = grad.x;
                            qp.gy[l] = grad.y;
                        }
                        if (patch.region == Region::Design && density_) {
                            const auto de = density_->basis().eval(qp.u, qp.v);
                            qp.n_des = de.count();
                            for (int l = 0; l < qp.n_des; ++l) {
                                qp.des[l] = density_->coeff_index(de.index_u(l), de.index_v(l));
                                qp.R[l] = de.value[l];
                            }
                        }
                        bulk_.push_back(qp);
                    }
                }
            }
        }
    }

    // Interface quadrature: matched points on both sides, rule taken from the
    // finer of the two edge degrees.
    for (size_t ip = 0; ip < model.interfaces.size(); ++ip) {
        const InterfacePairing& pair = model.interfaces[ip];
        const Patch& pa = model.patches[pair.patch_a];
        const Patch& pb = model.patches[pair.patch_b];
        auto map_to_b = [&](double ta) {
            return pair.b0 + (ta - pair.a0) * (pair.b1 - pair.b0) / (pair.a1 - pair.a0);
        };
        // union of element breakpoints from both sides, in side-a parameters
        std::vector<double> brk = edge_breakpoints(edge_knots(pa, pair.side_a), pair.a0, pair.a1);
        {
            auto bb = edge_breakpoints(edge_knots(pb, pair.side_b), pair.b0, pair.b1);
            for (double t : bb)
                brk.push_back(pair.a0 + (t - pair.b0) * (pair.a1 - pair.a0) / (pair.b1 - pair.b0));
            std::sort(brk.begin(), brk.end());
            brk.erase(std::unique(brk.begin(), brk.end(),
                                  [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                      brk.end());
        }
        const int deg = std::max(edge_knots(pa, pair.side_a).degree(),
                                 std::max(pa.basis.ku().degree(), pa.basis.kv().degree()));
        const GaussRule rule = gauss_rule(deg + 1);

        // Edge-trace extraction: the locals whose cross-edge basis index sits on
        // the edge row carry the 1D trace values; everything else vanishes there.
        auto fill_side = [&](IfaceSide& s, int* eids, double* evals, int& m, const Patch& patch,
                             int patch_idx, Side side, double t) {
            const auto [u, v] = Patch::edge_param(side, t);
            const auto g = patch.eval_geometry(u, v);
            s.region = patch.region;
            s.n = g.local.count();
            for (int l = 0; l < s.n; ++l) {
                s.id[l] = model.dof_id(patch_idx, g.local.index_u(l), g.local.index_v(l));
                s.N[l] = g.local.value[l];
                const Vec2 grad = patch.grad_basis(g, l);
                s.gx[l] = grad.x;
                s.gy[l] = grad.y;
            }
            m = 0;
            const bool v_side = (side == Side::VMin || side == Side::VMax);
            const int edge_row = [&] {
                switch (side) {
                    case Side::UMin: return 0;
                    case Side::UMax: return patch.basis.num_u() - 1;
                    case Side::VMin: return 0;
                    default: return patch.basis.num_v() - 1;
                }
            }();
            for (int l = 0; l < s.n; ++l) {
                const int cross = v_side ? g.local.index_v(l) : g.local.index_u(l);
                if (cross == edge_row) {
                    eids[m] = s.id[l];
                    evals[m] = g.local.value[l];
                    ++m;
                }
            }
            if (patch.region == Region::Design && density_) {
                const auto de = density_->basis().eval(u, v);
                s.n_des = de.count();
                for (int l = 0; l < s.n_des; ++l) {
                    s.des[l] = density_->coeff_index(de.index_u(l), de.index_v(l));
                    s.R[l] = de.value[l];
                }
            }
        };

        for (size_t e = 0; e + 1 < brk.size(); ++e) {
            const double t0 = brk[e], t1 = brk[e + 1];
            for (size_t q = 0; q < rule.nodes.size(); ++q) {
                const double ta = t0 + (t1 - t0) * rule.nodes[q];
                IfaceQP qp;
                qp.pairing = static_cast<int>(ip);
                const auto [ua, va] = Patch::edge_param(pair.side_a, ta);
                const auto ga = pa.eval_geometry(ua, va);
                qp.x = ga.x;
                qp.normal = outward_normal(ga, pair.side_a);
                qp.wL = edge_tangent(ga, pair.side_a).norm() * rule.weights[q] * (t1 - t0);
                int m1 = 0, m2 = 0;
                double e2[kMaxDegree + 1];
                fill_side(qp.s1, qp.eid1, qp.e, m1, pa, pair.patch_a, pair.side_a, ta);
                fill_side(qp.s2, qp.eid2, e2, m2, pb, pair.patch_b, pair.side_b, map_to_b(ta));
                if (m1 != m2) throw std::runtime_error("Discretization: interface trace spaces do not match");
                for (int k = 0; k < m1; ++k) {
                    if (std::abs(qp.e[k] - e2[k]) > 1e-9)
                        throw std::runtime_error("Discretization: interface trace values do not match");
                }
                qp.m = m1;
                iface_.push_back(qp);
            }
        }
    }

    // Boundary (Neumann/Robin) quadrature and the Dirichlet set.
    std::map<int, double> dirichlet;
    for (size_t p = 0; p < model.patches.size(); ++p) {
        const Patch& patch = model.patches[p];
        for (int side_i = 0; side_i < 4; ++side_i) {
            const EdgeBC& bc = patch.edge_bc[side_i];
            const Side side = static_cast<Side>(side_i);
            if (bc.type == BCType::Dirichlet) {
                const int nu = patch.ctrl.ni(), nv = patch.ctrl.nj();
                auto add = [&](int i, int j) {
                    const int dof = model.dof_id(static_cast<int>(p), i, j);
                    auto it = dirichlet.find(dof);
                    if (it != dirichlet.end() && std::abs(it->second - bc.value) > 1e-9)
                        throw std::invalid_argument("Discretization: conflicting Dirichlet values at a control point");
                    dirichlet[dof] = bc.value;
                };
                if (side == Side::UMin)
                    for (int j = 0; j < nv; ++j) add(0, j);
                else if (side == Side::UMax)
                    for (int j = 0; j < nv; ++j) add(nu - 1, j);
                else if (side == Side::VMin)
                    for (int i = 0; i < nu; ++i) add(i, 0);
                else
                    for (int i = 0; i < nu; ++i) add(i, nv - 1);
                continue;
            }
            if (bc.type != BCType::Neumann && bc.type != BCType::Robin) continue;
            if (bc.type == BCType::Robin) has_robin_ = true;
            if (bc.type == BCType::Neumann && bc.value == 0.0) continue;  // adiabatic: no load

            const KnotVector& ek = edge_knots(patch, side);
            const GaussRule rule = gauss_rule(std::max(patch.basis.ku().degree(), patch.basis.kv().degree()) + 1);
            for (const auto& [t0, t1] : ek.elements()) {
                for (size_t q = 0; q < rule.nodes.size(); ++q) {
                    const double t = t0 + (t1 - t0) * rule.nodes[q];
                    const auto [u, v] = Patch::edge_param(side, t);
                    const auto g = patch.eval_geometry(u, v);
                    BoundaryQP qp;
                    qp.patch = static_cast<int>(p);
                    qp.type = bc.type;
                    qp.value = bc.value;
                    qp.h_coeff = bc.h_coeff;
                    qp.t_ambient = bc.t_ambient;
                    qp.x = g.x;
                    qp.wL = edge_tangent(g, side).norm() * rule.weights[q] * (t1 - t0);
                    qp.n = g.local.count();
                    for (int l = 0; l < qp.n; ++l) {
                        qp.id[l] = model.dof_id(qp.patch, g.local.index_u(l), g.local.index_v(l));
                        qp.N[l] = g.local.value[l];
                    }
                    boundary_.push_back(qp);
                }
            }
        }
    }
    for (const auto& [dof, value] : dirichlet) {
        dirichlet_dofs_.push_back(dof);
        dirichlet_values_.push_back(value);
    }

    // Point sources must lie inside the domain.
    for (const PointSource& src : model.sources) {
        if (model.L > 0.0 &&
            (std::abs(src.pos.x) > 0.5 * model.L || std::abs(src.pos.y) > 0.5 * model.L))
            throw std::invalid_argument("Discretization: point source outside the domain");
        if (!(model.source_bandwidth > 0.0) && !model.sources.empty())
            throw std::invalid_argument("Discretization: point sources require a positive bandwidth");
    }
}

double Discretization::density_value(const BulkQP& qp, const std::vector<double>& density) {
    double v = 0.0;
    for (int l = 0; l < qp.n_des; ++l) v += qp.R[l] * density[qp.des[l]];
    return v;
}

double Discretization::density_value(const IfaceSide& side, const std::vector<double>& density) {
    double v = 0.0;
    for (int l = 0; l < side.n_des; ++l) v += side.R[l] * density[side.des[l]];
    return v;
}

namespace {

void bulk_robin_triplets(const Discretization& disc, const std::vector<double>& density,
                         const RegionLaws& laws, std::vector<Eigen::Triplet<long double>>& trip) {
    for (const BulkQP& qp : disc.bulk()) {
        if (qp.region == Region::Design && qp.n_des == 0 && !laws.design.is_constant())
            throw std::invalid_argument("assemble_K: density-dependent design law needs a density field");
        const MaterialLaw& law = laws.of(qp.region);
        const double kappa = law.is_constant() ? law.kappa(0.0) : law.kappa(Discretization::density_value(qp, density));
        const long double c = static_cast<long double>(kappa) * qp.wJ;
        for (int a = 0; a < qp.n; ++a)
            for (int b = 0; b < qp.n; ++b)
                trip.emplace_back(qp.id[a], qp.id[b],
                                  c * (static_cast<long double>(qp.gx[a]) * qp.gx[b] +
                                       static_cast<long double>(qp.gy[a]) * qp.gy[b]));
    }
    for (const BoundaryQP& qp : disc.boundary()) {
        if (qp.type != BCType::Robin) continue;
        for (int a = 0; a < qp.n; ++a)
            for (int b = 0; b < qp.n; ++b)
                trip.emplace_back(qp.id[a], qp.id[b],
                                  static_cast<long double>(qp.h_coeff) * qp.N[a] * qp.N[b] * qp.wL);
    }
}

}  // namespace

SparseLd Discretization::assemble_K_bulk_robin(const std::vector<double>& density,
                                               const RegionLaws& laws) const {
    std::vector<Eigen::Triplet<long double>> trip;
    trip.reserve(bulk_.size() * 36 + boundary_.size() * 36);
    bulk_robin_triplets(*this, density, laws, trip);
    SparseLd K(num_dofs(), num_dofs());
    K.setFromTriplets(trip.begin(), trip.end());
    return K;
}

std::vector<IfaceApplyQP> Discretization::interface_apply_data(const std::vector<double>& density,
                                                               const RegionLaws& laws) const {
    const double gamma = params_.gamma;
    std::vector<IfaceApplyQP> out;
    out.reserve(iface_.size());
    auto side_kappa = [&](const IfaceSide& s) {
        const MaterialLaw& law = laws.of(s.region);
        if (law.is_constant()) return law.kappa(0.0);
        if (s.n_des == 0)
            throw std::invalid_argument("interface_apply_data: density-dependent law needs a density field");
        return law.kappa(density_value(s, density));
    };
    for (const IfaceQP& qp : iface_) {
        IfaceApplyQP a;
        a.wL = qp.wL;
        a.c1 = gamma * side_kappa(qp.s1);
        a.c2 = (1.0 - gamma) * side_kappa(qp.s2);
        a.m = qp.m;
        for (int k = 0; k < qp.m; ++k) {
            a.e[k] = qp.e[k];
            a.eid1[k] = qp.eid1[k];
            a.eid2[k] = qp.eid2[k];
        }
        a.n1 = qp.s1.n;
        a.n2 = qp.s2.n;
        for (int l = 0; l < qp.s1.n; ++l) {
            a.id1[l] = qp.s1.id[l];
            a.gn1[l] = qp.normal.x * qp.s1.gx[l] + qp.normal.y * qp.s1.gy[l];
        }
        for (int l = 0; l < qp.s2.n; ++l) {
            a.id2[l] = qp.s2.id[l];
            a.gn2[l] = qp.normal.x * qp.s2.gx[l] + qp.normal.y * qp.s2.gy[l];
        }
        out.push_back(a);
    }
    return out;
}

SparseLd Discretization::assemble_K(const std::vector<double>& density, const RegionLaws& laws) const {
    const int n = num_dofs();
    std::vector<Eigen::Triplet<long double>> trip;
    trip.reserve(bulk_.size() * 36 + iface_.size() * 144 + boundary_.size() * 36);
    bulk_robin_triplets(*this, density, laws, trip);

    const long double beta = params_.beta;
    for (const IfaceApplyQP& qp : interface_apply_data(density, laws)) {
        // jump and averaged-flux rows over the union of both sides' functions
        int ids[2 * kMaxLocal];
        long double jump[2 * kMaxLocal], flux[2 * kMaxLocal];
        int m = 0;
        for (int l = 0; l < qp.n1; ++l, ++m) {
            ids[m] = qp.id1[l];
            jump[m] = 0.0L;
            flux[m] = qp.c1 * qp.gn1[l];
        }
        for (int l = 0; l < qp.n2; ++l, ++m) {
            ids[m] = qp.id2[l];
            jump[m] = 0.0L;
            flux[m] = qp.c2 * qp.gn2[l];
        }
        for (int k = 0; k < qp.m; ++k) {
            for (int l = 0; l < m; ++l) {
                if (ids[l] == qp.eid1[k]) jump[l] += qp.e[k];
                if (ids[l] == qp.eid2[k]) jump[l] -= qp.e[k];
            }
        }
        for (int a = 0; a < m; ++a) {
            for (int b = 0; b < m; ++b) {
                const long double val =
                    qp.wL * (-jump[a] * flux[b] - flux[a] * jump[b] + beta * jump[a] * jump[b]);
                if (val != 0.0L) trip.emplace_back(ids[a], ids[b], val);
            }
        }
    }

    SparseLd K(n, n);
    K.setFromTriplets(trip.begin(), trip.end());
    return K;
}

VectorLd LinearSystem::apply(const VectorLd& x) const {
    VectorLd y = K_rest * x;
    const long double beta_ld = beta;
    for (const IfaceApplyQP& qp : iface) {
        long double jump = 0.0L;
        for (int k = 0; k < qp.m; ++k)
            jump += static_cast<long double>(qp.e[k]) * (x[qp.eid1[k]] - x[qp.eid2[k]]);
        long double fx = 0.0L;
        for (int l = 0; l < qp.n1; ++l) fx += static_cast<long double>(qp.c1) * qp.gn1[l] * x[qp.id1[l]];
        for (int l = 0; l < qp.n2; ++l) fx += static_cast<long double>(qp.c2) * qp.gn2[l] * x[qp.id2[l]];
        const long double t_jump = qp.wL * jump;
        const long double row_coeff = beta_ld * t_jump - qp.wL * fx;
        for (int k = 0; k < qp.m; ++k) {
            y[qp.eid1[k]] += qp.e[k] * row_coeff;
            y[qp.eid2[k]] -= qp.e[k] * row_coeff;
        }
        for (int l = 0; l < qp.n1; ++l) y[qp.id1[l]] -= qp.c1 * qp.gn1[l] * t_jump;
        for (int l = 0; l < qp.n2; ++l) y[qp.id2[l]] -= qp.c2 * qp.gn2[l] * t_jump;
    }
    return y;
}

Eigen::VectorXd Discretization::assemble_F() const {
    Eigen::VectorXd F = Eigen::VectorXd::Zero(num_dofs());
    for (const BoundaryQP& qp : boundary_) {
        if (qp.type == BCType::Neumann) {
            for (int a = 0; a < qp.n; ++a) F[qp.id[a]] += qp.value * qp.N[a] * qp.wL;
        } else if (qp.type == BCType::Robin) {
            for (int a = 0; a < qp.n; ++a) F[qp.id[a]] += qp.h_coeff * qp.t_ambient * qp.N[a] * qp.wL;
        }
    }
    if (!model_->sources.empty()) {
        const double delta = model_->source_bandwidth;
        for (const BulkQP& qp : bulk_) {
            double qb = 0.0;
            for (const PointSource& src : model_->sources)
                qb += src.power * dirac_kernel((qp.x - src.pos).norm(), delta);
            if (qb == 0.0) continue;
            for (int a = 0; a < qp.n; ++a) F[qp.id[a]] += qb * qp.N[a] * qp.wJ;
        }
    }
    return F;
}

LinearSystem Discretization::assemble(const std::vector<double>& density, const RegionLaws& laws) const {
    LinearSystem sys;
    sys.K_pre = assemble_K(density, laws);
    sys.K_rest = assemble_K_bulk_robin(density, laws);
    sys.iface = interface_apply_data(density, laws);
    sys.beta = params_.beta;
    sys.F = assemble_F();
    sys.dirichlet_dofs = dirichlet_dofs_;
    sys.dirichlet_values = dirichlet_values_;
    sys.has_robin = has_robin_;
    return sys;
}

std::vector<double> Discretization::apply_dK_dv(const std::vector<double>& density, const RegionLaws& laws,
                                                const Eigen::VectorXd& P, const Eigen::VectorXd& T) const {
    if (P.size() != num_dofs() || T.size() != num_dofs())
        throw std::invalid_argument("apply_dK_dv: vector size mismatch");
    std::vector<double> s(num_design_coefficients(), 0.0);
    if (s.empty()) return s;
    const MaterialLaw& law = laws.design;
    if (law.is_constant()) return s;

    for (const BulkQP& qp : bulk_) {
        if (qp.n_des == 0) continue;
        const double dk = law.dkappa(density_value(qp, density));
        double px = 0, py = 0, tx = 0, ty = 0;
        for (int l = 0; l < qp.n; ++l) {
            px += qp.gx[l] * P[qp.id[l]];
            py += qp.gy[l] * P[qp.id[l]];
            tx += qp.gx[l] * T[qp.id[l]];
            ty += qp.gy[l] * T[qp.id[l]];
        }
        const double c = dk * (px * tx + py * ty) * qp.wJ;
        for (int l = 0; l < qp.n_des; ++l) s[qp.des[l]] += c * qp.R[l];
    }

    const double gamma = params_.gamma;
    for (const IfaceQP& qp : iface_) {
        double jump_p = 0, jump_t = 0;
        for (int k = 0; k < qp.m; ++k) {
            jump_p += qp.e[k] * (P[qp.eid1[k]] - P[qp.eid2[k]]);
            jump_t += qp.e[k] * (T[qp.eid1[k]] - T[qp.eid2[k]]);
        }
        auto side_term = [&](const IfaceSide& side, double weight) {
            if (side.n_des == 0) return;
            const double dk = law.dkappa(density_value(side, density));
            double ndp = 0, ndt = 0;
            for (int l = 0; l < side.n; ++l) {
                const double ng = qp.normal.x * side.gx[l] + qp.normal.y * side.gy[l];
                ndp += ng * P[side.id[l]];
                ndt += ng * T[side.id[l]];
            }
            const double c = -weight * dk * (jump_p * ndt + jump_t * ndp) * qp.wL;
            for (int l = 0; l < side.n_des; ++l) s[side.des[l]] += c * side.R[l];
        };
        side_term(qp.s1, gamma);
        side_term(qp.s2, 1.0 - gamma);
    }
    return s;
}

}  // namespace igatherm
