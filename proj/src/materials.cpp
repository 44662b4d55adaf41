#include "igatherm/materials.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>

namespace igatherm {

namespace {
std::atomic<long> g_clamp_events{0};
}

long clamp_event_count() { return g_clamp_events.load(); }
void reset_clamp_event_count() { g_clamp_events.store(0); }

MaterialLaw MaterialLaw::emt(double kappa_m, double kappa_i) {
    MaterialLaw law;
    law.kind_ = LawKind::EMT;
    law.kappa_m_ = kappa_m;
    law.kappa_i_ = kappa_i;
    law.v_min_ = 0.0;
    law.v_max_ = 1.0;
    return law;
}

MaterialLaw MaterialLaw::maxwell(double kappa_m, double kappa_p) {
    MaterialLaw law;
    law.kind_ = LawKind::Maxwell;
    law.kappa_m_ = kappa_m;
    law.kappa_i_ = kappa_p;
    law.v_min_ = 0.0;
    law.v_max_ = 1.0;
    return law;
}

MaterialLaw MaterialLaw::porous_copper(double kappa_m) {
    MaterialLaw law;
    law.kind_ = LawKind::PorousCopper;
    law.kappa_m_ = kappa_m;
    law.v_min_ = 0.0;
    law.v_max_ = 0.7;
    return law;
}

MaterialLaw MaterialLaw::cu_sn_pb(double kappa_m) {
    MaterialLaw law;
    law.kind_ = LawKind::CuSnPb;
    law.kappa_m_ = kappa_m;
    law.fit_ = {9.34008e-1, -2.81400e1, 7.08923e-2, 1.14783e-3};
    law.v_min_ = 0.0;
    law.v_max_ = 0.3;
    return law;
}

MaterialLaw MaterialLaw::tcoh(double kappa_m) {
    MaterialLaw law;
    law.kind_ = LawKind::Tcoh;
    law.kappa_m_ = kappa_m;
    law.poly_ = {0.4231, 0.1236, 0.0933, 0.0902, 0.0899, 0.0899, 0.0899};
    law.v_min_ = 0.2;
    law.v_max_ = 0.8;
    return law;
}

MaterialLaw MaterialLaw::gyroid_lattice(double kappa_m) {
    MaterialLaw law;
    law.kind_ = LawKind::GyroidLattice;
    law.kappa_m_ = kappa_m;
    law.poly_ = {0.5934, 0.1119, 0.0631, 0.0583, 0.0578, 0.0577, 0.0577};
    law.v_min_ = 0.2;
    law.v_max_ = 0.9;
    return law;
}

MaterialLaw MaterialLaw::constant(double kappa) {
    MaterialLaw law;
    law.kind_ = LawKind::Constant;
    law.kappa_const_ = kappa;
    law.v_min_ = 0.0;
    law.v_max_ = 1.0;
    return law;
}

MaterialLaw MaterialLaw::from_name(const std::string& name) {
    if (name == "emt") return emt();
    if (name == "maxwell") return maxwell();
    if (name == "porous_copper") return porous_copper();
    if (name == "cu_sn_pb") return cu_sn_pb();
    if (name == "tcoh") return tcoh();
    if (name == "gyroid") return gyroid_lattice();
    throw std::invalid_argument("unknown material law: " + name);
}

namespace {
double clamp_density(double v, double lo, double hi) {
    if (v < lo) {
        g_clamp_events.fetch_add(1, std::memory_order_relaxed);
        return lo;
    }
    if (v > hi) {
        g_clamp_events.fetch_add(1, std::memory_order_relaxed);
        return hi;
    }
    return v;
}
}  // namespace

double MaterialLaw::kappa(double v) const {
    if (!std::isfinite(v)) throw std::invalid_argument("MaterialLaw::kappa: non-finite density");
    if (kind_ == LawKind::Constant) return kappa_const_;
    v = clamp_density(v, v_min_, v_max_);
    switch (kind_) {
        case LawKind::EMT: {
            const double tau = (3.0 * v - 1.0) * kappa_i_ + (3.0 * (1.0 - v) - 1.0) * kappa_m_;
            return 0.25 * (tau + std::sqrt(tau * tau + 8.0 * kappa_i_ * kappa_m_));
        }
        case LawKind::Maxwell: {
            const double a = 2.0 * kappa_m_ + kappa_i_;
            const double d = kappa_m_ - kappa_i_;
            return kappa_m_ * (a - 2.0 * v * d) / (a + v * d);
        }
        case LawKind::PorousCopper:
            return kappa_m_ * (1.0 - v) / (1.0 + v);
        case LawKind::CuSnPb:
            return kappa_m_ * (fit_[0] * std::exp(fit_[1] * v) + fit_[2] * std::exp(fit_[3] * v));
        case LawKind::Tcoh:
        case LawKind::GyroidLattice: {
            double s = 0.0;
            for (int i = 6; i >= 0; --i) s = (s + poly_[i]) * v;
            return kappa_m_ * s;
        }
        default:
            return kappa_const_;
    }
}

double MaterialLaw::dkappa(double v) const {
    if (!std::isfinite(v)) throw std::invalid_argument("MaterialLaw::dkappa: non-finite density");
    if (kind_ == LawKind::Constant) return 0.0;
    v = clamp_density(v, v_min_, v_max_);
    switch (kind_) {
        case LawKind::EMT: {
            const double tau = (3.0 * v - 1.0) * kappa_i_ + (3.0 * (1.0 - v) - 1.0) * kappa_m_;
            const double dtau = 3.0 * (kappa_i_ - kappa_m_);
            const double root = std::sqrt(tau * tau + 8.0 * kappa_i_ * kappa_m_);
            return 0.25 * dtau * (1.0 + tau / root);
        }
        case LawKind::Maxwell: {
            const double a = 2.0 * kappa_m_ + kappa_i_;
            const double d = kappa_m_ - kappa_i_;
            const double den = a + v * d;
            return -3.0 * kappa_m_ * a * d / (den * den);
        }
        case LawKind::PorousCopper: {
            const double den = 1.0 + v;
            return -2.0 * kappa_m_ / (den * den);
        }
        case LawKind::CuSnPb:
            return kappa_m_ *
                   (fit_[0] * fit_[1] * std::exp(fit_[1] * v) + fit_[2] * fit_[3] * std::exp(fit_[3] * v));
        case LawKind::Tcoh:
        case LawKind::GyroidLattice: {
            double s = 0.0;
            for (int i = 6; i >= 0; --i) s = s * v + (i + 1) * poly_[i];
            return kappa_m_ * s;
        }
        default:
            return 0.0;
    }
}

}  // namespace igatherm
