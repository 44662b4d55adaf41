#pragma once

#include <array>
#include <string>

namespace igatherm {

// Constituent conductivities shared by the presets (W/mK).
inline constexpr double kKappaCopper = 398.0;
inline constexpr double kKappaPdms = 0.27;
inline constexpr double kKappaIron = 67.0;
inline constexpr double kKappaInsulator = 1e-4;
inline constexpr double kKappaSensor = 130.0;

enum class LawKind { EMT, Maxwell, PorousCopper, CuSnPb, Tcoh, GyroidLattice, Constant };

/// Effective isotropic conductivity as a function of relative density, with
/// its closed-form derivative and the admissible density interval.
/// Out-of-range densities are clamped; each clamp bumps a process-wide
/// diagnostic counter readable via clamp_event_count().
class MaterialLaw {
public:
    static MaterialLaw emt(double kappa_m = kKappaCopper, double kappa_i = kKappaPdms);
    static MaterialLaw maxwell(double kappa_m = kKappaCopper, double kappa_p = kKappaPdms);
    static MaterialLaw porous_copper(double kappa_m = kKappaCopper);
    static MaterialLaw cu_sn_pb(double kappa_m = kKappaCopper);
    static MaterialLaw tcoh(double kappa_m = kKappaCopper);
    static MaterialLaw gyroid_lattice(double kappa_m = kKappaCopper);
    static MaterialLaw constant(double kappa);
    static MaterialLaw from_name(const std::string& name);

    LawKind kind() const { return kind_; }
    double v_min() const { return v_min_; }
    double v_max() const { return v_max_; }
    bool is_constant() const { return kind_ == LawKind::Constant; }

    /// κ_eff(v) in W/mK. Throws std::invalid_argument for non-finite v.
    double kappa(double v) const;

    /// dκ_eff/dv, the closed-form derivative of the law.
    double dkappa(double v) const;

private:
    LawKind kind_ = LawKind::Constant;
    double kappa_m_ = 0.0;
    double kappa_i_ = 0.0;
    std::array<double, 4> fit_{};   // a, b, c, d of the exponential fit
    std::array<double, 7> poly_{};  // C1..C7 of the lattice polynomials
    double kappa_const_ = 0.0;
    double v_min_ = 0.0;
    double v_max_ = 1.0;
};

long clamp_event_count();
void reset_clamp_event_count();

}  // namespace igatherm
