#pragma once

#include <array>
#include <utility>
#include <vector>

#include "igatherm/core.hpp"

namespace igatherm {

inline constexpr int kMaxDegree = 4;

/// Clamped (open) knot vector: first and last knots repeated degree+1 times.
class KnotVector {
public:
    KnotVector() = default;
    KnotVector(int degree, std::vector<double> knots);

    int degree() const { return degree_; }
    int num_basis() const { return static_cast<int>(knots_.size()) - degree_ - 1; }
    double param_front() const { return knots_.front(); }
    double param_back() const { return knots_.back(); }
    const std::vector<double>& knots() const { return knots_; }

    /// Index of the knot span containing xi (last nonzero span at the right end).
    int find_span(double xi) const;

    /// The degree+1 B-spline values that are nonzero on the given span.
    void basis(int span, double xi, double* out) const;

    /// Values and derivatives up to `order`, row-major (order+1) x (degree+1).
    void basis_derivs(int span, double xi, int order, double* out) const;

    /// Extended-precision values; used where the Nitsche penalty amplifies
    /// partition-of-unity roundoff by twelve orders of magnitude.
    void basis_ld(int span, double xi, long double* out) const;

    /// Nonzero spans as (xi_begin, xi_end) pairs.
    std::vector<std::pair<double, double>> elements() const;

    /// Greville abscissae, one per basis function.
    std::vector<double> greville() const;

    /// Midpoints of every nonzero span (the uniform refinement schedule).
    std::vector<double> span_midpoints() const;

    int multiplicity(double knot) const;

private:
    int degree_ = 0;
    std::vector<double> knots_;
};

struct BasisEval {
    int span = 0;  // first nonzero basis index is span - degree
    std::array<double, kMaxDegree + 1> value{};
};

struct BasisDerivEval {
    int span = 0;
    // ders[k][a]: k-th derivative of basis function (span - degree + a)
    std::array<std::array<double, kMaxDegree + 1>, kMaxDegree + 1> ders{};
};

/// Nonzero B-spline values at xi. Throws std::domain_error if xi leaves the knot range.
BasisEval eval_basis(const KnotVector& kv, double xi);

/// Values and derivatives up to order k. Throws std::invalid_argument when k exceeds the degree.
BasisDerivEval eval_basis_derivs(const KnotVector& kv, double xi, int order);

/// Tensor-product rational basis: one knot vector per direction plus a positive weight grid.
class RationalBasis {
public:
    RationalBasis() = default;
    RationalBasis(KnotVector ku, KnotVector kv, Grid<double> weights);

    const KnotVector& ku() const { return ku_; }
    const KnotVector& kv() const { return kv_; }
    const Grid<double>& weights() const { return w_; }
    int num_u() const { return ku_.num_basis(); }
    int num_v() const { return kv_.num_basis(); }

    struct LocalEval {
        int span_u = 0, span_v = 0;
        int nu = 0, nv = 0;  // pu+1, pv+1
        // local index l = a * nv + b maps to basis (span_u - pu + a, span_v - pv + b)
        std::array<double, (kMaxDegree + 1) * (kMaxDegree + 1)> value{};
        std::array<double, (kMaxDegree + 1) * (kMaxDegree + 1)> du{};
        std::array<double, (kMaxDegree + 1) * (kMaxDegree + 1)> dv{};
        int count() const { return nu * nv; }
        int index_u(int l) const { return span_u - (nu - 1) + l / nv; }
        int index_v(int l) const { return span_v - (nv - 1) + l % nv; }
    };

    /// Nonzero rational basis values and first parametric derivatives at (u, v).
    LocalEval eval(double u, double v) const;

    /// Extended-precision values only, in the same local ordering as eval();
    /// the result sums to one at long-double accuracy.
    void eval_values_ld(double u, double v, long double* out) const;

private:
    KnotVector ku_, kv_;
    Grid<double> w_;
};

/// Rational curve as a weighted control polygon.
struct NurbsCurve {
    KnotVector knots;
    std::vector<Vec2> points;
    std::vector<double> weights;

    Vec2 eval(double xi) const;
};

/// Rational tensor-product surface data used by the geometry builders.
struct NurbsSurface {
    KnotVector ku, kv;
    Grid<Vec2> points;
    Grid<double> weights;
};

/// Knot insertion on a curve; geometry is preserved exactly.
/// Each entry of new_knots is inserted once; repeated entries raise multiplicity.
/// Throws std::invalid_argument on out-of-range knots or multiplicity overflow.
NurbsCurve knot_insert(const NurbsCurve& curve, const std::vector<double>& new_knots);

/// Knot insertion on a surface along direction 0 (u) or 1 (v).
NurbsSurface knot_insert(const NurbsSurface& surf, int direction, const std::vector<double>& new_knots);

}  // namespace igatherm
