#include "igatherm/splines.hpp"

#include <algorithm>
#include <cmath>

namespace igatherm {

GaussRule gauss_rule(int n) {
    // Nodes/weights on [-1, 1], mapped to [0, 1].
    static const std::vector<std::vector<double>> abscissae = {
        {0.0},
        {-0.5773502691896257645091488, 0.5773502691896257645091488},
        {-0.7745966692414833770358531, 0.0, 0.7745966692414833770358531},
        {-0.8611363115940525752239465, -0.3399810435848562648026658, 0.3399810435848562648026658,
         0.8611363115940525752239465},
        {-0.9061798459386639927976269, -0.5384693101056830910363144, 0.0, 0.5384693101056830910363144,
         0.9061798459386639927976269},
        {-0.9324695142031520278123016, -0.6612093864662645136613996, -0.2386191860831969086305017,
         0.2386191860831969086305017, 0.6612093864662645136613996, 0.9324695142031520278123016}};
    static const std::vector<std::vector<double>> wts = {
        {2.0},
        {1.0, 1.0},
        {0.5555555555555555555555556, 0.8888888888888888888888889, 0.5555555555555555555555556},
        {0.3478548451374538573730639, 0.6521451548625461426269361, 0.6521451548625461426269361,
         0.3478548451374538573730639},
        {0.2369268850561890875142640, 0.4786286704993664680412915, 0.5688888888888888888888889,
         0.4786286704993664680412915, 0.2369268850561890875142640},
        {0.1713244923791703450402961, 0.3607615730481386075698335, 0.4679139345726910473898703,
         0.4679139345726910473898703, 0.3607615730481386075698335, 0.1713244923791703450402961}};
    if (n < 1 || n > 6) throw std::invalid_argument("gauss_rule: supported orders are 1..6");
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        rule.nodes[i] = 0.5 * (abscissae[n - 1][i] + 1.0);
        rule.weights[i] = 0.5 * wts[n - 1][i];
    }
    return rule;
}

KnotVector::KnotVector(int degree, std::vector<double> knots) : degree_(degree), knots_(std::move(knots)) {
    if (degree_ < 0 || degree_ > kMaxDegree) throw std::invalid_argument("KnotVector: unsupported degree");
    if (static_cast<int>(knots_.size()) < 2 * (degree_ + 1))
        throw std::invalid_argument("KnotVector: too few knots for a clamped vector");
    for (size_t i = 1; i < knots_.size(); ++i)
        if (knots_[i] < knots_[i - 1]) throw std::invalid_argument("KnotVector: knots must be non-decreasing");
    for (int i = 0; i <= degree_; ++i) {
        if (knots_[i] != knots_.front() || knots_[knots_.size() - 1 - i] != knots_.back())
            throw std::invalid_argument("KnotVector: first/last knot must repeat degree+1 times");
    }
    // Interior multiplicity at most degree.
    size_t i = degree_ + 1;
    while (i + degree_ + 1 < knots_.size()) {
        size_t j = i;
        while (j < knots_.size() && knots_[j] == knots_[i]) ++j;
        if (static_cast<int>(j - i) > degree_)
            throw std::invalid_argument("KnotVector: interior knot multiplicity exceeds degree");
        i = j;
    }
}

int KnotVector::find_span(double xi) const {
    const int n = num_basis();
    if (xi >= knots_[n]) return n - 1;
    if (xi <= knots_[degree_]) return degree_;
    int lo = degree_, hi = n;
    while (hi - lo > 1) {
        const int mid = (lo + hi) / 2;
        if (xi < knots_[mid])
            hi = mid;
        else
            lo = mid;
    }
    return lo;
}

void KnotVector::basis(int span, double xi, double* out) const {
    const int p = degree_;
    double left[kMaxDegree + 1], right[kMaxDegree + 1];
    out[0] = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = xi - knots_[span + 1 - j];
        right[j] = knots_[span + j] - xi;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double tmp = out[r] / (right[r + 1] + left[j - r]);
            out[r] = saved + right[r + 1] * tmp;
            saved = left[j - r] * tmp;
        }
        out[j] = saved;
    }
}

void KnotVector::basis_ld(int span, double xi, long double* out) const {
    const int p = degree_;
    long double left[kMaxDegree + 1], right[kMaxDegree + 1];
    out[0] = 1.0L;
    for (int j = 1; j <= p; ++j) {
        left[j] = static_cast<long double>(xi) - knots_[span + 1 - j];
        right[j] = static_cast<long double>(knots_[span + j]) - xi;
        long double saved = 0.0L;
        for (int r = 0; r < j; ++r) {
            const long double tmp = out[r] / (right[r + 1] + left[j - r]);
            out[r] = saved + right[r + 1] * tmp;
            saved = left[j - r] * tmp;
        }
        out[j] = saved;
    }
}

void KnotVector::basis_derivs(int span, double xi, int order, double* out) const {
    const int p = degree_;
    const int n = std::min(order, p);
    double ndu[kMaxDegree + 1][kMaxDegree + 1];
    double left[kMaxDegree + 1], right[kMaxDegree + 1];
    ndu[0][0] = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = xi - knots_[span + 1 - j];
        right[j] = knots_[span + j] - xi;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            ndu[j][r] = right[r + 1] + left[j - r];
            const double tmp = ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * tmp;
            saved = left[j - r] * tmp;
        }
        ndu[j][j] = saved;
    }
    for (int j = 0; j <= p; ++j) out[j] = ndu[j][p];
    for (int k = 1; k <= order; ++k)
        for (int j = 0; j <= p; ++j) out[k * (p + 1) + j] = 0.0;

    double a[2][kMaxDegree + 1] = {};
    for (int r = 0; r <= p; ++r) {
        int s1 = 0, s2 = 1;
        a[0][0] = 1.0;
        for (int k = 1; k <= n; ++k) {
            double d = 0.0;
            const int rk = r - k, pk = p - k;
            if (r >= k) {
                a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
                d = a[s2][0] * ndu[rk][pk];
            }
            const int j1 = (rk >= -1) ? 1 : -rk;
            const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
            for (int j = j1; j <= j2; ++j) {
                a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
                d += a[s2][j] * ndu[rk + j][pk];
            }
            if (r <= pk) {
                a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                d += a[s2][k] * ndu[r][pk];
            }
            out[k * (p + 1) + r] = d;
            std::swap(s1, s2);
        }
    }
    double factor = p;
    for (int k = 1; k <= n; ++k) {
        for (int j = 0; j <= p; ++j) out[k * (p + 1) + j] *= factor;
        factor *= (p - k);
    }
}

std::vector<std::pair<double, double>> KnotVector::elements() const {
    std::vector<std::pair<double, double>> spans;
    const int n = num_basis();
    for (int i = degree_; i < n; ++i)
        if (knots_[i + 1] > knots_[i]) spans.emplace_back(knots_[i], knots_[i + 1]);
    return spans;
}

std::vector<double> KnotVector::greville() const {
    std::vector<double> g(num_basis());
    for (int i = 0; i < num_basis(); ++i) {
        double s = 0.0;
        for (int k = 1; k <= degree_; ++k) s += knots_[i + k];
        g[i] = degree_ > 0 ? s / degree_ : 0.5 * (knots_[i] + knots_[i + 1]);
    }
    return g;
}

std::vector<double> KnotVector::span_midpoints() const {
    std::vector<double> mids;
    for (const auto& [a, b] : elements()) mids.push_back(0.5 * (a + b));
    return mids;
}

int KnotVector::multiplicity(double knot) const {
    int m = 0;
    for (double t : knots_)
        if (t == knot) ++m;
    return m;
}

BasisEval eval_basis(const KnotVector& kv, double xi) {
    if (!(xi >= kv.param_front() && xi <= kv.param_back()))
        throw std::domain_error("eval_basis: parameter outside knot range");
    BasisEval r;
    r.span = kv.find_span(xi);
    kv.basis(r.span, xi, r.value.data());
    return r;
}

BasisDerivEval eval_basis_derivs(const KnotVector& kv, double xi, int order) {
    if (order > kv.degree()) throw std::invalid_argument("eval_basis_derivs: order exceeds degree");
    if (!(xi >= kv.param_front() && xi <= kv.param_back()))
        throw std::domain_error("eval_basis_derivs: parameter outside knot range");
    BasisDerivEval r;
    r.span = kv.find_span(xi);
    double buf[(kMaxDegree + 1) * (kMaxDegree + 1)];
    kv.basis_derivs(r.span, xi, order, buf);
    for (int k = 0; k <= order; ++k)
        for (int j = 0; j <= kv.degree(); ++j) r.ders[k][j] = buf[k * (kv.degree() + 1) + j];
    return r;
}

RationalBasis::RationalBasis(KnotVector ku, KnotVector kv, Grid<double> weights)
    : ku_(std::move(ku)), kv_(std::move(kv)), w_(std::move(weights)) {
    if (w_.ni() != ku_.num_basis() || w_.nj() != kv_.num_basis())
        throw std::invalid_argument("RationalBasis: weight grid does not match knot vectors");
    for (double w : w_.data())
        if (!(w > 0.0)) throw std::invalid_argument("RationalBasis: weights must be positive");
}

RationalBasis::LocalEval RationalBasis::eval(double u, double v) const {
    const auto bu = eval_basis_derivs(ku_, u, 1);
    const auto bv = eval_basis_derivs(kv_, v, 1);
    const int pu = ku_.degree(), pv = kv_.degree();

    LocalEval r;
    r.span_u = bu.span;
    r.span_v = bv.span;
    r.nu = pu + 1;
    r.nv = pv + 1;

    double W = 0.0, Wu = 0.0, Wv = 0.0;
    for (int a = 0; a <= pu; ++a) {
        const int iu = bu.span - pu + a;
        for (int b = 0; b <= pv; ++b) {
            const int iv = bv.span - pv + b;
            const double w = w_(iu, iv);
            W += w * bu.ders[0][a] * bv.ders[0][b];
            Wu += w * bu.ders[1][a] * bv.ders[0][b];
            Wv += w * bu.ders[0][a] * bv.ders[1][b];
        }
    }
    for (int a = 0; a <= pu; ++a) {
        const int iu = bu.span - pu + a;
        for (int b = 0; b <= pv; ++b) {
            const int iv = bv.span - pv + b;
            const int l = a * r.nv + b;
            const double w = w_(iu, iv);
            const double num = w * bu.ders[0][a] * bv.ders[0][b];
            r.value[l] = num / W;
            r.du[l] = (w * bu.ders[1][a] * bv.ders[0][b] - r.value[l] * Wu) / W;
            r.dv[l] = (w * bu.ders[0][a] * bv.ders[1][b] - r.value[l] * Wv) / W;
        }
    }
    return r;
}

void RationalBasis::eval_values_ld(double u, double v, long double* out) const {
    const int pu = ku_.degree(), pv = kv_.degree();
    const int span_u = ku_.find_span(u), span_v = kv_.find_span(v);
    long double bu[kMaxDegree + 1], bv[kMaxDegree + 1];
    ku_.basis_ld(span_u, u, bu);
    kv_.basis_ld(span_v, v, bv);
    long double W = 0.0L;
    for (int a = 0; a <= pu; ++a)
        for (int b = 0; b <= pv; ++b) {
            const long double t = static_cast<long double>(w_(span_u - pu + a, span_v - pv + b)) * bu[a] * bv[b];
            out[a * (pv + 1) + b] = t;
            W += t;
        }
    for (int l = 0; l < (pu + 1) * (pv + 1); ++l) out[l] /= W;
}

Vec2 NurbsCurve::eval(double xi) const {
    const auto b = eval_basis(knots, xi);
    const int p = knots.degree();
    double W = 0.0;
    Vec2 num;
    for (int a = 0; a <= p; ++a) {
        const int i = b.span - p + a;
        const double t = weights[i] * b.value[a];
        W += t;
        num += t * points[i];
    }
    return num * (1.0 / W);
}

namespace {

struct HPoint {
    double wx, wy, w;
};

// Boehm single-knot insertion on a homogeneous control sequence.
void insert_one(const KnotVector& kv, std::vector<HPoint>& pts, std::vector<double>& knots, double u) {
    const int p = kv.degree();
    if (!(u > knots.front() && u < knots.back()))
        throw std::invalid_argument("knot_insert: new knot must lie strictly inside the parameter range");
    int span = 0;
    {
        // find span in current (possibly already extended) knot list
        int n = static_cast<int>(knots.size()) - p - 1;
        int lo = p, hi = n;
        if (u >= knots[n]) {
            span = n - 1;
        } else {
            while (hi - lo > 1) {
                int mid = (lo + hi) / 2;
                if (u < knots[mid])
                    hi = mid;
                else
                    lo = mid;
            }
            span = lo;
        }
    }
    int mult = 0;
    for (double t : knots)
        if (t == u) ++mult;
    if (mult >= p) throw std::invalid_argument("knot_insert: resulting multiplicity would exceed degree");

    std::vector<HPoint> out(pts.size() + 1);
    for (int i = 0; i <= span - p; ++i) out[i] = pts[i];
    for (int i = span - p + 1; i <= span; ++i) {
        const double denom = knots[i + p] - knots[i];
        const double alpha = denom > 0.0 ? (u - knots[i]) / denom : 0.0;
        out[i].wx = alpha * pts[i].wx + (1.0 - alpha) * pts[i - 1].wx;
        out[i].wy = alpha * pts[i].wy + (1.0 - alpha) * pts[i - 1].wy;
        out[i].w = alpha * pts[i].w + (1.0 - alpha) * pts[i - 1].w;
    }
    for (size_t i = span + 1; i < out.size(); ++i) out[i] = pts[i - 1];
    pts = std::move(out);
    knots.insert(knots.begin() + span + 1, u);
}

}  // namespace

NurbsCurve knot_insert(const NurbsCurve& curve, const std::vector<double>& new_knots) {
    std::vector<HPoint> hp(curve.points.size());
    for (size_t i = 0; i < curve.points.size(); ++i)
        hp[i] = {curve.points[i].x * curve.weights[i], curve.points[i].y * curve.weights[i], curve.weights[i]};
    std::vector<double> knots = curve.knots.knots();
    for (double u : new_knots) insert_one(curve.knots, hp, knots, u);

    NurbsCurve out;
    out.knots = KnotVector(curve.knots.degree(), knots);
    out.points.resize(hp.size());
    out.weights.resize(hp.size());
    for (size_t i = 0; i < hp.size(); ++i) {
        out.weights[i] = hp[i].w;
        out.points[i] = {hp[i].wx / hp[i].w, hp[i].wy / hp[i].w};
    }
    return out;
}

NurbsSurface knot_insert(const NurbsSurface& surf, int direction, const std::vector<double>& new_knots) {
    if (new_knots.empty()) return surf;
    NurbsSurface out = surf;
    const bool along_u = (direction == 0);
    const int n_lines = along_u ? surf.points.nj() : surf.points.ni();

    std::vector<std::vector<HPoint>> lines(n_lines);
    std::vector<double> knots;
    const KnotVector& kv = along_u ? surf.ku : surf.kv;
    for (int line = 0; line < n_lines; ++line) {
        const int count = along_u ? surf.points.ni() : surf.points.nj();
        lines[line].resize(count);
        for (int k = 0; k < count; ++k) {
            const int i = along_u ? k : line;
            const int j = along_u ? line : k;
            const double w = surf.weights(i, j);
            lines[line][k] = {surf.points(i, j).x * w, surf.points(i, j).y * w, w};
        }
    }
    knots = kv.knots();
    for (double u : new_knots) {
        std::vector<double> knots_next;
        for (int line = 0; line < n_lines; ++line) {
            std::vector<double> k_local = knots;
            insert_one(kv, lines[line], k_local, u);
            knots_next = std::move(k_local);
        }
        knots = std::move(knots_next);
    }

    const int new_count = static_cast<int>(lines[0].size());
    const int ni = along_u ? new_count : surf.points.ni();
    const int nj = along_u ? surf.points.nj() : new_count;
    out.points = Grid<Vec2>(ni, nj);
    out.weights = Grid<double>(ni, nj);
    for (int line = 0; line < n_lines; ++line) {
        for (int k = 0; k < new_count; ++k) {
            const int i = along_u ? k : line;
            const int j = along_u ? line : k;
            const HPoint& h = lines[line][k];
            out.weights(i, j) = h.w;
            out.points(i, j) = {h.wx / h.w, h.wy / h.w};
        }
    }
    if (along_u)
        out.ku = KnotVector(kv.degree(), knots);
    else
        out.kv = KnotVector(kv.degree(), knots);
    return out;
}

}  // namespace igatherm
