#include "igatherm/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace igatherm {

std::string stop_reason_name(StopReason reason) {
    switch (reason) {
        case StopReason::ObjectiveLimit: return "objective_limit";
        case StopReason::StepTolerance: return "step_tolerance";
        case StopReason::OptimalityTolerance: return "optimality_tolerance";
        default: return "max_iterations";
    }
}

namespace {

double clamp(double x, double lo, double hi) { return std::min(std::max(x, lo), hi); }

[[noreturn]] void fail_non_finite(const char* where, const std::vector<double>& x) {
    std::string dump = "minimize: non-finite objective ";
    dump += where;
    dump += "; iterate = [";
    for (size_t i = 0; i < x.size() && i < 8; ++i) {
        if (i) dump += ", ";
        dump += std::to_string(x[i]);
    }
    if (x.size() > 8) dump += ", ...";
    dump += "]";
    throw std::runtime_error(dump);
}

void project(std::vector<double>& x, const std::vector<double>& lo, const std::vector<double>& hi) {
    for (size_t i = 0; i < x.size(); ++i) x[i] = clamp(x[i], lo[i], hi[i]);
}

double inf_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

struct CurvaturePair {
    std::vector<double> s, y;
    double rho;
};

// two-loop recursion over the stored curvature pairs
std::vector<double> lbfgs_direction(const std::vector<double>& g, const std::deque<CurvaturePair>& mem) {
    std::vector<double> q = g;
    std::vector<double> alpha(mem.size());
    for (int i = static_cast<int>(mem.size()) - 1; i >= 0; --i) {
        double sq = 0.0;
        for (size_t k = 0; k < q.size(); ++k) sq += mem[i].s[k] * q[k];
        alpha[i] = mem[i].rho * sq;
        for (size_t k = 0; k < q.size(); ++k) q[k] -= alpha[i] * mem[i].y[k];
    }
    if (!mem.empty()) {
        double sy = 0.0, yy = 0.0;
        const CurvaturePair& last = mem.back();
        for (size_t k = 0; k < q.size(); ++k) {
            sy += last.s[k] * last.y[k];
            yy += last.y[k] * last.y[k];
        }
        const double gamma = sy / yy;
        for (double& v : q) v *= gamma;
    }
    for (size_t i = 0; i < mem.size(); ++i) {
        double yq = 0.0;
        for (size_t k = 0; k < q.size(); ++k) yq += mem[i].y[k] * q[k];
        const double beta = mem[i].rho * yq;
        for (size_t k = 0; k < q.size(); ++k) q[k] += (alpha[i] - beta) * mem[i].s[k];
    }
    for (double& v : q) v = -v;
    return q;
}

}  // namespace

MinimizeResult minimize(const Objective& objective, std::vector<double> x, const std::vector<double>& lo,
                        const std::vector<double>& hi, const OptimizerConfig& cfg) {
    const size_t n = x.size();
    if (lo.size() != n || hi.size() != n) throw std::invalid_argument("minimize: bound size mismatch");
    project(x, lo, hi);

    const auto t_start = std::chrono::steady_clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count(); };

    MinimizeResult result;
    std::vector<double> g(n);
    std::map<std::string, double> terms;
    double J = objective(x, g, &terms);
    if (!std::isfinite(J)) fail_non_finite("at the initial point", x);

    auto projected_gradient = [&](const std::vector<double>& xx, const std::vector<double>& gg) {
        std::vector<double> pg(n);
        for (size_t i = 0; i < n; ++i) pg[i] = xx[i] - clamp(xx[i] - gg[i], lo[i], hi[i]);
        return pg;
    };

    std::deque<CurvaturePair> memory;
    StopReason reason = StopReason::MaxIterations;
    double step_norm = 0.0;

    result.record.rows.push_back({0, J, terms, 0.0, inf_norm(projected_gradient(x, g)), 0.0, elapsed()});

    int it = 0;
    for (it = 1; it <= cfg.max_iterations; ++it) {
        if (J <= cfg.objective_limit) {
            reason = StopReason::ObjectiveLimit;
            break;
        }
        const std::vector<double> pg = projected_gradient(x, g);
        if (inf_norm(pg) <= cfg.optimality_tolerance) {
            reason = StopReason::OptimalityTolerance;
            break;
        }

        std::vector<double> d = lbfgs_direction(g, memory);
        // active bounds do not move
        for (size_t i = 0; i < n; ++i) {
            const double span = hi[i] - lo[i];
            if ((x[i] <= lo[i] + 1e-14 * span && d[i] < 0) || (x[i] >= hi[i] - 1e-14 * span && d[i] > 0))
                d[i] = 0.0;
        }
        double dg = 0.0;
        for (size_t i = 0; i < n; ++i) dg += d[i] * g[i];
        if (!(dg < 0.0)) {
            for (size_t i = 0; i < n; ++i) d[i] = -pg[i];
            dg = 0.0;
            for (size_t i = 0; i < n; ++i) dg += d[i] * g[i];
            if (!(dg < 0.0)) {
                reason = StopReason::OptimalityTolerance;
                break;
            }
        }

        // backtracking line search on the projected path
        const double c1 = 1e-4;
        double alpha = 1.0;
        std::vector<double> x_new(n), g_new(n);
        double J_new = J;
        bool accepted = false;
        std::map<std::string, double> terms_new;
        for (int trial = 0; trial < 40; ++trial) {
            for (size_t i = 0; i < n; ++i) x_new[i] = clamp(x[i] + alpha * d[i], lo[i], hi[i]);
            double gstep = 0.0;
            for (size_t i = 0; i < n; ++i) gstep += g[i] * (x_new[i] - x[i]);
            J_new = objective(x_new, g_new, &terms_new);
            if (!std::isfinite(J_new)) fail_non_finite("during the line search", x_new);
            if (J_new <= J + c1 * gstep && gstep < 0.0) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            reason = StopReason::StepTolerance;
            break;
        }

        std::vector<double> s(n), yv(n);
        for (size_t i = 0; i < n; ++i) {
            s[i] = x_new[i] - x[i];
            yv[i] = g_new[i] - g[i];
        }
        step_norm = inf_norm(s);
        double sy = 0.0, ss = 0.0, yy = 0.0;
        for (size_t i = 0; i < n; ++i) {
            sy += s[i] * yv[i];
            ss += s[i] * s[i];
            yy += yv[i] * yv[i];
        }
        if (sy > 1e-10 * std::sqrt(ss * yy)) {
            memory.push_back({std::move(s), std::move(yv), 1.0 / sy});
            while (static_cast<int>(memory.size()) > cfg.history) memory.pop_front();
        }

        x = x_new;
        g = g_new;
        J = J_new;
        terms = terms_new;
        result.record.rows.push_back(
            {it, J, terms, 0.0, inf_norm(projected_gradient(x, g)), step_norm, elapsed()});

        if (step_norm < cfg.step_tolerance) {
            reason = StopReason::StepTolerance;
            ++it;
            break;
        }
    }
    if (it > cfg.max_iterations) reason = StopReason::MaxIterations;
    if (J <= cfg.objective_limit) reason = StopReason::ObjectiveLimit;

    result.x = std::move(x);
    result.J = J;
    result.reason = reason;
    return result;
}

MinimizeResult minimize_constrained(const Objective& objective, const std::vector<Constraint>& constraints,
                                    std::vector<double> x0, const std::vector<double>& lo,
                                    const std::vector<double>& hi, const OptimizerConfig& cfg) {
    if (constraints.empty()) return minimize(objective, std::move(x0), lo, hi, cfg);

    const size_t n = x0.size();
    std::vector<double> lambda(constraints.size(), 0.0);
    double mu = cfg.al_mu0;
    std::vector<double> x = std::move(x0);
    project(x, lo, hi);

    MinimizeResult result;
    double max_violation_prev = 1e300;

    for (int outer = 0; outer < cfg.al_max_outer; ++outer) {
        Objective augmented = [&](const std::vector<double>& xx, std::vector<double>& grad,
                                  std::map<std::string, double>* terms) {
            std::vector<double> gj(n);
            double L = objective(xx, gj, terms);
            grad = gj;
            for (size_t k = 0; k < constraints.size(); ++k) {
                std::vector<double> gk(n);
                const double gval = constraints[k](xx, gk);
                const double m = std::max(0.0, lambda[k] + mu * gval);
                L += (m * m - lambda[k] * lambda[k]) / (2.0 * mu);
                if (m > 0.0)
                    for (size_t i = 0; i < n; ++i) grad[i] += m * gk[i];
                if (terms) (*terms)["g" + std::to_string(k)] = gval;
            }
            return L;
        };
        MinimizeResult inner = minimize(augmented, x, lo, hi, cfg);
        x = inner.x;
        for (IterationRow& row : inner.record.rows) {
            double cmax = 0.0;
            for (size_t k = 0; k < constraints.size(); ++k) {
                auto itr = row.terms.find("g" + std::to_string(k));
                if (itr != row.terms.end()) cmax = std::max(cmax, itr->second);
            }
            row.constraint = cmax;
        }
        result.record.rows.insert(result.record.rows.end(), inner.record.rows.begin(),
                                  inner.record.rows.end());
        result.reason = inner.reason;

        double max_violation = 0.0;
        std::vector<double> gvals(constraints.size());
        for (size_t k = 0; k < constraints.size(); ++k) {
            std::vector<double> dummy(n);
            gvals[k] = constraints[k](x, dummy);
            max_violation = std::max(max_violation, gvals[k]);
        }
        if (max_violation <= cfg.al_feasibility_tol) {
            std::vector<double> gj(n);
            result.J = objective(x, gj, nullptr);
            result.x = x;
            return result;
        }
        for (size_t k = 0; k < constraints.size(); ++k)
            lambda[k] = std::max(0.0, lambda[k] + mu * gvals[k]);
        if (max_violation > 0.25 * max_violation_prev) mu = std::min(mu * cfg.al_growth, 1e12);
        max_violation_prev = max_violation;
    }
    throw std::runtime_error("minimize_constrained: constraints remain infeasible at the largest penalty");
}

double gradient_audit(const Objective& objective, const std::vector<double>& point, double epsilon) {
    const size_t n = point.size();
    std::vector<double> g(n), dummy(n);
    objective(point, g, nullptr);
    double worst = 0.0;
    for (size_t i = 0; i < n; ++i) {
        std::vector<double> xp = point, xm = point;
        xp[i] += epsilon;
        xm[i] -= epsilon;
        const double jp = objective(xp, dummy, nullptr);
        const double jm = objective(xm, dummy, nullptr);
        const double fd = (jp - jm) / (2.0 * epsilon);
        worst = std::max(worst, std::abs(g[i] - fd) / std::max(std::abs(fd), 1e-12));
    }
    return worst;
}

}  // namespace igatherm
