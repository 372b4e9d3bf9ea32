#include "spinapg/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace spinapg {

RateFit fit_rate(const std::vector<double>& gap_by_k, int k_lo, int k_hi) {
    if (k_lo < 1 || k_hi < k_lo) throw std::invalid_argument("fit_rate: bad window");
    std::vector<double> xs, ys;
    for (int k = k_lo; k <= k_hi && k < static_cast<int>(gap_by_k.size()); ++k) {
        double g = gap_by_k[static_cast<std::size_t>(k)];
        if (!(g > 0.0)) continue;
        xs.push_back(std::log(static_cast<double>(k)));
        ys.push_back(std::log(g));
    }
    if (xs.size() < 10) {
        throw std::invalid_argument("fit_rate: window holds fewer than 10 usable points");
    }
    const double n = static_cast<double>(xs.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
        syy += ys[i] * ys[i];
    }
    const double denom = n * sxx - sx * sx;
    RateFit fit;
    fit.k_lo = k_lo;
    fit.k_hi = k_hi;
    fit.points = static_cast<int>(xs.size());
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss_res = 0.0, ss_tot = 0.0;
    const double mean_y = sy / n;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double pred = fit.intercept + fit.slope * xs[i];
        ss_res += (ys[i] - pred) * (ys[i] - pred);
        ss_tot += (ys[i] - mean_y) * (ys[i] - mean_y);
    }
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

std::vector<double> best_so_far_gaps(const SolverReport& report, double f_star) {
    std::vector<double> gaps;
    gaps.reserve(report.rows.size() + 1);
    gaps.push_back(std::numeric_limits<double>::quiet_NaN());  // k = 0 unused in log fits
    double best = std::numeric_limits<double>::infinity();
    for (const auto& row : report.rows) {
        best = std::min(best, row.objective);
        gaps.push_back(std::max(best - f_star, 0.0) + 1e-16);
    }
    return gaps;
}

namespace {

// Tail of sum_{k > horizon} term_k by integral comparison, assuming
// term_k ~ c k^s with s estimated from a log-log fit over the last half of
// the horizon. Divergent tails report +inf.
StreamSummability analyze_stream(const std::vector<double>& terms) {
    StreamSummability out;
    const int horizon = static_cast<int>(terms.size()) - 1;
    bool all_zero = true;
    for (const double t : terms) {
        if (t != 0.0) {
            all_zero = false;
            break;
        }
    }
    if (all_zero) {
        out.fitted_exponent = -std::numeric_limits<double>::infinity();
        out.summable = true;
        return out;
    }
    std::vector<double> xs, ys;
    for (int k = horizon / 2; k <= horizon; ++k) {
        const double t = terms[static_cast<std::size_t>(k)];
        if (t > 0.0) {
            xs.push_back(std::log(static_cast<double>(k)));
            ys.push_back(std::log(t));
        }
    }
    if (xs.size() < 2) {
        out.summable = false;
        out.tail_estimate = std::numeric_limits<double>::infinity();
        return out;
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double n = static_cast<double>(xs.size());
    const double s = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    out.fitted_exponent = s;
    const double last = terms[static_cast<std::size_t>(horizon)];
    if (s < -1.0 - 1e-9) {
        out.tail_estimate = last * static_cast<double>(horizon) / (-1.0 - s);
        out.summable = true;
    } else {
        out.tail_estimate = std::numeric_limits<double>::infinity();
        out.summable = false;
    }
    return out;
}

}  // namespace

SummabilityReport check_summability(const ToleranceSchedule& tol, const ThetaSchedule& schedule,
                                    int horizon) {
    if (horizon < 100) throw std::invalid_argument("check_summability: horizon must be >= 100");
    SummabilityReport rep;
    rep.horizon = horizon;

    std::vector<double> inv_terms(static_cast<std::size_t>(horizon) + 1, 0.0);
    std::vector<double> inv_sq_terms(static_cast<std::size_t>(horizon) + 1, 0.0);
    ThetaSchedule sched = schedule;
    for (int k = 0; k <= horizon; ++k) {
        const double theta = sched.theta_curr();
        const double floored = tol.value(k);
        const double powerlaw =
            tol.upsilon / std::pow(static_cast<double>(k) + 1.0, tol.power);
        if (floored == tol.floor && tol.floor > 0.0 && powerlaw < tol.floor) {
            rep.floor_reached = true;
        }
        rep.theta_inv.partial_sum += floored / theta;
        rep.theta_inv_sq.partial_sum += floored / (theta * theta);
        // verdicts are taken on the power-law part of the schedule
        inv_terms[static_cast<std::size_t>(k)] = powerlaw / theta;
        inv_sq_terms[static_cast<std::size_t>(k)] = powerlaw / (theta * theta);
        sched = sched.advanced();
    }
    const double p1 = rep.theta_inv.partial_sum;
    const double p2 = rep.theta_inv_sq.partial_sum;
    rep.theta_inv = analyze_stream(inv_terms);
    rep.theta_inv_sq = analyze_stream(inv_sq_terms);
    rep.theta_inv.partial_sum = p1;
    rep.theta_inv_sq.partial_sum = p2;
    return rep;
}

RecursionCheckResult recursion_bound_check(const std::vector<double>& a,
                                           const std::vector<double>& q,
                                           const std::vector<double>& c,
                                           const std::vector<double>& lam,
                                           const std::vector<double>& lam_tilde) {
    const std::size_t steps = std::min(
        {a.empty() ? 0 : a.size() - 1, q.size(), c.size(), lam.size(), lam_tilde.size()});
    RecursionCheckResult out;
    if (steps == 0) {
        out.premise_holds = true;
        out.conclusion_holds = true;
        return out;
    }

    // scale-aware slack for the float comparisons
    double scale = 0.0;
    for (std::size_t i = 0; i <= steps; ++i) scale = std::max(scale, a[i]);
    for (std::size_t i = 0; i < steps; ++i) {
        scale = std::max({scale, q[i], c[i], lam[i], lam_tilde[i]});
    }
    const double slack = 1e-9 * (1.0 + scale * scale);

    out.premise_holds = true;
    double running = 0.0;  // sum_{i<=k} (lam_i a_{i+1} + lam~_i a_i + c_i)
    for (std::size_t k = 0; k < steps; ++k) {
        running += lam[k] * a[k + 1] + lam_tilde[k] * a[k] + c[k];
        if (a[k + 1] * a[k + 1] > q[k] + running + slack) {
            out.premise_holds = false;
            out.premise_violation_at = static_cast<int>(k);
            break;
        }
    }
    if (!out.premise_holds) return out;  // conclusion check is vacuous

    out.conclusion_holds = true;
    double q_max = 0.0, c_sum = 0.0, p_sum = 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
        q_max = std::max(q_max, q[k]);
        c_sum += c[k];
        p_sum += lam[k] + lam_tilde[k];
        const double bound = 0.5 * p_sum + std::sqrt(q_max + c_sum + 0.25 * p_sum * p_sum);
        if (a[k + 1] > bound + slack) {
            out.conclusion_holds = false;
            out.conclusion_violation_at = static_cast<int>(k);
            break;
        }
    }
    return out;
}

}  // namespace spinapg
