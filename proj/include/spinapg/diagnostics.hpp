#pragma once

#include <vector>

#include "spinapg/apg.hpp"
#include "spinapg/theta_schedule.hpp"

namespace spinapg {

struct RateFit {
    int k_lo = 0;
    int k_hi = 0;
    int points = 0;
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// Least-squares fit of log(gap) against log(k) over k in [k_lo, k_hi].
/// gap_by_k[k] is the (positive) objective gap at outer iteration k; entries
/// outside the window are ignored. Throws when fewer than 10 window points.
RateFit fit_rate(const std::vector<double>& gap_by_k, int k_lo, int k_hi);

/// Best-so-far gaps with a 1e-16 floor, indexed by k (entry 0 unused).
std::vector<double> best_so_far_gaps(const SolverReport& report, double f_star);

struct StreamSummability {
    double partial_sum = 0.0;      // over the floored schedule values actually used
    double fitted_exponent = 0.0;  // power-law decay exponent of the terms
    double tail_estimate = 0.0;    // integral-comparison tail; inf when divergent
    bool summable = false;
};

struct SummabilityReport {
    StreamSummability theta_inv;     // sum theta_k^-1 value(k), needs power > 2
    StreamSummability theta_inv_sq;  // sum theta_k^-2 value(k), needs power > 3
    bool floor_reached = false;      // tolerance floor active before the horizon
    int horizon = 0;
};

/// Integral-comparison summability check of the tolerance streams against a
/// theta schedule. The summability verdict is taken on the power-law part of
/// the schedule; a nonzero floor is flagged separately (its tail grows like
/// floor * k and is never summable). Requires horizon >= 100.
SummabilityReport check_summability(const ToleranceSchedule& tol, const ThetaSchedule& schedule,
                                    int horizon);

struct RecursionCheckResult {
    bool premise_holds = false;
    bool conclusion_holds = false;
    int premise_violation_at = -1;
    int conclusion_violation_at = -1;
};

/// Recursion bound: with nonnegative sequences satisfying
///   a_{k+1}^2 <= q_k + sum_{i<=k} (lam_i a_{i+1} + lam~_i a_i + c_i),
/// every a_{k+1} obeys a_{k+1} <= P_k/2 + sqrt(Q_k + sum c_i + (P_k/2)^2)
/// with Q_k = max_{i<=k} q_i and P_k = sum_{i<=k} (lam_i + lam~_i).
/// A violated premise makes the conclusion check vacuous (reported as such).
RecursionCheckResult recursion_bound_check(const std::vector<double>& a,
                                           const std::vector<double>& q,
                                           const std::vector<double>& c,
                                           const std::vector<double>& lam,
                                           const std::vector<double>& lam_tilde);

}  // namespace spinapg
