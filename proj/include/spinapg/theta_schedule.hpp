#pragma once

#include <memory>
#include <vector>

namespace spinapg {

enum class ThetaVariant { Nesterov, ChambolleDossal, Custom };

/// Extrapolation parameter sequence {theta_k} with theta_{-1} = theta_0 = 1.
/// Admissible sequences satisfy, for k >= 1,
///   theta_k <= (alpha - 1) / (k + alpha - 1)            (upper bound, alpha >= 3)
///   (1 - theta_k) / theta_k^2 <= 1 / theta_{k-1}^2      (recurrence bound)
/// The Nesterov recurrence takes the second condition as an equality; the
/// Chambolle-Dossal rule takes the first as an equality with alpha > 3.
///
/// The object is a small value: advancing returns a new schedule holding
/// (theta_k, theta_{k+1}); each solver run owns its own copy.
class ThetaSchedule {
public:
    /// Defaults to the Nesterov recurrence at k = 0.
    ThetaSchedule() = default;

    static ThetaSchedule nesterov();
    static ThetaSchedule chambolle_dossal(double alpha = 4.0);
    /// User-supplied sequence; thetas[k] is theta_k and thetas[0] must be 1.
    static ThetaSchedule custom(std::vector<double> thetas);

    ThetaVariant variant() const { return variant_; }
    double alpha() const { return alpha_; }
    double theta_prev() const { return theta_prev_; }
    double theta_curr() const { return theta_curr_; }
    int k() const { return k_; }

    /// Schedule advanced by one step; holds (theta_k, theta_{k+1}).
    ThetaSchedule advanced() const;

    /// Extrapolation coefficient beta_k = theta_k (1/theta_{k-1} - 1).
    double extrapolation_coef() const;

private:
    ThetaVariant variant_ = ThetaVariant::Nesterov;
    double alpha_ = 3.0;
    double theta_prev_ = 1.0;  // theta_{k-1}
    double theta_curr_ = 1.0;  // theta_k
    int k_ = 0;
    std::shared_ptr<const std::vector<double>> custom_;
};

/// beta = theta_curr * (1/theta_prev - 1); zero exactly when theta_prev = 1.
double extrapolation_coef(double theta_curr, double theta_prev);

struct ThetaCheckRow {
    bool upper_bound_ok;  // theta_k <= (alpha-1)/(k+alpha-1)
    bool recurrence_ok;   // (1-theta_k) theta_{k-1}^2 <= theta_k^2
    bool lower_bound_ok;  // theta_k >= 1/(k+2)
    bool partial_sum_ok;  // sum_{i<=k} (theta_{i-1}^-2 - theta_i^-2 (1-theta_i)) <= 2 + (k+3)^2/2
};

struct ThetaValidation {
    std::vector<ThetaCheckRow> rows;
    bool all_ok = true;
};

/// Checks thetas[0..] against the admissibility conditions with parameter
/// alpha; thetas[0] must be 1 (theta_{-1} = 1 is implied). Slack 1e-12 on the
/// scaled forms. Throws std::invalid_argument on empty input.
ThetaValidation validate_sequence(const std::vector<double>& thetas, double alpha);

}  // namespace spinapg
