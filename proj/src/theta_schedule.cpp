#include "spinapg/theta_schedule.hpp"

#include <cmath>
#include <stdexcept>

namespace spinapg {

namespace {

// Nesterov recurrence, (1-theta)/theta^2 = 1/prev^2 taken as equality.
// Evaluated as 2 prev / (prev + sqrt(prev^2 + 4)), which is algebraically
// equal to (sqrt(prev^4 + 4 prev^2) - prev^2)/2 but free of cancellation as
// prev -> 0.
double nesterov_next(double prev) {
    return 2.0 * prev / (prev + std::sqrt(prev * prev + 4.0));
}

}  // namespace

ThetaSchedule ThetaSchedule::nesterov() {
    ThetaSchedule s;
    s.variant_ = ThetaVariant::Nesterov;
    s.alpha_ = 3.0;
    return s;
}

ThetaSchedule ThetaSchedule::chambolle_dossal(double alpha) {
    if (alpha < 3.0) throw std::invalid_argument("chambolle_dossal: alpha must be >= 3");
    ThetaSchedule s;
    s.variant_ = ThetaVariant::ChambolleDossal;
    s.alpha_ = alpha;
    return s;
}

ThetaSchedule ThetaSchedule::custom(std::vector<double> thetas) {
    if (thetas.empty() || thetas.front() != 1.0) {
        throw std::invalid_argument("custom schedule: thetas[0] must be 1");
    }
    ThetaSchedule s;
    s.variant_ = ThetaVariant::Custom;
    s.custom_ = std::make_shared<const std::vector<double>>(std::move(thetas));
    return s;
}

ThetaSchedule ThetaSchedule::advanced() const {
    ThetaSchedule next = *this;
    next.k_ = k_ + 1;
    next.theta_prev_ = theta_curr_;
    switch (variant_) {
        case ThetaVariant::Nesterov:
            next.theta_curr_ = nesterov_next(theta_curr_);
            break;
        case ThetaVariant::ChambolleDossal:
            next.theta_curr_ = (alpha_ - 1.0) / (static_cast<double>(next.k_) + alpha_ - 1.0);
            break;
        case ThetaVariant::Custom: {
            const auto& seq = *custom_;
            if (static_cast<std::size_t>(next.k_) >= seq.size()) {
                throw std::out_of_range("custom schedule exhausted at k=" +
                                        std::to_string(next.k_));
            }
            next.theta_curr_ = seq[static_cast<std::size_t>(next.k_)];
            break;
        }
    }
    return next;
}

double ThetaSchedule::extrapolation_coef() const {
    return spinapg::extrapolation_coef(theta_curr_, theta_prev_);
}

double extrapolation_coef(double theta_curr, double theta_prev) {
    return theta_curr * (1.0 / theta_prev - 1.0);
}

ThetaValidation validate_sequence(const std::vector<double>& thetas, double alpha) {
    if (thetas.empty()) throw std::invalid_argument("validate_sequence: empty input");
    const double slack = 1e-12;
    ThetaValidation out;
    out.rows.resize(thetas.size());

    double partial = 0.0;
    for (std::size_t k = 0; k < thetas.size(); ++k) {
        const double th = thetas[k];
        const double prev = k == 0 ? 1.0 : thetas[k - 1];  // theta_{-1} = 1
        ThetaCheckRow row;
        // conditions on theta_k hold for k >= 1; k = 0 only needs theta_0 = 1
        row.upper_bound_ok =
            k == 0 ? th == 1.0
                   : th <= (alpha - 1.0) / (static_cast<double>(k) + alpha - 1.0) + slack;
        row.recurrence_ok = k == 0 || (1.0 - th) * prev * prev <= th * th + slack;
        row.lower_bound_ok = th >= 1.0 / (static_cast<double>(k) + 2.0) - slack;

        partial += 1.0 / (prev * prev) - (1.0 - th) / (th * th);
        const double cap = 2.0 + (static_cast<double>(k) + 3.0) * (static_cast<double>(k) + 3.0) / 2.0;
        row.partial_sum_ok = partial <= cap + 1e-6;

        out.rows[k] = row;
        out.all_ok = out.all_ok && row.upper_bound_ok && row.recurrence_ok &&
                     row.lower_bound_ok && row.partial_sum_ok;
    }
    return out;
}

}  // namespace spinapg
