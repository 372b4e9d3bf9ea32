#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "spinapg/theta_schedule.hpp"

using namespace spinapg;

namespace {

std::vector<double> generate(ThetaSchedule sched, int count) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        out.push_back(sched.theta_curr());
        sched = sched.advanced();
    }
    return out;
}

}  // namespace

TEST_CASE("nesterov recurrence first steps") {
    ThetaSchedule s = ThetaSchedule::nesterov();
    CHECK(s.theta_prev() == 1.0);
    CHECK(s.theta_curr() == 1.0);

    // theta_1 solves theta^2 + theta - 1 = 0 (recurrence with theta_0 = 1)
    s = s.advanced();
    const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
    CHECK(s.theta_curr() == doctest::Approx(golden).epsilon(1e-15));

    // theta_2 is the positive root of theta^2 + t^2 theta - t^2 = 0, t = theta_1
    const double t2 = golden * golden;
    const double root = (-t2 + std::sqrt(t2 * t2 + 4.0 * t2)) / 2.0;
    s = s.advanced();
    CHECK(s.theta_curr() == doctest::Approx(root).epsilon(1e-14));
    CHECK(s.theta_prev() == doctest::Approx(golden).epsilon(1e-15));
    CHECK(s.k() == 2);
}

TEST_CASE("chambolle-dossal closed form") {
    ThetaSchedule s = ThetaSchedule::chambolle_dossal(4.0);
    s = s.advanced();  // k = 1
    CHECK(s.theta_curr() == doctest::Approx(3.0 / 4.0));
    for (int k = 2; k <= 5; ++k) s = s.advanced();
    CHECK(s.theta_curr() == doctest::Approx(3.0 / 8.0));  // k = 5
    CHECK(s.theta_prev() == doctest::Approx(3.0 / 7.0));  // k = 4
    CHECK(s.extrapolation_coef() == doctest::Approx(0.5));

    CHECK_THROWS_AS(ThetaSchedule::chambolle_dossal(2.9), std::invalid_argument);
}

TEST_CASE("extrapolation coefficient") {
    CHECK(extrapolation_coef(0.5, 1.0) == 0.0);
    CHECK(extrapolation_coef(0.4, 0.5) == doctest::Approx(0.4));
    // zero exactly when theta_prev = 1
    CHECK(extrapolation_coef(0.123, 1.0) == 0.0);
}

TEST_CASE("sequence conditions hold over 10000 terms") {
    const int count = 10000;
    for (auto sched : {ThetaSchedule::nesterov(), ThetaSchedule::chambolle_dossal(4.0)}) {
        const double alpha = sched.alpha();
        std::vector<double> thetas = generate(sched, count);
        ThetaValidation val = validate_sequence(thetas, alpha);
        CHECK(val.all_ok);
        // lower bound of the admissibility lemma, explicit
        for (int k = 0; k < count; ++k) {
            CHECK(thetas[static_cast<std::size_t>(k)] >= 1.0 / (k + 2.0) - 1e-12);
        }
    }
}

TEST_CASE("nesterov upper bound 2/(k+2)") {
    std::vector<double> thetas = generate(ThetaSchedule::nesterov(), 5000);
    for (int k = 0; k < 5000; ++k) {
        CHECK(thetas[static_cast<std::size_t>(k)] <= 2.0 / (k + 2.0) + 1e-12);
    }
}

TEST_CASE("chambolle-dossal with alpha > 3 satisfies the recurrence strictly") {
    std::vector<double> thetas = generate(ThetaSchedule::chambolle_dossal(4.0), 2000);
    for (std::size_t k = 1; k < thetas.size(); ++k) {
        double lhs = (1.0 - thetas[k]) * thetas[k - 1] * thetas[k - 1];
        CHECK(lhs < thetas[k] * thetas[k]);
    }
}

TEST_CASE("validator flags an inadmissible sequence") {
    std::vector<double> bad = {1.0, 1.0, 1.0};
    ThetaValidation val = validate_sequence(bad, 4.0);
    CHECK(!val.all_ok);
    CHECK(!val.rows[1].upper_bound_ok);  // 1 > (alpha-1)/alpha
    CHECK_THROWS_AS(validate_sequence({}, 3.0), std::invalid_argument);
}

TEST_CASE("generated prefixes validate") {
    std::vector<double> nes = generate(ThetaSchedule::nesterov(), 100);
    CHECK(validate_sequence(nes, 3.0).all_ok);
    std::vector<double> cd = generate(ThetaSchedule::chambolle_dossal(4.0), 100);
    CHECK(validate_sequence(cd, 4.0).all_ok);
}

TEST_CASE("custom schedule consumes a user sequence") {
    std::vector<double> seq = generate(ThetaSchedule::chambolle_dossal(5.0), 8);
    ThetaSchedule s = ThetaSchedule::custom(seq);
    for (int k = 1; k < 8; ++k) {
        s = s.advanced();
        CHECK(s.theta_curr() == seq[static_cast<std::size_t>(k)]);
    }
    CHECK_THROWS_AS(s.advanced(), std::out_of_range);
    CHECK_THROWS_AS(ThetaSchedule::custom({0.5}), std::invalid_argument);
}
