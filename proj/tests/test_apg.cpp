#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/Dense>
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "spinapg/apg.hpp"
#include "spinapg/qp_model.hpp"

using namespace spinapg;

namespace {

// 2-variable equality-constrained QP with a closed-form subproblem solution
struct TinyEqQp {
    Eigen::MatrixXd p{2, 2};
    Eigen::VectorXd q{2};
    Eigen::MatrixXd a{1, 2};
    Eigen::VectorXd b{1};
    double lip;
    BlockRegularizer reg{0.0, {0, 1}, 2};

    TinyEqQp() {
        p << 2.0, 0.3, 0.3, 1.0;
        q << 1.0, -2.0;
        a << 1.0, 1.0;
        b << 1.0;
        lip = estimate_lip(p);
    }

    Eigen::VectorXd grad(const Eigen::VectorXd& x) const { return p * x + q; }

    // argmin <c, x-y> + (L/2)||x-y||^2 over {a x = b}
    Eigen::VectorXd exact_sub(const Eigen::VectorXd& c, const Eigen::VectorXd& y) const {
        Eigen::VectorXd w = y - c / lip;
        double corr = (b[0] - (a * w)[0]) / (a * a.transpose())(0, 0);
        return w + corr * a.transpose().col(0);
    }

    CompositeProblem problem() const {
        CompositeProblem pr;
        pr.lip = lip;
        pr.dimension = 2;
        pr.smooth_eval = [this](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
            g = grad(x);
            return 0.5 * x.dot(p * x) + q.dot(x);
        };
        pr.reg_objective = [](const Eigen::VectorXd&) { return 0.0; };
        pr.kkt_residual = [this](const Eigen::VectorXd& x, const Eigen::VectorXd& z) {
            double stat = (grad(x) - a.transpose() * z).norm() / (lip * (1.0 + x.norm()));
            double feas = (a * x - b).norm() / (1.0 + b.norm());
            return std::max(stat, feas);
        };
        return pr;
    }

    SubproblemFactory factory() const {
        auto a_sp = test::to_sparse(a);
        return [this, a_sp](const Eigen::VectorXd& y, int) {
            return DualSubproblem{a_sp, b, grad(y), y, lip, 1.0, reg};
        };
    }
};

}  // namespace

TEST_CASE("tolerance schedule values") {
    ToleranceSchedule tol{1.0, 3.1, 1e-10};
    CHECK(tol.value(0) == doctest::Approx(1.0));
    double prev = tol.value(0);
    for (int k = 1; k < 5000; ++k) {
        double v = tol.value(k);
        CHECK(v <= prev);
        CHECK(v >= 1e-10);
        prev = v;
    }
    CHECK(tol.value(100000) == 1e-10);  // floor binds

    ToleranceSchedule exact{0.0, 3.1, 0.0};
    CHECK(exact.value(0) == 0.0);
    CHECK(exact.value(7) == 0.0);
}

TEST_CASE("extrapolation point") {
    Eigen::VectorXd x(1), xp(1);
    x << 1.0;
    xp << 0.0;
    CHECK(extrapolate(x, x, 0.7, 0.9) == x);          // equal iterates
    CHECK(extrapolate(x, xp, 1.0, 1.0) == x);         // k = 0, coefficient 0
    CHECK(extrapolate(x, xp, 0.4, 0.5)[0] == doctest::Approx(1.4));

    IterateState st;
    st.x_curr = x;
    st.x_prev = xp;
    st.schedule = ThetaSchedule::nesterov();  // theta_prev = theta_curr = 1
    CHECK(extrapolate(st) == x);
}

TEST_CASE("objective value splits the finite regularizer from feasibility") {
    CompositeProblem pr;
    pr.lip = 1.0;
    pr.dimension = 2;
    pr.smooth_eval = [](const Eigen::VectorXd&, Eigen::VectorXd& g) {
        g.setZero(2);
        return 0.0;
    };
    BlockRegularizer reg(1.0, {0, 1}, 2);
    pr.reg_objective = [&reg](const Eigen::VectorXd& x) { return reg.l1_value(x); };
    pr.kkt_residual = [](const Eigen::VectorXd&, const Eigen::VectorXd&) { return 1.0; };

    Eigen::VectorXd x(2);
    x << 1.0, -2.0;
    CHECK(objective_value(pr, x) == doctest::Approx(3.0));
    CHECK(objective_value(pr, Eigen::VectorXd::Zero(2)) == 0.0);
    CHECK_THROWS_AS(objective_value(pr, Eigen::VectorXd::Zero(3)), std::invalid_argument);
}

TEST_CASE("objective on a generated instance matches an independent evaluation") {
    QpInstance inst = generate_instance(9, LambdaRule::TenQInf, 4);
    AugmentedQp aug = augment(inst);
    CompositeProblem pr = make_problem(aug);
    CounterRng rng(5);
    for (int t = 0; t < 20; ++t) {
        Eigen::VectorXd x = test::random_vector(rng, aug.dim(), 100 * static_cast<std::uint64_t>(t));
        Eigen::VectorXd u = x.head(9);
        double expect = 0.5 * u.dot(inst.p0 * u) + inst.q0.dot(u) +
                        inst.lambda * u.cwiseAbs().sum();
        CHECK(objective_value(pr, x) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("zero-tolerance spinapg reproduces exact apg iterates") {
    TinyEqQp qp;
    std::vector<Eigen::VectorXd> seen;
    SolverOptions opts;
    opts.kkt_tol = 0.0;  // run the full 50 iterations
    opts.max_outer = 50;
    opts.iterate_observer = [&](int, const Eigen::VectorXd& x) { seen.push_back(x); };
    SolverReport rep = run_spinapg(qp.problem(), qp.factory(), ToleranceSchedule{0.0, 3.1, 0.0},
                                   ThetaSchedule::nesterov(), opts);
    REQUIRE(rep.total_outer == 50);
    REQUIRE(seen.size() == 50);

    // hand-coded exact APG with the closed-form subproblem solution
    Eigen::VectorXd x = Eigen::VectorXd::Zero(2), xp = x;
    ThetaSchedule sched = ThetaSchedule::nesterov();
    for (int k = 0; k < 50; ++k) {
        Eigen::VectorXd y = x + sched.extrapolation_coef() * (x - xp);
        Eigen::VectorXd next = qp.exact_sub(qp.grad(y), y);
        xp = x;
        x = next;
        sched = sched.advanced();
        CHECK((seen[static_cast<std::size_t>(k)] - x).norm() <= 1e-10);
    }
}

TEST_CASE("spinapg converges on a generated instance with a clean report") {
    QpInstance inst = generate_instance(12, LambdaRule::Zero, 8);
    AugmentedQp aug = augment(inst);
    CompositeProblem pr = make_problem(aug);
    SolverOptions opts;
    opts.kkt_tol = 1e-7;
    SolverReport rep = run_spinapg(pr, make_subproblem_factory(aug),
                                   ToleranceSchedule{1.0, 3.1, 1e-10},
                                   ThetaSchedule::chambolle_dossal(4.0), opts);
    CHECK(rep.status == SolveStatus::Converged);
    CHECK(rep.rows.back().kkt < 1e-7);
    CHECK(rep.jc_nonneg_exact);
    CHECK(rep.warnings.empty());
    CHECK(rep.rows.back().feas <= 1e-6 * (1.0 + aug.b.norm()));
    CHECK(rep.seconds_projection == 0.0);

    long inner_sum = 0;
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        CHECK(rep.rows[i].k == static_cast<int>(i));  // contiguous in k
        CHECK(rep.rows[i].tol == doctest::Approx(ToleranceSchedule{1.0, 3.1, 1e-10}.value(
                                     static_cast<int>(i))));
        if (i > 0) CHECK(rep.rows[i].seconds >= rep.rows[i - 1].seconds);
        inner_sum += rep.rows[i].inner;
    }
    CHECK(inner_sum == rep.total_inner);
    CHECK(static_cast<long>(rep.rows.size()) == rep.total_outer);
}

TEST_CASE("slow tolerance decay raises the summability warning") {
    TinyEqQp qp;
    SolverOptions opts;
    opts.kkt_tol = 1e-6;
    opts.max_outer = 5;
    SolverReport slow = run_spinapg(qp.problem(), qp.factory(), ToleranceSchedule{1.0, 1.1, 1e-10},
                                    ThetaSchedule::nesterov(), opts);
    REQUIRE(!slow.warnings.empty());
    CHECK(slow.warnings.front().find("not summable") != std::string::npos);

    SolverReport fast = run_spinapg(qp.problem(), qp.factory(), ToleranceSchedule{1.0, 3.1, 1e-10},
                                    ThetaSchedule::nesterov(), opts);
    CHECK(fast.warnings.empty());
}

TEST_CASE("subsolver exhaustion surfaces as a stalled status") {
    QpInstance inst = generate_instance(10, LambdaRule::Zero, 15);
    AugmentedQp aug = augment(inst);
    SolverOptions opts;
    opts.kkt_tol = 1e-10;
    opts.ssn.max_inner = 1;
    opts.ssn.zero_grad_rel_tol = 0.0;
    SolverReport rep = run_spinapg(make_problem(aug), make_subproblem_factory(aug),
                                   ToleranceSchedule{1e-14, 3.1, 0.0}, ThetaSchedule::nesterov(),
                                   opts);
    CHECK(rep.status == SolveStatus::SubsolverStalled);
    CHECK(!rep.warnings.empty());
    CHECK(!rep.rows.empty());  // the partial trace is kept
}
