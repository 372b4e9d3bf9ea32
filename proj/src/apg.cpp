#include "spinapg/apg.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace spinapg {

double ToleranceSchedule::value(int k) const {
    return std::max(upsilon / std::pow(static_cast<double>(k) + 1.0, power), floor);
}

Eigen::VectorXd extrapolate(const Eigen::VectorXd& x_curr, const Eigen::VectorXd& x_prev,
                            double theta_curr, double theta_prev) {
    return x_curr + extrapolation_coef(theta_curr, theta_prev) * (x_curr - x_prev);
}

Eigen::VectorXd extrapolate(const IterateState& state) {
    return extrapolate(state.x_curr, state.x_prev, state.schedule.theta_curr(),
                       state.schedule.theta_prev());
}

double objective_value(const CompositeProblem& problem, const Eigen::VectorXd& x) {
    if (x.size() != problem.dimension) {
        throw std::invalid_argument("objective_value: dimension mismatch");
    }
    Eigen::VectorXd grad(x.size());
    double f = problem.smooth_eval(x, grad);
    return f + problem.reg_objective(x);
}

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Converged: return "converged";
        case SolveStatus::MaxOuterReached: return "max-outer";
        case SolveStatus::SubsolverStalled: return "subsolver-stalled";
    }
    return "unknown";
}

SolverReport run_spinapg(const CompositeProblem& problem, const SubproblemFactory& factory,
                         const ToleranceSchedule& tol, ThetaSchedule schedule,
                         const SolverOptions& opts) {
    if (opts.kkt_tol < 0.0) throw std::invalid_argument("run_spinapg: kkt_tol must be >= 0");
    if (opts.max_outer < 1) throw std::invalid_argument("run_spinapg: max_outer must be >= 1");

    SolverReport report;
    if (tol.upsilon > 0.0 && tol.power <= 2.0) {
        // theta_k^-1 grows like k, so summability of theta_k^-1 value(k) needs power > 2
        report.warnings.push_back("tolerance power " + std::to_string(tol.power) +
                                  " <= 2: inexactness stream is not summable against the "
                                  "theta schedule");
    }

    IterateState state;
    state.x_curr = opts.x0.value_or(Eigen::VectorXd::Zero(problem.dimension));
    if (state.x_curr.size() != problem.dimension) {
        throw std::invalid_argument("run_spinapg: x0 has wrong dimension");
    }
    state.x_prev = state.x_curr;
    state.schedule = schedule;
    state.k = 0;

    const auto t_start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    };

    report.status = SolveStatus::MaxOuterReached;
    for (long k = 0; k < opts.max_outer; ++k) {
        state.k = static_cast<int>(k);
        const Eigen::VectorXd y = extrapolate(state);
        DualSubproblem sub = factory(y, static_cast<int>(k));
        if (state.z_warm.size() != sub.rows()) state.z_warm = Eigen::VectorXd::Zero(sub.rows());

        const double t_k = tol.value(static_cast<int>(k));
        const double grad_floor = opts.ssn.zero_grad_rel_tol * (1.0 + sub.b.norm());
        StoppingPredicate predicate = [&](const StopContext& ctx) {
            StopDecision dec;
            dec.accept = ctx.dual_grad_norm <= grad_floor ||
                         spinapg_stop(ctx.sub, ctx.z, ctx.x, t_k, t_k);
            if (dec.accept) {
                // kappa-free certificate scalar: the verifiable product term
                Eigen::VectorXd atz = ctx.sub.a->transpose() * ctx.z;
                double q = (atz - ctx.sub.grad_at_y -
                            (ctx.sub.lip / ctx.sub.step_scale) * (ctx.x - ctx.sub.y))
                               .norm();
                dec.eps = q * ctx.dual_grad_norm;
            }
            return dec;
        };

        SubproblemResult res = ssn_solve(sub, state.z_warm, predicate, opts.ssn);
        report.total_inner += res.inner_iters;

        const double theta_used = state.schedule.theta_curr();
        state.x_prev = state.x_curr;
        state.x_curr = res.x_candidate;
        state.z_warm = res.z_dual;
        state.schedule = state.schedule.advanced();
        report.total_outer = k + 1;
        report.jc_nonneg_exact = report.jc_nonneg_exact && sub.reg.in_domain(state.x_curr);
        if (opts.iterate_observer) opts.iterate_observer(static_cast<int>(k), state.x_curr);

        IterRow row;
        row.k = static_cast<int>(k);
        row.objective = objective_value(problem, state.x_curr);
        row.kkt = problem.kkt_residual(state.x_curr, state.z_warm);
        row.feas = res.dual_grad_norm;  // grad Psi is the constraint residual
        row.inner = res.inner_iters;
        row.seconds = elapsed();
        row.theta = theta_used;
        row.tol = t_k;
        row.step_norm = (state.x_curr - state.x_prev).norm();
        report.rows.push_back(row);

        if (res.status == SsnStatus::MaxInnerReached) {
            report.warnings.push_back("subsolver stalled at outer iteration " + std::to_string(k));
            report.status = SolveStatus::SubsolverStalled;
            break;
        }
        if (row.kkt < opts.kkt_tol) {
            report.status = SolveStatus::Converged;
            break;
        }
    }

    report.final_x = state.x_curr;
    report.final_z = state.z_warm;
    report.seconds_total = elapsed();
    report.seconds_projection = 0.0;
    return report;
}

}  // namespace spinapg
