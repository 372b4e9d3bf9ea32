#include "spinapg/baselines.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace spinapg {

const char* to_string(BaselineMethod m) {
    switch (m) {
        case BaselineMethod::SlbAifb: return "slb-aifb";
        case BaselineMethod::OiFb: return "oifb";
        case BaselineMethod::IFista: return "ifista";
    }
    return "unknown";
}

Eigen::VectorXd ifista_extrapolate(const IterateState& state, const Eigen::VectorXd& delta_prev,
                                   double tau, double lip) {
    Eigen::VectorXd y = extrapolate(state);
    if (delta_prev.size() == 0) return y;
    const double theta_ratio = state.schedule.theta_curr() / state.schedule.theta_prev();
    return y - (tau / lip) * theta_ratio * delta_prev;
}

std::pair<Eigen::VectorXd, double> oifb_certificate(const Eigen::VectorXd& x_candidate,
                                                    const Eigen::VectorXd& x_feasible,
                                                    const DualSubproblem& sub,
                                                    const Eigen::VectorXd& z) {
    Eigen::VectorXd delta = (sub.lip / sub.step_scale) * (x_feasible - x_candidate);
    double eps = inexactness_eps(sub, z, x_candidate, x_feasible);
    return {delta, eps};
}

SolverReport run_baseline(const CompositeProblem& problem, const SubproblemFactory& factory,
                          const BaselineConfig& config, const SolverOptions& opts,
                          const Projector& project) {
    if (opts.kkt_tol < 0.0) throw std::invalid_argument("run_baseline: kkt_tol must be >= 0");
    if (opts.max_outer < 1) throw std::invalid_argument("run_baseline: max_outer must be >= 1");
    const bool ifista = config.method == BaselineMethod::IFista;
    if (ifista && (config.tau <= 0.0 || config.tau >= 1.0)) {
        throw std::invalid_argument("run_baseline: I-FISTA requires tau in (0,1)");
    }

    SolverReport report;
    if (!ifista && config.tol.upsilon > 0.0 && config.tol.power <= 2.0) {
        report.warnings.push_back("tolerance power " + std::to_string(config.tol.power) +
                                  " <= 2: inexactness stream is not summable against the "
                                  "theta schedule");
    }

    IterateState state;
    state.x_curr = opts.x0.value_or(Eigen::VectorXd::Zero(problem.dimension));
    if (state.x_curr.size() != problem.dimension) {
        throw std::invalid_argument("run_baseline: x0 has wrong dimension");
    }
    state.x_prev = state.x_curr;
    state.schedule = config.schedule;

    const auto t_start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    };

    double proj_seconds = 0.0;
    auto timed_project = [&](const Eigen::VectorXd& v) {
        const auto t0 = std::chrono::steady_clock::now();
        Eigen::VectorXd out = project(v);
        proj_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return out;
    };

    Eigen::VectorXd delta_prev;  // I-FISTA correction from the previous iteration

    report.status = SolveStatus::MaxOuterReached;
    for (long k = 0; k < opts.max_outer; ++k) {
        state.k = static_cast<int>(k);
        Eigen::VectorXd y = ifista ? ifista_extrapolate(state, delta_prev, config.tau, problem.lip)
                                   : extrapolate(state);
        DualSubproblem sub = factory(y, static_cast<int>(k));
        sub.step_scale = ifista ? config.tau : 1.0;
        if (state.z_warm.size() != sub.rows()) state.z_warm = Eigen::VectorXd::Zero(sub.rows());

        const double t_k = config.tol.value(static_cast<int>(k));
        const double grad_floor = opts.ssn.zero_grad_rel_tol * (1.0 + sub.b.norm());

        StoppingPredicate predicate;
        switch (config.method) {
            case BaselineMethod::SlbAifb:
                predicate = [&](const StopContext& ctx) {
                    StopDecision dec;
                    Eigen::VectorXd xf = timed_project(ctx.x);
                    dec.accept = ctx.dual_grad_norm <= grad_floor ||
                                 slb_stop(ctx.sub, ctx.z, xf, t_k);
                    if (dec.accept) {
                        dec.x_feasible = std::move(xf);
                        dec.eps = t_k;
                    }
                    return dec;
                };
                break;
            case BaselineMethod::OiFb:
                predicate = [&](const StopContext& ctx) {
                    StopDecision dec;
                    dec.accept = ctx.dual_grad_norm <= grad_floor ||
                                 spinapg_stop(ctx.sub, ctx.z, ctx.x, t_k, t_k);
                    if (dec.accept) {
                        Eigen::VectorXd xf = timed_project(ctx.x);
                        auto [delta, eps] = oifb_certificate(ctx.x, xf, ctx.sub, ctx.z);
                        dec.x_feasible = std::move(xf);
                        dec.delta = std::move(delta);
                        dec.eps = eps;
                    }
                    return dec;
                };
                break;
            case BaselineMethod::IFista:
                predicate = [&](const StopContext& ctx) {
                    StopDecision dec;
                    Eigen::VectorXd xf = timed_project(ctx.x);
                    dec.accept =
                        ctx.dual_grad_norm <= grad_floor ||
                        ifista_stop(ctx.sub, ctx.z, ctx.x, xf, config.tau, config.c_coef * ctx.sub.lip);
                    if (dec.accept) {
                        dec.delta = (ctx.sub.lip / config.tau) * (xf - ctx.x);
                        dec.eps = inexactness_eps(ctx.sub, ctx.z, ctx.x, xf);
                        dec.x_feasible = std::move(xf);
                    }
                    return dec;
                };
                break;
        }

        SubproblemResult res;
        try {
            res = ssn_solve(sub, state.z_warm, predicate, opts.ssn);
        } catch (const std::runtime_error& err) {
            report.warnings.push_back("projection failed at outer iteration " + std::to_string(k) +
                                      ": " + err.what());
            report.status = SolveStatus::SubsolverStalled;
            break;
        }
        report.total_inner += res.inner_iters;

        if (res.status == SsnStatus::MaxInnerReached) {
            report.warnings.push_back("subsolver stalled at outer iteration " + std::to_string(k));
            report.total_outer = k + 1;
            report.status = SolveStatus::SubsolverStalled;
            break;
        }
        // The floor exit can fire before the predicate projects.
        if (!res.x_feasible) res.x_feasible = timed_project(res.x_candidate);

        const double theta_used = state.schedule.theta_curr();
        state.x_prev = state.x_curr;
        state.x_curr = *res.x_feasible;  // the feasible point is the next proximal point
        state.z_warm = res.z_dual;
        state.schedule = state.schedule.advanced();
        delta_prev = res.delta_certificate.value_or(Eigen::VectorXd());
        report.total_outer = k + 1;

        const double feas = ((*sub.a) * state.x_curr - sub.b).norm();
        report.max_feasible_residual = std::max(report.max_feasible_residual, feas);
        report.jc_nonneg_exact = report.jc_nonneg_exact && sub.reg.in_domain(state.x_curr);
        if (opts.iterate_observer) opts.iterate_observer(static_cast<int>(k), state.x_curr);

        IterRow row;
        row.k = static_cast<int>(k);
        row.objective = objective_value(problem, state.x_curr);
        row.kkt = problem.kkt_residual(state.x_curr, state.z_warm);
        row.feas = feas;
        row.inner = res.inner_iters;
        row.seconds = elapsed();
        row.theta = theta_used;
        row.tol = t_k;
        row.step_norm = (state.x_curr - state.x_prev).norm();
        report.rows.push_back(row);

        if (row.kkt < opts.kkt_tol) {
            report.status = SolveStatus::Converged;
            break;
        }
    }

    report.final_x = state.x_curr;
    report.final_z = state.z_warm;
    report.seconds_total = elapsed();
    report.seconds_projection = proj_seconds;
    return report;
}

}  // namespace spinapg
