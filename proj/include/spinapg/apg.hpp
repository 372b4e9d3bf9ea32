#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "spinapg/dual_subproblem.hpp"
#include "spinapg/theta_schedule.hpp"

namespace spinapg {

/// Composite objective F = f + P with f smooth (L-Lipschitz gradient) and the
/// nonsmooth part split into a finite regularizer value plus affine
/// feasibility that is tracked separately, since SpinAPG iterates may violate
/// the affine constraint.
struct CompositeProblem {
    /// Returns f(x) and fills grad with grad f(x).
    std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)> smooth_eval;
    double lip = 1.0;
    int dimension = 0;
    /// Finite regularizer part for reporting (lambda * ||x_J||_1).
    std::function<double(const Eigen::VectorXd&)> reg_objective;
    /// Relative KKT residual of the full problem at (x, z).
    std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)> kkt_residual;
};

/// Decaying inexactness budget value(k) = max(upsilon / (k+1)^power, floor).
struct ToleranceSchedule {
    double upsilon = 1.0;
    double power = 3.1;
    double floor = 1e-10;

    double value(int k) const;
};

struct IterateState {
    Eigen::VectorXd x_curr;
    Eigen::VectorXd x_prev;
    Eigen::VectorXd z_warm;
    int k = 0;
    ThetaSchedule schedule;
};

/// y^k = x^k + theta_k (1/theta_{k-1} - 1)(x^k - x^{k-1}).
Eigen::VectorXd extrapolate(const IterateState& state);
Eigen::VectorXd extrapolate(const Eigen::VectorXd& x_curr, const Eigen::VectorXd& x_prev,
                            double theta_curr, double theta_prev);

/// f(x) + finite regularizer part; affine violation is reported separately.
double objective_value(const CompositeProblem& problem, const Eigen::VectorXd& x);

enum class SolveStatus { Converged, MaxOuterReached, SubsolverStalled };
const char* to_string(SolveStatus s);

struct IterRow {
    int k = 0;
    double objective = 0.0;
    double kkt = 0.0;
    double feas = 0.0;  // ||A x - b||
    long inner = 0;
    double seconds = 0.0;  // cumulative wall time at the end of this iteration
    double theta = 1.0;
    double tol = 0.0;
    double step_norm = 0.0;  // ||x^k - x^{k-1}||
};

struct SolverReport {
    std::vector<IterRow> rows;
    SolveStatus status = SolveStatus::MaxOuterReached;
    long total_outer = 0;
    long total_inner = 0;
    double seconds_total = 0.0;
    double seconds_projection = 0.0;
    Eigen::VectorXd final_x;
    Eigen::VectorXd final_z;
    bool jc_nonneg_exact = true;  // every iterate had x_{Jc} >= 0 bitwise
    // Baselines only: worst ||A xf - b|| over all accepted feasible points.
    double max_feasible_residual = 0.0;
    std::vector<std::string> warnings;
};

using SubproblemFactory = std::function<DualSubproblem(const Eigen::VectorXd& y, int k)>;

struct SolverOptions {
    double kkt_tol = 1e-6;
    long max_outer = 20000;
    std::optional<Eigen::VectorXd> x0;  // defaults to the zero vector
    SsnOptions ssn;
    // Test hook, called with each accepted outer iterate x^{k+1}.
    std::function<void(int k, const Eigen::VectorXd& x)> iterate_observer;
};

/// SpinAPG outer loop: extrapolate, solve the subproblem inexactly under the
/// shadow-point acceptance rule, advance the theta schedule, record one row
/// per outer iteration. Iterates are never projected onto dom P; the SSN dual
/// warm-starts each subproblem. Terminates on kkt < kkt_tol, the outer cap,
/// or a stalled subsolver (reported in status, with the partial trace kept).
SolverReport run_spinapg(const CompositeProblem& problem, const SubproblemFactory& factory,
                         const ToleranceSchedule& tol, ThetaSchedule schedule,
                         const SolverOptions& opts);

}  // namespace spinapg
