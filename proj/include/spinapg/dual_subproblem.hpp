#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <functional>
#include <memory>
#include <optional>

#include "spinapg/prox.hpp"

namespace spinapg {

/// One outer-iteration subproblem
///   min_x  g(x) + <grad_at_y, x - y> + (L / (2 tau)) ||x - y||^2   s.t.  A x = b,
/// handled on its dual side. With nu = tau / L the dual objective is
///   Psi(z) = -M_{nu g}(w(z)) + (nu/2) ||A'z - grad_at_y||^2 + <A y - b, z>,
///   w(z)   = nu (A'z - grad_at_y) + y,
/// whose gradient is the constraint residual of the recovered primal point:
///   grad Psi(z) = A prox_{nu g}(w(z)) - b.
///
/// step_scale (tau) is 1 for every method except I-FISTA.
struct DualSubproblem {
    std::shared_ptr<const Eigen::SparseMatrix<double>> a;  // m x d
    Eigen::VectorXd b;                                     // m
    Eigen::VectorXd grad_at_y;                             // d
    Eigen::VectorXd y;                                     // d
    double lip = 1.0;
    double step_scale = 1.0;
    BlockRegularizer reg;

    int rows() const { return static_cast<int>(a->rows()); }
    int cols() const { return static_cast<int>(a->cols()); }
    double nu() const { return step_scale / lip; }
};

double dual_objective(const DualSubproblem& sub, const Eigen::VectorXd& z);
Eigen::VectorXd dual_gradient(const DualSubproblem& sub, const Eigen::VectorXd& z);

/// Primal candidate x(z) = prox_{nu g}(w(z)); satisfies x_{Jc} >= 0 exactly
/// but need not satisfy A x = b.
Eigen::VectorXd recover_primal(const DualSubproblem& sub, const Eigen::VectorXd& z);

/// Data visible to a stopping predicate at one inner iterate.
struct StopContext {
    const DualSubproblem& sub;
    const Eigen::VectorXd& z;
    const Eigen::VectorXd& x;          // recover_primal(sub, z)
    const Eigen::VectorXd& dual_grad;  // A x - b
    double dual_grad_norm;
    double psi;  // dual objective at z
    int t;       // inner iteration index
};

struct StopDecision {
    bool accept = false;
    std::optional<Eigen::VectorXd> x_feasible;  // projected point, when the criterion uses one
    double eps = 0.0;                           // epsilon certificate
    std::optional<Eigen::VectorXd> delta;       // Delta certificate (o-iFB / I-FISTA)
};

using StoppingPredicate = std::function<StopDecision(const StopContext&)>;

struct SsnOptions {
    int max_inner = 200;
    double armijo_sigma = 1e-4;
    int max_backtracks = 50;
    // Unconditional acceptance once ||grad Psi|| <= zero_grad_rel_tol * (1 + ||b||);
    // keeps zero-tolerance (exact) runs terminating at machine precision.
    double zero_grad_rel_tol = 1e-13;
    // Newton system policy: direct solve up to this m, conjugate gradients above.
    int direct_max_m = 2000;
    double cg_rel_tol = 1e-8;
    // Test hook, called once per inner iterate.
    std::function<void(const StopContext&)> observer;
};

enum class SsnStatus { Satisfied, MaxInnerReached };

struct SubproblemResult {
    Eigen::VectorXd x_candidate;
    std::optional<Eigen::VectorXd> x_feasible;
    Eigen::VectorXd z_dual;
    double dual_grad_norm = 0.0;
    int inner_iters = 0;
    double eps_certificate = 0.0;
    std::optional<Eigen::VectorXd> delta_certificate;
    double psi = 0.0;
    SsnStatus status = SsnStatus::Satisfied;
};

/// Semismooth Newton on grad Psi with Armijo backtracking, warm started at
/// z_warm. Stops when the predicate accepts (or the gradient hits the machine
/// floor); exhaustion of max_inner is reported as MaxInnerReached, never as an
/// exception - the caller decides whether to accept or abort.
SubproblemResult ssn_solve(const DualSubproblem& sub, const Eigen::VectorXd& z_warm,
                           const StoppingPredicate& stop, const SsnOptions& opts = {});

/// Practical acceptance rule used by SpinAPG (and o-iFB before projection):
///   ||grad Psi(z)|| <= min(tol_nu, tol_mu)  and
///   ||A'z - grad_at_y - (L/tau)(x - y)|| * ||grad Psi(z)|| <= tol_nu.
/// With tol_nu = tol_mu = t this is max(q, 1) * ||grad Psi|| <= t.
bool spinapg_stop(const DualSubproblem& sub, const Eigen::VectorXd& z,
                  const Eigen::VectorXd& x_candidate, double tol_nu, double tol_mu);

/// Duality-gap rule shared by iAPG-SLB and AIFB; x_feasible must lie in dom P:
///   g(xf) + <grad_at_y, xf - y> + (L/2)||xf - y||^2 + Psi(z) <= tol.
bool slb_stop(const DualSubproblem& sub, const Eigen::VectorXd& z,
              const Eigen::VectorXd& x_feasible, double tol);

/// Relative rule of I-FISTA with tau in (0,1), c in [0, L(1-tau)/tau]:
///   ||L(xf - x)||^2 + 2 tau L eps <= L((1-tau)L - c tau) ||xf - y||^2,
/// eps = lambda(||xf_J||_1 - ||x_J||_1) + <A'z - grad_at_y - (L/tau)(x-y), x - xf>.
bool ifista_stop(const DualSubproblem& sub, const Eigen::VectorXd& z,
                 const Eigen::VectorXd& x_candidate, const Eigen::VectorXd& x_feasible,
                 double tau, double c_coef);

/// eps certificate entering ifista_stop (and the o-iFB bookkeeping with tau=1).
double inexactness_eps(const DualSubproblem& sub, const Eigen::VectorXd& z,
                       const Eigen::VectorXd& x_candidate, const Eigen::VectorXd& x_feasible);

}  // namespace spinapg
