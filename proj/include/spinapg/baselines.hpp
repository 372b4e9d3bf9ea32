#pragma once

#include <Eigen/Core>
#include <functional>

#include "spinapg/apg.hpp"

namespace spinapg {

enum class BaselineMethod { SlbAifb, OiFb, IFista };
const char* to_string(BaselineMethod m);

/// iAPG-SLB and AIFB share one implementation: their error criteria are
/// verified by the same duality-gap computation.
struct BaselineConfig {
    BaselineMethod method = BaselineMethod::SlbAifb;
    ToleranceSchedule tol;   // absolute-criterion methods; ignored by I-FISTA
    double tau = 0.9;        // I-FISTA step scale, in (0,1)
    double c_coef = 1e-3;    // I-FISTA c as a multiple of L
    ThetaSchedule schedule = ThetaSchedule::nesterov();
};

/// Projection onto dom P = {x : A x = b, x_{Jc} >= 0}; implementations keep
/// their own dual warm start. Throws on an unsolved inner problem.
using Projector = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Corrected I-FISTA extrapolation:
/// y^k = x^k + theta_k (1/theta_{k-1} - 1)(x^k - x^{k-1})
///       - (tau/L) theta_k / theta_{k-1} * delta_prev.
Eigen::VectorXd ifista_extrapolate(const IterateState& state, const Eigen::VectorXd& delta_prev,
                                   double tau, double lip);

/// o-iFB certificates: delta = L (xf - x) and eps recomputed from its
/// definition (l1 difference plus inner-product term).
std::pair<Eigen::VectorXd, double> oifb_certificate(const Eigen::VectorXd& x_candidate,
                                                    const Eigen::VectorXd& x_feasible,
                                                    const DualSubproblem& sub,
                                                    const Eigen::VectorXd& z);

/// Baseline driver sharing the SpinAPG loop skeleton, with the method's
/// stopping predicate and the explicitly computed feasible point used as the
/// next proximal point. Projection wall time is accounted separately from
/// subsolver time in the report.
SolverReport run_baseline(const CompositeProblem& problem, const SubproblemFactory& factory,
                          const BaselineConfig& config, const SolverOptions& opts,
                          const Projector& project);

}  // namespace spinapg
