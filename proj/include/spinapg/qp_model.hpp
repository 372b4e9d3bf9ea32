#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>

#include "spinapg/apg.hpp"
#include "spinapg/baselines.hpp"

namespace spinapg {

enum class LambdaRule { Zero, TenQInf };
const char* to_string(LambdaRule r);
LambdaRule lambda_rule_from_string(const std::string& s);

/// Sparse QP  min_u 0.5 u'P0 u + q0'u + lambda ||u||_1  s.t.  A0 u <= b,
/// with P0 = M M' + 0.01 I positive definite.
struct QpInstance {
    int n = 0;
    int m = 0;
    std::uint64_t seed = 0;
    LambdaRule rule = LambdaRule::Zero;
    double lambda = 0.0;
    Eigen::MatrixXd p0;                  // n x n, dense
    Eigen::SparseMatrix<double> a0;      // m x n
    Eigen::VectorXd q0;                  // n
    Eigen::VectorXd b;                   // m
};

/// Deterministic instance for a fixed seed. M and A0 have ~15% nonzeros drawn
/// N(0,1), m = 10n, q0 ~ N(0,1), and b = A0 v + delta with v 15%-dense N(0,1)
/// and delta uniform on [0,1]^m, which makes u = v feasible.
QpInstance generate_instance(int n, LambdaRule rule, std::uint64_t seed);

/// Slack reformulation over x = (u; s):
///   min 0.5 x'P x + q'x + lambda ||x_J||_1 + ind(x_{Jc} >= 0)  s.t.  A x = b,
/// P = blkdiag(P0, 0), q = (q0; 0), A = [A0  I_m], J = {0..n-1}.
struct AugmentedQp {
    int n = 0;
    int m = 0;
    double lambda = 0.0;
    double lip = 1.0;  // ||P0||, from estimate_lip
    Eigen::MatrixXd p0;
    Eigen::VectorXd q0;
    Eigen::SparseMatrix<double> a0;
    Eigen::VectorXd b;
    std::shared_ptr<const Eigen::SparseMatrix<double>> a;  // [A0 I]
    BlockRegularizer reg;

    int dim() const { return n + m; }
    double f_value(const Eigen::VectorXd& x) const;
    Eigen::VectorXd f_gradient(const Eigen::VectorXd& x) const;
};

AugmentedQp augment(const QpInstance& inst);

/// Spectral norm of a symmetric PSD matrix by power iteration (relative
/// tolerance 1e-10, cap 10000), returned with a (1 + 1e-8) upward bias so the
/// Lipschitz bound stays safe. Throws on non-symmetric input.
double estimate_lip(const Eigen::MatrixXd& p0);

/// Relative KKT residual
///   max( ||Ax - b|| / (1 + ||b||),
///        ||x - prox_{g/L}(x - (P x + q - A'z)/L)|| / (1 + ||x||) ).
double kkt_residual(const AugmentedQp& aug, const Eigen::VectorXd& x, const Eigen::VectorXd& z);

struct ProjectionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Projection onto dom P = {x : A x = b, x_{Jc} >= 0}, solved as a dual SSN
/// subproblem (f = 0.5||.-x||^2, lambda = 0, L = 1) to constraint residual
/// 1e-12 (1 + ||b||). Keeps a dual warm start across calls.
class DomProjector {
public:
    explicit DomProjector(const AugmentedQp& aug);
    Eigen::VectorXd operator()(const Eigen::VectorXd& x);

    long cumulative_inner() const { return inner_; }

private:
    const AugmentedQp* aug_;
    Eigen::VectorXd z_warm_;
    long inner_ = 0;
};

/// One-shot projection (cold start).
Eigen::VectorXd project_dom_p(const AugmentedQp& aug, const Eigen::VectorXd& x);

struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Self-describing .qpinst.json document (dimensions, seed, lambda rule,
/// dense P0 row-major, sparse triplets for A0, q0, b).
void save_instance(const QpInstance& inst, const std::string& path);
std::string instance_to_json(const QpInstance& inst);
/// Throws SchemaError naming the offending field path.
QpInstance load_instance(const std::string& path);
QpInstance instance_from_json(const std::string& text);

/// Driver glue for the solvers. The AugmentedQp is captured by reference and
/// must outlive the returned objects.
CompositeProblem make_problem(const AugmentedQp& aug);
SubproblemFactory make_subproblem_factory(const AugmentedQp& aug);

/// Fraction of (near-)zero entries in the u block, |u_i| <= 1e-8 max(1, ||u||_inf).
double u_sparsity(const AugmentedQp& aug, const Eigen::VectorXd& x);

}  // namespace spinapg
