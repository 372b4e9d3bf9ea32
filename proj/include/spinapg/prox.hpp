#pragma once

#include <Eigen/Core>
#include <vector>

namespace spinapg {

/// Block regularizer g(x) = lambda * ||x_J||_1 + indicator(x_{Jc} >= 0),
/// where J and its complement Jc partition {0, ..., dimension-1}.
///
/// J is stored as a sorted index list; all operations walk the blocks in
/// place so a caller's augmented variable layout is preserved.
class BlockRegularizer {
public:
    BlockRegularizer(double lambda, std::vector<int> j_set, int dimension);

    /// J = {0, ..., j_count-1}, the layout used by the augmented QP.
    static BlockRegularizer l1_prefix(double lambda, int j_count, int dimension);

    double lambda() const { return lambda_; }
    int dimension() const { return dimension_; }
    const std::vector<int>& j_set() const { return j_set_; }
    bool in_j(int i) const { return j_mask_[static_cast<std::size_t>(i)] != 0; }

    /// Finite part of g: lambda * ||x_J||_1.
    double l1_value(const Eigen::VectorXd& x) const;

    /// True when x_{Jc} >= -tol componentwise.
    bool in_domain(const Eigen::VectorXd& x, double tol = 0.0) const;

private:
    double lambda_;
    std::vector<int> j_set_;
    std::vector<char> j_mask_;
    int dimension_;
};

/// Componentwise sign(v_i) * max(|v_i| - t, 0); t >= 0 required.
Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double t);

/// prox_{nu g}(v): soft threshold with t = nu*lambda on J, max(., 0) on Jc.
/// The unique minimizer of g(y) + ||y - v||^2 / (2 nu).
Eigen::VectorXd prox_g(const Eigen::VectorXd& v, double nu, const BlockRegularizer& reg);

/// Moreau envelope of nu g at v: g(p) + ||p - v||^2 / (2 nu), p = prox_g(v, nu).
double moreau_env_g(const Eigen::VectorXd& v, double nu, const BlockRegularizer& reg);

/// Euclidean distance between x and prox_g(v, nu); zero iff x is the prox.
double prox_residual(const Eigen::VectorXd& v, const Eigen::VectorXd& x, double nu,
                     const BlockRegularizer& reg);

}  // namespace spinapg
