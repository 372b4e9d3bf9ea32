#include "spinapg/prox.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spinapg {

namespace {

void check_dimension(const Eigen::VectorXd& v, const BlockRegularizer& reg, const char* what) {
    if (v.size() != reg.dimension()) {
        throw std::invalid_argument(std::string(what) + ": vector has dimension " +
                                    std::to_string(v.size()) + ", regularizer expects " +
                                    std::to_string(reg.dimension()));
    }
}

}  // namespace

BlockRegularizer::BlockRegularizer(double lambda, std::vector<int> j_set, int dimension)
    : lambda_(lambda), j_set_(std::move(j_set)), dimension_(dimension) {
    if (lambda_ < 0.0) throw std::invalid_argument("BlockRegularizer: lambda must be >= 0");
    if (dimension_ < 0) throw std::invalid_argument("BlockRegularizer: dimension must be >= 0");
    std::sort(j_set_.begin(), j_set_.end());
    j_set_.erase(std::unique(j_set_.begin(), j_set_.end()), j_set_.end());
    if (!j_set_.empty() && (j_set_.front() < 0 || j_set_.back() >= dimension_)) {
        throw std::invalid_argument("BlockRegularizer: J index out of range");
    }
    j_mask_.assign(static_cast<std::size_t>(dimension_), 0);
    for (int i : j_set_) j_mask_[static_cast<std::size_t>(i)] = 1;
}

BlockRegularizer BlockRegularizer::l1_prefix(double lambda, int j_count, int dimension) {
    std::vector<int> j(static_cast<std::size_t>(j_count));
    for (int i = 0; i < j_count; ++i) j[static_cast<std::size_t>(i)] = i;
    return BlockRegularizer(lambda, std::move(j), dimension);
}

double BlockRegularizer::l1_value(const Eigen::VectorXd& x) const {
    check_dimension(x, *this, "l1_value");
    double s = 0.0;
    for (int i : j_set_) s += std::abs(x[i]);
    return lambda_ * s;
}

bool BlockRegularizer::in_domain(const Eigen::VectorXd& x, double tol) const {
    check_dimension(x, *this, "in_domain");
    for (int i = 0; i < dimension_; ++i) {
        if (!j_mask_[static_cast<std::size_t>(i)] && x[i] < -tol) return false;
    }
    return true;
}

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double t) {
    if (t < 0.0) throw std::invalid_argument("soft_threshold: t must be >= 0");
    Eigen::VectorXd out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        // max(|v|-t, 0) keeps ties at the kink exactly at zero
        double s = std::max(std::abs(v[i]) - t, 0.0);
        out[i] = v[i] >= 0.0 ? s : -s;
    }
    return out;
}

Eigen::VectorXd prox_g(const Eigen::VectorXd& v, double nu, const BlockRegularizer& reg) {
    if (nu <= 0.0) throw std::invalid_argument("prox_g: nu must be > 0");
    check_dimension(v, reg, "prox_g");
    const double t = nu * reg.lambda();
    Eigen::VectorXd out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (reg.in_j(static_cast<int>(i))) {
            double s = std::max(std::abs(v[i]) - t, 0.0);
            out[i] = v[i] >= 0.0 ? s : -s;
        } else {
            out[i] = std::max(v[i], 0.0);
        }
    }
    return out;
}

double moreau_env_g(const Eigen::VectorXd& v, double nu, const BlockRegularizer& reg) {
    if (nu <= 0.0) throw std::invalid_argument("moreau_env_g: nu must be > 0");
    check_dimension(v, reg, "moreau_env_g");
    Eigen::VectorXd p = prox_g(v, nu, reg);
    return reg.l1_value(p) + (p - v).squaredNorm() / (2.0 * nu);
}

double prox_residual(const Eigen::VectorXd& v, const Eigen::VectorXd& x, double nu,
                     const BlockRegularizer& reg) {
    if (nu <= 0.0) throw std::invalid_argument("prox_residual: nu must be > 0");
    check_dimension(v, reg, "prox_residual");
    check_dimension(x, reg, "prox_residual");
    return (x - prox_g(v, nu, reg)).norm();
}

}  // namespace spinapg
