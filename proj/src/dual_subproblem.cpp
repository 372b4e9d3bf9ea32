#include "spinapg/dual_subproblem.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace spinapg {

namespace {

void check_z(const DualSubproblem& sub, const Eigen::VectorXd& z, const char* what) {
    if (z.size() != sub.rows()) {
        throw std::invalid_argument(std::string(what) + ": dual vector has dimension " +
                                    std::to_string(z.size()) + ", expected " +
                                    std::to_string(sub.rows()));
    }
}

Eigen::VectorXd prox_argument(const DualSubproblem& sub, const Eigen::VectorXd& atz) {
    return sub.nu() * (atz - sub.grad_at_y) + sub.y;
}

double psi_value(const DualSubproblem& sub, const Eigen::VectorXd& atz, const Eigen::VectorXd& w,
                 const Eigen::VectorXd& x, double ayb_dot_z) {
    const double nu = sub.nu();
    double envelope = sub.reg.l1_value(x) + (x - w).squaredNorm() / (2.0 * nu);
    return -envelope + 0.5 * nu * (atz - sub.grad_at_y).squaredNorm() + ayb_dot_z;
}

struct ColInfo {
    int nnz = 0;
    int row = -1;
    double val = 0.0;
};

std::vector<ColInfo> classify_columns(const Eigen::SparseMatrix<double>& a) {
    std::vector<ColInfo> cols(static_cast<std::size_t>(a.cols()));
    for (int j = 0; j < a.outerSize(); ++j) {
        ColInfo info;
        for (Eigen::SparseMatrix<double>::InnerIterator it(a, j); it; ++it) {
            if (info.nnz == 0) {
                info.row = static_cast<int>(it.row());
                info.val = it.value();
            }
            ++info.nnz;
        }
        cols[static_cast<std::size_t>(j)] = info;
    }
    return cols;
}

// Generalized-Jacobian mask of the prox: identity in coordinate i iff the
// prox is locally the identity there; kink points map to 0 (the smaller
// Newton system).
std::vector<char> active_mask(const DualSubproblem& sub, const Eigen::VectorXd& w) {
    const double t = sub.nu() * sub.reg.lambda();
    std::vector<char> active(static_cast<std::size_t>(w.size()), 0);
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        if (sub.reg.in_j(static_cast<int>(i))) {
            active[static_cast<std::size_t>(i)] = std::abs(w[i]) > t ? 1 : 0;
        } else {
            active[static_cast<std::size_t>(i)] = w[i] > 0.0 ? 1 : 0;
        }
    }
    return active;
}

// Solves (rho I + nu A D A') dir = neg_grad, with D the 0/1 activity mask.
// Singleton columns of A fold into the diagonal; the remaining active columns
// B enter through a reduced r x r Cholesky (Woodbury through the diagonal
// block) or a dense factorization when r >= m. CG handles m beyond the
// direct-solve cap.
//
// The Tikhonov shift is negligible while every row carries an active
// singleton (the system is safely invertible and Newton steps stay exact);
// otherwise it scales with nu and the relative gradient so the direction
// stays bounded on rows the mask leaves uncovered, while still vanishing
// near the solution.
bool newton_direction(const Eigen::SparseMatrix<double>& a, const std::vector<ColInfo>& cols,
                      const std::vector<char>& active, double nu, double grad_rel,
                      const Eigen::VectorXd& neg_grad, const SsnOptions& opts,
                      Eigen::VectorXd& dir) {
    const int m = static_cast<int>(a.rows());
    Eigen::VectorXd sigma = Eigen::VectorXd::Zero(m);
    std::vector<int> gen;
    for (int j = 0; j < static_cast<int>(cols.size()); ++j) {
        const auto& c = cols[static_cast<std::size_t>(j)];
        if (!active[static_cast<std::size_t>(j)] || c.nnz == 0) continue;
        if (c.nnz == 1) {
            sigma[c.row] += nu * c.val * c.val;
        } else {
            gen.push_back(j);
        }
    }
    const bool covered = sigma.minCoeff() > 1e-8 * nu;
    const double rho = covered ? 1e-12 * nu : nu * (1e-12 + 0.1 * std::min(grad_rel, 1.0));
    sigma.array() += rho;
    const int r = static_cast<int>(gen.size());
    if (r == 0) {
        dir = neg_grad.cwiseQuotient(sigma);
        return true;
    }

    if (m <= opts.direct_max_m && r < m) {
        Eigen::SparseMatrix<double> b_cols(m, r);
        std::vector<Eigen::Triplet<double>> trips;
        for (int jj = 0; jj < r; ++jj) {
            for (Eigen::SparseMatrix<double>::InnerIterator it(a, gen[static_cast<std::size_t>(jj)]);
                 it; ++it) {
                trips.emplace_back(static_cast<int>(it.row()), jj, it.value());
            }
        }
        b_cols.setFromTriplets(trips.begin(), trips.end());
        Eigen::SparseMatrix<double> scaled = b_cols;
        for (int k = 0; k < scaled.outerSize(); ++k) {
            for (Eigen::SparseMatrix<double>::InnerIterator it(scaled, k); it; ++it) {
                it.valueRef() /= sigma[it.row()];
            }
        }
        Eigen::SparseMatrix<double> gram = (b_cols.transpose() * scaled).pruned();
        Eigen::MatrixXd reduced = Eigen::MatrixXd(gram);
        reduced.diagonal().array() += 1.0 / nu;
        Eigen::LLT<Eigen::MatrixXd> llt(reduced);
        if (llt.info() != Eigen::Success) return false;
        Eigen::VectorXd u = neg_grad.cwiseQuotient(sigma);
        Eigen::VectorXd s = llt.solve(b_cols.transpose() * u);
        dir = u - (b_cols * s).cwiseQuotient(sigma);
        return true;
    }

    if (m <= opts.direct_max_m) {
        // r >= m: a full dense system is the cheaper factorization
        Eigen::MatrixXd bd = Eigen::MatrixXd::Zero(m, r);
        for (int jj = 0; jj < r; ++jj) {
            for (Eigen::SparseMatrix<double>::InnerIterator it(a, gen[static_cast<std::size_t>(jj)]);
                 it; ++it) {
                bd(it.row(), jj) = it.value();
            }
        }
        Eigen::MatrixXd h = nu * (bd * bd.transpose());
        h += sigma.asDiagonal();
        Eigen::LLT<Eigen::MatrixXd> llt(h);
        if (llt.info() != Eigen::Success) return false;
        dir = llt.solve(neg_grad);
        return true;
    }

    // Preconditioned CG, matrix-free through the active columns.
    Eigen::VectorXd diag = sigma;
    for (int jj = 0; jj < r; ++jj) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(a, gen[static_cast<std::size_t>(jj)]);
             it; ++it) {
            diag[it.row()] += nu * it.value() * it.value();
        }
    }
    auto apply = [&](const Eigen::VectorXd& v) {
        Eigen::VectorXd out = sigma.cwiseProduct(v);
        for (int jj = 0; jj < r; ++jj) {
            const int j = gen[static_cast<std::size_t>(jj)];
            double dot = 0.0;
            for (Eigen::SparseMatrix<double>::InnerIterator it(a, j); it; ++it) {
                dot += it.value() * v[it.row()];
            }
            dot *= nu;
            for (Eigen::SparseMatrix<double>::InnerIterator it(a, j); it; ++it) {
                out[it.row()] += dot * it.value();
            }
        }
        return out;
    };
    dir.setZero(m);
    Eigen::VectorXd res = neg_grad;
    Eigen::VectorXd zv = res.cwiseQuotient(diag);
    Eigen::VectorXd p = zv;
    double rz = res.dot(zv);
    const double target = opts.cg_rel_tol * neg_grad.norm();
    const long cap = 10L * m;
    for (long it = 0; it < cap && res.norm() > target; ++it) {
        Eigen::VectorXd hp = apply(p);
        double alpha = rz / p.dot(hp);
        dir += alpha * p;
        res -= alpha * hp;
        zv = res.cwiseQuotient(diag);
        double rz_next = res.dot(zv);
        p = zv + (rz_next / rz) * p;
        rz = rz_next;
    }
    return true;
}

}  // namespace

double dual_objective(const DualSubproblem& sub, const Eigen::VectorXd& z) {
    check_z(sub, z, "dual_objective");
    Eigen::VectorXd atz = sub.a->transpose() * z;
    Eigen::VectorXd w = prox_argument(sub, atz);
    Eigen::VectorXd x = prox_g(w, sub.nu(), sub.reg);
    double ayb_dot_z = ((*sub.a) * sub.y - sub.b).dot(z);
    return psi_value(sub, atz, w, x, ayb_dot_z);
}

Eigen::VectorXd dual_gradient(const DualSubproblem& sub, const Eigen::VectorXd& z) {
    check_z(sub, z, "dual_gradient");
    return (*sub.a) * recover_primal(sub, z) - sub.b;
}

Eigen::VectorXd recover_primal(const DualSubproblem& sub, const Eigen::VectorXd& z) {
    check_z(sub, z, "recover_primal");
    Eigen::VectorXd atz = sub.a->transpose() * z;
    return prox_g(prox_argument(sub, atz), sub.nu(), sub.reg);
}

bool spinapg_stop(const DualSubproblem& sub, const Eigen::VectorXd& z,
                  const Eigen::VectorXd& x_candidate, double tol_nu, double tol_mu) {
    check_z(sub, z, "spinapg_stop");
    const double l_eff = sub.lip / sub.step_scale;
    Eigen::VectorXd atz = sub.a->transpose() * z;
    double gnorm = ((*sub.a) * x_candidate - sub.b).norm();
    double q = (atz - sub.grad_at_y - l_eff * (x_candidate - sub.y)).norm();
    return gnorm <= std::min(tol_nu, tol_mu) && q * gnorm <= tol_nu;
}

bool slb_stop(const DualSubproblem& sub, const Eigen::VectorXd& z,
              const Eigen::VectorXd& x_feasible, double tol) {
    check_z(sub, z, "slb_stop");
    if (x_feasible.size() != sub.cols()) {
        throw std::invalid_argument("slb_stop: feasible point has wrong dimension");
    }
    double primal = sub.reg.l1_value(x_feasible) + sub.grad_at_y.dot(x_feasible - sub.y) +
                    0.5 * sub.lip * (x_feasible - sub.y).squaredNorm();
    return primal + dual_objective(sub, z) <= tol;
}

double inexactness_eps(const DualSubproblem& sub, const Eigen::VectorXd& z,
                       const Eigen::VectorXd& x_candidate, const Eigen::VectorXd& x_feasible) {
    check_z(sub, z, "inexactness_eps");
    const double l_eff = sub.lip / sub.step_scale;
    Eigen::VectorXd atz = sub.a->transpose() * z;
    Eigen::VectorXd mult = atz - sub.grad_at_y - l_eff * (x_candidate - sub.y);
    return sub.reg.l1_value(x_feasible) - sub.reg.l1_value(x_candidate) +
           mult.dot(x_candidate - x_feasible);
}

bool ifista_stop(const DualSubproblem& sub, const Eigen::VectorXd& z,
                 const Eigen::VectorXd& x_candidate, const Eigen::VectorXd& x_feasible,
                 double tau, double c_coef) {
    if (tau <= 0.0 || tau >= 1.0) throw std::invalid_argument("ifista_stop: tau must be in (0,1)");
    const double lip = sub.lip;
    if (c_coef < 0.0 || c_coef > lip * (1.0 - tau) / tau) {
        throw std::invalid_argument("ifista_stop: c must be in [0, L(1-tau)/tau]");
    }
    double eps = inexactness_eps(sub, z, x_candidate, x_feasible);
    double lhs = (lip * (x_feasible - x_candidate)).squaredNorm() + 2.0 * tau * lip * eps;
    double rhs = lip * ((1.0 - tau) * lip - c_coef * tau) * (x_feasible - sub.y).squaredNorm();
    return lhs <= rhs;
}

SubproblemResult ssn_solve(const DualSubproblem& sub, const Eigen::VectorXd& z_warm,
                           const StoppingPredicate& stop, const SsnOptions& opts) {
    check_z(sub, z_warm, "ssn_solve");
    if (opts.max_inner < 1) throw std::invalid_argument("ssn_solve: max_inner must be >= 1");
    const auto& a = *sub.a;
    const double nu = sub.nu();
    const Eigen::VectorXd ayb = a * sub.y - sub.b;
    const double grad_floor = opts.zero_grad_rel_tol * (1.0 + sub.b.norm());
    const auto cols = classify_columns(a);

    Eigen::VectorXd z = z_warm;
    Eigen::VectorXd atz = a.transpose() * z;
    Eigen::VectorXd w = prox_argument(sub, atz);
    Eigen::VectorXd x = prox_g(w, nu, sub.reg);
    Eigen::VectorXd grad = a * x - sub.b;
    double gnorm = grad.norm();
    double psi = psi_value(sub, atz, w, x, ayb.dot(z));

    auto make_result = [&](SsnStatus status, int iters, const StopDecision& dec) {
        SubproblemResult res;
        res.x_candidate = x;
        res.x_feasible = dec.x_feasible;
        res.z_dual = z;
        res.dual_grad_norm = gnorm;
        res.inner_iters = iters;
        res.eps_certificate = dec.eps;
        res.delta_certificate = dec.delta;
        res.psi = psi;
        res.status = status;
        return res;
    };

    for (int t = 0;; ++t) {
        StopContext ctx{sub, z, x, grad, gnorm, psi, t};
        if (opts.observer) opts.observer(ctx);
        StopDecision dec = stop(ctx);
        if (dec.accept || gnorm <= grad_floor) {
            return make_result(SsnStatus::Satisfied, t, dec);
        }
        if (t >= opts.max_inner) {
            return make_result(SsnStatus::MaxInnerReached, t, StopDecision{});
        }

        const auto active = active_mask(sub, w);
        Eigen::VectorXd dir;
        bool have_newton = newton_direction(a, cols, active, nu, gnorm / (1.0 + sub.b.norm()),
                                            Eigen::VectorXd(-grad), opts, dir);
        if (have_newton && grad.dot(dir) >= 0.0) have_newton = false;

        // Armijo backtracking on Psi along dir, with a residual-decrease
        // acceptance of the full step: near the solution the Psi decrease
        // falls below rounding while the Newton step still contracts the
        // gradient superlinearly. Gradient-direction retry on failure.
        Eigen::VectorXd atd;
        auto line_search = [&](const Eigen::VectorXd& d) -> double {
            const double slope = grad.dot(d);
            atd = a.transpose() * d;
            const double ayb_z = ayb.dot(z);
            const double ayb_d = ayb.dot(d);
            double step = 1.0;
            for (int bt = 0; bt <= opts.max_backtracks; ++bt) {
                Eigen::VectorXd atz_trial = atz + step * atd;
                Eigen::VectorXd w_trial = prox_argument(sub, atz_trial);
                Eigen::VectorXd x_trial = prox_g(w_trial, nu, sub.reg);
                if (bt == 0 && (a * x_trial - sub.b).norm() <= 0.9 * gnorm) return step;
                double psi_trial = psi_value(sub, atz_trial, w_trial, x_trial, ayb_z + step * ayb_d);
                if (psi_trial <= psi + opts.armijo_sigma * step * slope) return step;
                step *= 0.5;
            }
            return -1.0;
        };

        double step = -1.0;
        if (have_newton) step = line_search(dir);
        if (step < 0.0) {
            dir = -grad;
            step = line_search(dir);
        }
        if (step < 0.0) {
            return make_result(SsnStatus::MaxInnerReached, t, StopDecision{});
        }

        z += step * dir;
        atz += step * atd;
        w = prox_argument(sub, atz);
        x = prox_g(w, nu, sub.reg);
        grad = a * x - sub.b;
        gnorm = grad.norm();
        psi = psi_value(sub, atz, w, x, ayb.dot(z));
    }
}

}  // namespace spinapg
