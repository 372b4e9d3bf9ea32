#include "spinapg/qp_model.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "json.hpp"
#include "spinapg/counter_rng.hpp"

namespace spinapg {

namespace {

using nlohmann::json;

// Sparse matrix with ~15% nonzeros drawn N(0,1); pattern and value streams
// use disjoint counter ranges so they stay independent.
Eigen::SparseMatrix<double> sparse_normal(const CounterRng& rng, int rows, int cols,
                                          std::uint64_t counter_base, double density) {
    const std::uint64_t total = static_cast<std::uint64_t>(rows) * static_cast<std::uint64_t>(cols);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(static_cast<double>(total) * density * 1.2) + 16);
    for (int j = 0; j < cols; ++j) {
        for (int i = 0; i < rows; ++i) {
            const std::uint64_t idx =
                static_cast<std::uint64_t>(j) * static_cast<std::uint64_t>(rows) +
                static_cast<std::uint64_t>(i);
            if (rng.uniform(counter_base + idx) < density) {
                trips.emplace_back(i, j, rng.normal(counter_base + total + idx));
            }
        }
    }
    Eigen::SparseMatrix<double> out(rows, cols);
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
}

}  // namespace

const char* to_string(LambdaRule r) {
    return r == LambdaRule::Zero ? "zero" : "ten-qinf";
}

LambdaRule lambda_rule_from_string(const std::string& s) {
    if (s == "zero") return LambdaRule::Zero;
    if (s == "ten-qinf") return LambdaRule::TenQInf;
    throw std::invalid_argument("unknown lambda rule: " + s);
}

QpInstance generate_instance(int n, LambdaRule rule, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("generate_instance: n must be >= 2");
    const int m = 10 * n;
    const double density = 0.15;
    CounterRng rng(seed);

    // Disjoint counter ranges per tensor (each sparse block consumes 2x its
    // entry count: pattern plus value stream).
    const std::uint64_t nn = static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n);
    const std::uint64_t mn = static_cast<std::uint64_t>(m) * static_cast<std::uint64_t>(n);
    std::uint64_t base = 0;
    Eigen::SparseMatrix<double> m_mat = sparse_normal(rng, n, n, base, density);
    base += 4 * nn;
    Eigen::SparseMatrix<double> a0 = sparse_normal(rng, m, n, base, density);
    base += 4 * mn;

    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
        if (rng.uniform(base + static_cast<std::uint64_t>(i)) < density) {
            v[i] = rng.normal(base + static_cast<std::uint64_t>(n + i));
        }
    }
    base += 4 * static_cast<std::uint64_t>(n);
    Eigen::VectorXd delta(m);
    for (int i = 0; i < m; ++i) delta[i] = rng.uniform(base + static_cast<std::uint64_t>(i));
    base += static_cast<std::uint64_t>(m);
    Eigen::VectorXd q0(n);
    for (int i = 0; i < n; ++i) q0[i] = rng.normal(base + static_cast<std::uint64_t>(i));

    QpInstance inst;
    inst.n = n;
    inst.m = m;
    inst.seed = seed;
    inst.rule = rule;
    inst.p0 = Eigen::MatrixXd(m_mat) * Eigen::MatrixXd(m_mat).transpose();
    inst.p0.diagonal().array() += 0.01;
    inst.a0 = std::move(a0);
    inst.q0 = std::move(q0);
    inst.b = inst.a0 * v + delta;  // delta >= 0 keeps u = v feasible
    inst.lambda = rule == LambdaRule::Zero ? 0.0 : 10.0 * inst.q0.cwiseAbs().maxCoeff();
    return inst;
}

double estimate_lip(const Eigen::MatrixXd& p0) {
    if (p0.rows() != p0.cols()) throw std::invalid_argument("estimate_lip: matrix must be square");
    const double scale = p0.cwiseAbs().maxCoeff();
    if ((p0 - p0.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, scale)) {
        throw std::invalid_argument("estimate_lip: matrix must be symmetric");
    }
    const int n = static_cast<int>(p0.rows());
    Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
    // deterministic start with all spectral components present
    for (int i = 0; i < n; ++i) v[i] += 1e-3 * static_cast<double>(i % 7);
    v.normalize();
    double lam = 0.0;
    for (int it = 0; it < 10000; ++it) {
        Eigen::VectorXd pv = p0 * v;
        double next = v.dot(pv);
        double norm = pv.norm();
        if (norm == 0.0) return 0.0;  // zero matrix
        v = pv / norm;
        if (it > 0 && std::abs(next - lam) <= 1e-10 * std::max(1.0, std::abs(next))) {
            lam = next;
            break;
        }
        lam = next;
    }
    return lam * (1.0 + 1e-8);
}

double AugmentedQp::f_value(const Eigen::VectorXd& x) const {
    const auto u = x.head(n);
    return 0.5 * u.dot(p0 * u) + q0.dot(u);
}

Eigen::VectorXd AugmentedQp::f_gradient(const Eigen::VectorXd& x) const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(dim());
    g.head(n) = p0 * x.head(n) + q0;
    return g;
}

AugmentedQp augment(const QpInstance& inst) {
    AugmentedQp aug{.n = inst.n,
                    .m = inst.m,
                    .lambda = inst.lambda,
                    .lip = estimate_lip(inst.p0),
                    .p0 = inst.p0,
                    .q0 = inst.q0,
                    .a0 = inst.a0,
                    .b = inst.b,
                    .a = nullptr,
                    .reg = BlockRegularizer::l1_prefix(inst.lambda, inst.n, inst.n + inst.m)};
    auto a = std::make_shared<Eigen::SparseMatrix<double>>(inst.m, inst.n + inst.m);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(inst.a0.nonZeros()) + static_cast<std::size_t>(inst.m));
    for (int j = 0; j < inst.a0.outerSize(); ++j) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(inst.a0, j); it; ++it) {
            trips.emplace_back(static_cast<int>(it.row()), j, it.value());
        }
    }
    for (int i = 0; i < inst.m; ++i) trips.emplace_back(i, inst.n + i, 1.0);
    a->setFromTriplets(trips.begin(), trips.end());
    aug.a = std::move(a);
    return aug;
}

double kkt_residual(const AugmentedQp& aug, const Eigen::VectorXd& x, const Eigen::VectorXd& z) {
    if (x.size() != aug.dim() || z.size() != aug.m) {
        throw std::invalid_argument("kkt_residual: dimension mismatch");
    }
    const double lip = aug.lip;
    Eigen::VectorXd grad = aug.f_gradient(x);
    Eigen::VectorXd arg = x - (grad - aug.a->transpose() * z) / lip;
    double stat = (x - prox_g(arg, 1.0 / lip, aug.reg)).norm() / (1.0 + x.norm());
    double feas = ((*aug.a) * x - aug.b).norm() / (1.0 + aug.b.norm());
    return std::max(stat, feas);
}

DomProjector::DomProjector(const AugmentedQp& aug)
    : aug_(&aug), z_warm_(Eigen::VectorXd::Zero(aug.m)) {}

Eigen::VectorXd DomProjector::operator()(const Eigen::VectorXd& x) {
    if (x.size() != aug_->dim()) throw std::invalid_argument("projection: dimension mismatch");
    DualSubproblem sub{aug_->a,
                       aug_->b,
                       Eigen::VectorXd::Zero(aug_->dim()),
                       x,
                       1.0,
                       1.0,
                       BlockRegularizer::l1_prefix(0.0, aug_->n, aug_->dim())};
    const double target = 1e-12 * (1.0 + aug_->b.norm());
    StoppingPredicate stop = [&](const StopContext& ctx) {
        // the prox construction satisfies stationarity exactly, so the
        // relative KKT residual of the projection reduces to the constraint part
        return StopDecision{ctx.dual_grad_norm <= target, std::nullopt, 0.0, std::nullopt};
    };
    SsnOptions opts;
    opts.zero_grad_rel_tol = 1e-16;
    SubproblemResult res = ssn_solve(sub, z_warm_, stop, opts);
    if (res.status != SsnStatus::Satisfied) {
        throw ProjectionError("projection subproblem not solved to 1e-12");
    }
    z_warm_ = res.z_dual;
    inner_ += res.inner_iters;
    return res.x_candidate;
}

Eigen::VectorXd project_dom_p(const AugmentedQp& aug, const Eigen::VectorXd& x) {
    DomProjector proj(aug);
    return proj(x);
}

CompositeProblem make_problem(const AugmentedQp& aug) {
    CompositeProblem p;
    p.lip = aug.lip;
    p.dimension = aug.dim();
    p.smooth_eval = [&aug](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
        grad = aug.f_gradient(x);
        return aug.f_value(x);
    };
    p.reg_objective = [&aug](const Eigen::VectorXd& x) { return aug.reg.l1_value(x); };
    p.kkt_residual = [&aug](const Eigen::VectorXd& x, const Eigen::VectorXd& z) {
        return kkt_residual(aug, x, z);
    };
    return p;
}

SubproblemFactory make_subproblem_factory(const AugmentedQp& aug) {
    return [&aug](const Eigen::VectorXd& y, int) {
        return DualSubproblem{aug.a, aug.b, aug.f_gradient(y), y, aug.lip, 1.0, aug.reg};
    };
}

double u_sparsity(const AugmentedQp& aug, const Eigen::VectorXd& x) {
    const auto u = x.head(aug.n);
    const double thresh = 1e-8 * std::max(1.0, u.cwiseAbs().maxCoeff());
    int zeros = 0;
    for (int i = 0; i < aug.n; ++i) {
        if (std::abs(u[i]) <= thresh) ++zeros;
    }
    return static_cast<double>(zeros) / static_cast<double>(aug.n);
}

namespace {

const json& require_field(const json& j, const std::string& path, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw SchemaError("missing field: " + path + key);
    return *it;
}

double require_number(const json& j, const std::string& path, const char* key) {
    const json& f = require_field(j, path, key);
    if (!f.is_number()) throw SchemaError("field is not a number: " + path + key);
    return f.get<double>();
}

Eigen::VectorXd require_vector(const json& j, const std::string& path, const char* key,
                               Eigen::Index expect) {
    const json& f = require_field(j, path, key);
    if (!f.is_array()) throw SchemaError("field is not an array: " + path + key);
    if (static_cast<Eigen::Index>(f.size()) != expect) {
        throw SchemaError("field " + path + key + " has length " + std::to_string(f.size()) +
                          ", expected " + std::to_string(expect));
    }
    Eigen::VectorXd out(expect);
    for (Eigen::Index i = 0; i < expect; ++i) {
        const json& e = f[static_cast<std::size_t>(i)];
        if (!e.is_number())
            throw SchemaError("field " + path + key + "[" + std::to_string(i) + "] is not a number");
        out[i] = e.get<double>();
    }
    return out;
}

}  // namespace

std::string instance_to_json(const QpInstance& inst) {
    json j;
    j["format"] = "qpinst";
    j["version"] = 1;
    j["n"] = inst.n;
    j["m"] = inst.m;
    j["seed"] = inst.seed;
    j["lambda_rule"] = to_string(inst.rule);
    j["lambda"] = inst.lambda;
    std::vector<double> p0(static_cast<std::size_t>(inst.n) * static_cast<std::size_t>(inst.n));
    for (int i = 0; i < inst.n; ++i) {
        for (int jj = 0; jj < inst.n; ++jj) {
            p0[static_cast<std::size_t>(i) * static_cast<std::size_t>(inst.n) +
               static_cast<std::size_t>(jj)] = inst.p0(i, jj);
        }
    }
    j["p0"] = p0;
    json trips = json::array();
    for (int jj = 0; jj < inst.a0.outerSize(); ++jj) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(inst.a0, jj); it; ++it) {
            trips.push_back({it.row(), jj, it.value()});
        }
    }
    j["a0"] = {{"rows", inst.m}, {"cols", inst.n}, {"triplets", std::move(trips)}};
    j["q0"] = std::vector<double>(inst.q0.data(), inst.q0.data() + inst.q0.size());
    j["b"] = std::vector<double>(inst.b.data(), inst.b.data() + inst.b.size());
    return j.dump();
}

void save_instance(const QpInstance& inst, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << instance_to_json(inst) << "\n";
}

QpInstance instance_from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw SchemaError("not valid JSON");
    if (!j.is_object()) throw SchemaError("top-level value is not an object");
    const std::string root;

    const json& fmt = require_field(j, root, "format");
    if (!fmt.is_string() || fmt.get<std::string>() != "qpinst") {
        throw SchemaError("field format must be \"qpinst\"");
    }
    QpInstance inst;
    double n_val = require_number(j, root, "n");
    double m_val = require_number(j, root, "m");
    if (n_val < 2 || n_val != std::floor(n_val)) throw SchemaError("field n must be an integer >= 2");
    if (m_val < 1 || m_val != std::floor(m_val)) throw SchemaError("field m must be an integer >= 1");
    inst.n = static_cast<int>(n_val);
    inst.m = static_cast<int>(m_val);
    inst.seed = static_cast<std::uint64_t>(require_number(j, root, "seed"));
    const json& rule = require_field(j, root, "lambda_rule");
    if (!rule.is_string()) throw SchemaError("field lambda_rule is not a string");
    inst.rule = lambda_rule_from_string(rule.get<std::string>());
    inst.lambda = require_number(j, root, "lambda");
    if (inst.lambda < 0.0) throw SchemaError("field lambda must be >= 0");

    Eigen::VectorXd p0_flat = require_vector(
        j, root, "p0", static_cast<Eigen::Index>(inst.n) * static_cast<Eigen::Index>(inst.n));
    inst.p0.resize(inst.n, inst.n);
    for (int i = 0; i < inst.n; ++i) {
        for (int jj = 0; jj < inst.n; ++jj) {
            inst.p0(i, jj) = p0_flat[static_cast<Eigen::Index>(i) * inst.n + jj];
        }
    }

    const json& a0 = require_field(j, root, "a0");
    if (!a0.is_object()) throw SchemaError("field a0 is not an object");
    if (static_cast<int>(require_number(a0, "a0.", "rows")) != inst.m) {
        throw SchemaError("field a0.rows does not match m");
    }
    if (static_cast<int>(require_number(a0, "a0.", "cols")) != inst.n) {
        throw SchemaError("field a0.cols does not match n");
    }
    const json& trips = require_field(a0, "a0.", "triplets");
    if (!trips.is_array()) throw SchemaError("field a0.triplets is not an array");
    std::vector<Eigen::Triplet<double>> list;
    list.reserve(trips.size());
    for (std::size_t t = 0; t < trips.size(); ++t) {
        const json& e = trips[t];
        const std::string where = "a0.triplets[" + std::to_string(t) + "]";
        if (!e.is_array() || e.size() != 3) throw SchemaError("field " + where + " must be [i,j,v]");
        if (!e[0].is_number() || !e[1].is_number() || !e[2].is_number()) {
            throw SchemaError("field " + where + " entries must be numbers");
        }
        int r = e[0].get<int>();
        int c = e[1].get<int>();
        if (r < 0 || r >= inst.m) throw SchemaError("field " + where + "[0] row out of range");
        if (c < 0 || c >= inst.n) throw SchemaError("field " + where + "[1] col out of range");
        list.emplace_back(r, c, e[2].get<double>());
    }
    inst.a0.resize(inst.m, inst.n);
    inst.a0.setFromTriplets(list.begin(), list.end());

    inst.q0 = require_vector(j, root, "q0", inst.n);
    inst.b = require_vector(j, root, "b", inst.m);
    return inst;
}

QpInstance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open instance file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return instance_from_json(buf.str());
}

}  // namespace spinapg
