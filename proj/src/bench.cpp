#include "spinapg/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "spinapg/version.hpp"

namespace spinapg {

namespace {

using nlohmann::json;

const std::vector<std::string> kMethods = {"spinapg", "slb-aifb", "oifb", "ifista"};

bool known_method(const std::string& m) {
    return std::find(kMethods.begin(), kMethods.end(), m) != kMethods.end();
}

std::string trim_number(double v) {
    std::string s = format_float(v);
    return s;
}

}  // namespace

std::string format_float(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

ThetaSchedule make_theta(const RunParams& p) {
    if (p.theta == "nesterov") return ThetaSchedule::nesterov();
    if (p.theta == "cd") return ThetaSchedule::chambolle_dossal(p.alpha);
    throw std::invalid_argument("unknown theta schedule: " + p.theta);
}

SolverReport execute_run(const AugmentedQp& aug, const RunParams& p) {
    if (!known_method(p.method)) throw std::invalid_argument("unknown method: " + p.method);
    CompositeProblem problem = make_problem(aug);
    SubproblemFactory factory = make_subproblem_factory(aug);
    ToleranceSchedule tol{p.upsilon, p.power, 1e-10};
    SolverOptions opts;
    opts.kkt_tol = p.kkt_tol;
    opts.max_outer = p.max_outer;

    if (p.method == "spinapg") {
        return run_spinapg(problem, factory, tol, make_theta(p), opts);
    }
    BaselineConfig cfg;
    cfg.tol = tol;
    cfg.tau = p.tau;
    cfg.c_coef = p.c_coef;
    cfg.schedule = make_theta(p);
    if (p.method == "slb-aifb") cfg.method = BaselineMethod::SlbAifb;
    if (p.method == "oifb") cfg.method = BaselineMethod::OiFb;
    if (p.method == "ifista") cfg.method = BaselineMethod::IFista;
    DomProjector projector(aug);
    return run_baseline(problem, factory, cfg, opts,
                        [&projector](const Eigen::VectorXd& v) { return projector(v); });
}

void validate(const ExperimentConfig& config) {
    if (config.n_list.empty()) throw std::invalid_argument("config: n list is empty");
    for (int n : config.n_list) {
        if (n < 2) throw std::invalid_argument("config: n must be >= 2");
    }
    if (config.methods.empty()) throw std::invalid_argument("config: methods list is empty");
    for (const auto& m : config.methods) {
        if (!known_method(m)) throw std::invalid_argument("config: unknown method " + m);
    }
    if (config.seeds.empty()) throw std::invalid_argument("config: seeds list is empty");
    if (config.upsilon_power.empty()) {
        throw std::invalid_argument("config: upsilon/power grid is empty");
    }
    if (config.taus.empty() &&
        std::find(config.methods.begin(), config.methods.end(), "ifista") != config.methods.end()) {
        throw std::invalid_argument("config: tau grid is empty but ifista is requested");
    }
    if (config.kkt_tol <= 0.0) throw std::invalid_argument("config: kkt_tol must be > 0");
    if (config.max_outer < 1) throw std::invalid_argument("config: max_outer must be >= 1");
    if (config.jobs < 1) throw std::invalid_argument("config: jobs must be >= 1");
    if (config.theta != "nesterov" && config.theta != "cd") {
        throw std::invalid_argument("config: theta must be nesterov or cd");
    }
}

ExperimentConfig config_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw std::invalid_argument("config file is not valid JSON");
    ExperimentConfig cfg;
    if (j.contains("n")) {
        cfg.n_list.clear();
        if (j["n"].is_array()) {
            for (const auto& e : j["n"]) cfg.n_list.push_back(e.get<int>());
        } else {
            cfg.n_list.push_back(j["n"].get<int>());
        }
    }
    if (j.contains("lambda")) cfg.rule = lambda_rule_from_string(j["lambda"].get<std::string>());
    if (j.contains("methods")) cfg.methods = j["methods"].get<std::vector<std::string>>();
    if (j.contains("method")) cfg.methods = {j["method"].get<std::string>()};
    if (j.contains("upsilon_power")) {
        cfg.upsilon_power.clear();
        for (const auto& e : j["upsilon_power"]) {
            cfg.upsilon_power.emplace_back(e[0].get<double>(), e[1].get<double>());
        }
    } else if (j.contains("upsilon") || j.contains("power")) {
        double u = j.value("upsilon", 1.0);
        double p = j.value("power", 3.1);
        cfg.upsilon_power = {{u, p}};
    }
    if (j.contains("tau")) {
        cfg.taus.clear();
        if (j["tau"].is_array()) {
            for (const auto& e : j["tau"]) cfg.taus.push_back(e.get<double>());
        } else {
            cfg.taus.push_back(j["tau"].get<double>());
        }
    }
    if (j.contains("c_coef")) cfg.c_coef = j["c_coef"].get<double>();
    if (j.contains("theta")) cfg.theta = j["theta"].get<std::string>();
    if (j.contains("alpha")) cfg.alpha = j["alpha"].get<double>();
    if (j.contains("seeds")) cfg.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    if (j.contains("kkt_tol")) cfg.kkt_tol = j["kkt_tol"].get<double>();
    if (j.contains("max_outer")) cfg.max_outer = j["max_outer"].get<long>();
    if (j.contains("out")) cfg.output_dir = j["out"].get<std::string>();
    if (j.contains("jobs")) cfg.jobs = j["jobs"].get<int>();
    return cfg;
}

std::string report_to_json(const SolverReport& report, bool include_times) {
    json j;
    j["status"] = to_string(report.status);
    j["outer"] = report.total_outer;
    j["inner"] = report.total_inner;
    j["jc_nonneg_exact"] = report.jc_nonneg_exact;
    j["max_feasible_residual"] = report.max_feasible_residual;
    j["warnings"] = report.warnings;
    json rows = json::array();
    for (const auto& r : report.rows) {
        json row;
        row["k"] = r.k;
        row["obj"] = r.objective;
        row["kkt"] = r.kkt;
        row["feas"] = r.feas;
        row["inner"] = r.inner;
        row["theta"] = r.theta;
        row["tol"] = r.tol;
        row["step_norm"] = r.step_norm;
        if (include_times) row["seconds"] = r.seconds;
        rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
    j["final_x"] =
        std::vector<double>(report.final_x.data(), report.final_x.data() + report.final_x.size());
    j["final_z"] =
        std::vector<double>(report.final_z.data(), report.final_z.data() + report.final_z.size());
    if (include_times) {
        j["seconds_total"] = report.seconds_total;
        j["seconds_projection"] = report.seconds_projection;
    }
    j["build"] = kBuildTag;
    return j.dump(2);
}

std::string replay(const std::string& instance_path, const RunParams& params, bool include_times) {
    QpInstance inst = load_instance(instance_path);
    AugmentedQp aug = augment(inst);
    SolverReport report = execute_run(aug, params);
    return report_to_json(report, include_times);
}

namespace {

struct RunSpec {
    RunParams params;
    int n = 0;
    LambdaRule rule = LambdaRule::Zero;
    std::uint64_t seed = 0;
    std::string run_id;
};

std::string make_run_id(const RunSpec& s) {
    std::ostringstream os;
    os << s.params.method << "_n" << s.n << "_"
       << (s.rule == LambdaRule::Zero ? "zero" : "tqi") << "_";
    if (s.params.method == "ifista") {
        os << "tau" << s.params.tau;
    } else {
        os << "u" << s.params.upsilon << "_p" << s.params.power;
    }
    os << "_s" << s.seed;
    return os.str();
}

struct RunResult {
    SolverReport report;
    double lambda = 0.0;
    int m = 0;
    bool failed = false;
    std::string error;
};

void write_trace(const std::string& path, const SolverReport& rep) {
    std::ofstream out(path);
    out << "k,obj,gap,kkt,feas,step_scaled,inner,theta,tol,seconds\n";
    double best = std::numeric_limits<double>::infinity();
    for (const auto& r : rep.rows) best = std::min(best, r.objective);
    for (const auto& r : rep.rows) {
        out << r.k << ',' << format_float(r.objective) << ','
            << format_float(r.objective - best) << ',' << format_float(r.kkt) << ','
            << format_float(r.feas) << ','
            << format_float(static_cast<double>(r.k) * r.step_norm) << ',' << r.inner << ','
            << format_float(r.theta) << ',' << format_float(r.tol) << ','
            << format_float(r.seconds) << "\n";
    }
}

}  // namespace

void run_table(const ExperimentConfig& config) {
    validate(config);
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(config.output_dir, ec);
    {
        std::ofstream probe(fs::path(config.output_dir) / ".write_probe");
        if (!probe) throw std::runtime_error("output directory is not writable: " + config.output_dir);
    }
    fs::remove(fs::path(config.output_dir) / ".write_probe", ec);

    std::vector<RunSpec> specs;
    for (int n : config.n_list) {
        for (const auto& method : config.methods) {
            std::vector<RunParams> variants;
            if (method == "ifista") {
                for (double tau : config.taus) {
                    RunParams p;
                    p.method = method;
                    p.tau = tau;
                    p.c_coef = config.c_coef;
                    p.theta = config.theta;
                    p.alpha = config.alpha;
                    p.kkt_tol = config.kkt_tol;
                    p.max_outer = config.max_outer;
                    variants.push_back(p);
                }
            } else {
                for (const auto& [u, pw] : config.upsilon_power) {
                    RunParams p;
                    p.method = method;
                    p.upsilon = u;
                    p.power = pw;
                    p.theta = config.theta;
                    p.alpha = config.alpha;
                    p.kkt_tol = config.kkt_tol;
                    p.max_outer = config.max_outer;
                    variants.push_back(p);
                }
            }
            for (const auto& p : variants) {
                for (std::uint64_t seed : config.seeds) {
                    RunSpec s;
                    s.params = p;
                    s.n = n;
                    s.rule = config.rule;
                    s.seed = seed;
                    s.run_id = make_run_id(s);
                    specs.push_back(std::move(s));
                }
            }
        }
    }

    std::vector<RunResult> results(specs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= specs.size()) return;
            const RunSpec& s = specs[i];
            try {
                QpInstance inst = generate_instance(s.n, s.rule, s.seed);
                AugmentedQp aug = augment(inst);
                results[i].report = execute_run(aug, s.params);
                results[i].lambda = inst.lambda;
                results[i].m = inst.m;
            } catch (const std::exception& e) {
                results[i].failed = true;
                results[i].error = e.what();
            }
        }
    };
    const int workers = std::max(1, std::min<int>(config.jobs, static_cast<int>(specs.size())));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    // per-seed rows
    std::ofstream runs(fs::path(config.output_dir) / "runs.csv");
    runs << "run_id,method,theta,alpha,upsilon,power,tau,c_coef,n,m,lambda_rule,lambda,seed,"
            "kkt_tol,max_outer,status,kkt,out,inn,time_total,time_proj,build\n";
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const RunSpec& s = specs[i];
        const RunResult& r = results[i];
        const SolverReport& rep = r.report;
        const double kkt = rep.rows.empty() ? std::numeric_limits<double>::quiet_NaN()
                                            : rep.rows.back().kkt;
        runs << s.run_id << ',' << s.params.method << ',' << s.params.theta << ','
             << trim_number(s.params.alpha) << ',' << trim_number(s.params.upsilon) << ','
             << trim_number(s.params.power) << ',' << trim_number(s.params.tau) << ','
             << trim_number(s.params.c_coef) << ',' << s.n << ',' << r.m << ','
             << to_string(s.rule) << ',' << trim_number(r.lambda) << ',' << s.seed << ','
             << trim_number(s.params.kkt_tol) << ',' << s.params.max_outer << ','
             << (r.failed ? "error" : to_string(rep.status)) << ',' << trim_number(kkt) << ','
             << rep.total_outer << ',' << rep.total_inner << ','
             << trim_number(rep.seconds_total) << ',' << trim_number(rep.seconds_projection)
             << ',' << kBuildTag << "\n";
        if (!r.failed) {
            write_trace((fs::path(config.output_dir) / ("trace_" + s.run_id + ".csv")).string(),
                        rep);
            std::ofstream rj(fs::path(config.output_dir) / ("report_" + s.run_id + ".json"));
            rj << report_to_json(rep, true) << "\n";
        }
    }

    // seed-averaged rows, grouped by (method, params, n)
    struct Agg {
        int runs = 0, converged = 0, stalled = 0;
        double kkt = 0.0, out = 0.0, inn = 0.0, time_total = 0.0, time_proj = 0.0;
        std::vector<std::uint64_t> seeds;
        const RunSpec* spec = nullptr;
        int m = 0;
    };
    std::map<std::string, Agg> groups;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const RunSpec& s = specs[i];
        const RunResult& r = results[i];
        if (r.failed) continue;
        std::string key = s.params.method + "|" + trim_number(s.params.upsilon) + "|" +
                          trim_number(s.params.power) + "|" + trim_number(s.params.tau) + "|" +
                          std::to_string(s.n);
        Agg& g = groups[key];
        g.spec = &s;
        g.m = r.m;
        g.runs += 1;
        if (r.report.status == SolveStatus::Converged) g.converged += 1;
        if (r.report.status == SolveStatus::SubsolverStalled) g.stalled += 1;
        g.kkt += r.report.rows.empty() ? 0.0 : r.report.rows.back().kkt;
        g.out += static_cast<double>(r.report.total_outer);
        g.inn += static_cast<double>(r.report.total_inner);
        g.time_total += r.report.seconds_total;
        g.time_proj += r.report.seconds_projection;
        g.seeds.push_back(s.seed);
    }
    std::ofstream summary(fs::path(config.output_dir) / "summary.csv");
    summary << "method,theta,alpha,upsilon,power,tau,c_coef,n,m,lambda_rule,kkt_tol,max_outer,"
               "seeds,runs,converged,stalled,kkt_avg,out_avg,inn_avg,time_total_avg,"
               "time_proj_avg,build\n";
    for (const auto& [key, g] : groups) {
        const RunSpec& s = *g.spec;
        const double cnt = static_cast<double>(g.runs);
        std::ostringstream seeds;
        for (std::size_t i = 0; i < g.seeds.size(); ++i) {
            if (i) seeds << ';';
            seeds << g.seeds[i];
        }
        summary << s.params.method << ',' << s.params.theta << ',' << trim_number(s.params.alpha)
                << ',' << trim_number(s.params.upsilon) << ',' << trim_number(s.params.power)
                << ',' << trim_number(s.params.tau) << ',' << trim_number(s.params.c_coef) << ','
                << s.n << ',' << g.m << ',' << to_string(s.rule) << ','
                << trim_number(s.params.kkt_tol) << ',' << s.params.max_outer << ','
                << seeds.str() << ',' << g.runs << ',' << g.converged << ',' << g.stalled << ','
                << trim_number(g.kkt / cnt) << ',' << trim_number(g.out / cnt) << ','
                << trim_number(g.inn / cnt) << ',' << trim_number(g.time_total / cnt) << ','
                << trim_number(g.time_proj / cnt) << ',' << kBuildTag << "\n";
    }

    // any failed run aborts with its diagnostic after everything is written
    for (std::size_t i = 0; i < specs.size(); ++i) {
        if (results[i].failed) {
            throw std::runtime_error("run " + specs[i].run_id + " failed: " + results[i].error);
        }
    }
}

}  // namespace spinapg
