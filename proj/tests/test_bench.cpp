#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "spinapg/bench.hpp"

using namespace spinapg;
namespace fs = std::filesystem;

namespace {

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

ExperimentConfig tiny_config(const std::string& dir) {
    ExperimentConfig cfg;
    cfg.n_list = {6};
    cfg.rule = LambdaRule::Zero;
    cfg.methods = {"spinapg", "oifb"};
    cfg.upsilon_power = {{1.0, 3.1}};
    cfg.seeds = {1, 2};
    cfg.kkt_tol = 1e-6;
    cfg.max_outer = 2000;
    cfg.output_dir = dir;
    cfg.jobs = 2;
    return cfg;
}

QpInstance hand_instance() {
    QpInstance inst;
    inst.n = 2;  // u2 is a padding variable with its own curvature
    inst.m = 1;
    inst.seed = 0;
    inst.rule = LambdaRule::Zero;
    inst.lambda = 0.0;
    inst.p0 = Eigen::MatrixXd::Identity(2, 2);
    inst.q0.resize(2);
    inst.q0 << -1.0, 0.0;
    inst.a0.resize(1, 2);
    inst.a0.insert(0, 0) = 1.0;
    inst.a0.insert(0, 1) = 0.0;
    inst.a0.makeCompressed();
    inst.b = Eigen::VectorXd::Zero(1);
    return inst;
}

}  // namespace

TEST_CASE("config validation rejects unusable grids before any run") {
    ExperimentConfig cfg = tiny_config("unused");
    cfg.seeds.clear();
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);

    cfg = tiny_config("unused");
    cfg.methods = {"sgd"};
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);

    cfg = tiny_config("unused");
    cfg.n_list.clear();
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);

    cfg = tiny_config("unused");
    cfg.methods = {"ifista"};
    cfg.taus.clear();
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);

    CHECK_NOTHROW(validate(tiny_config("unused")));
}

TEST_CASE("run_table emits the documented files with a stable schema") {
    const std::string dir = "bench_test_out";
    fs::remove_all(dir);
    run_table(tiny_config(dir));

    auto summary = read_csv(fs::path(dir) / "summary.csv");
    REQUIRE(summary.size() >= 2);
    const std::vector<std::string> summary_header = {
        "method", "theta",    "alpha",   "upsilon", "power",     "tau",
        "c_coef", "n",        "m",       "lambda_rule", "kkt_tol", "max_outer",
        "seeds",  "runs",     "converged", "stalled", "kkt_avg",  "out_avg",
        "inn_avg", "time_total_avg", "time_proj_avg", "build"};
    CHECK(summary[0] == summary_header);

    auto runs = read_csv(fs::path(dir) / "runs.csv");
    REQUIRE(runs.size() == 5);  // header + 2 methods x 2 seeds
    const std::vector<std::string> runs_header = {
        "run_id", "method", "theta", "alpha", "upsilon", "power", "tau",
        "c_coef", "n",      "m",     "lambda_rule", "lambda", "seed", "kkt_tol",
        "max_outer", "status", "kkt", "out", "inn", "time_total", "time_proj", "build"};
    CHECK(runs[0] == runs_header);
    for (std::size_t i = 1; i < runs.size(); ++i) {
        CHECK(runs[i][15] == "converged");
        fs::path trace = fs::path(dir) / ("trace_" + runs[i][0] + ".csv");
        fs::path report = fs::path(dir) / ("report_" + runs[i][0] + ".json");
        CHECK(fs::exists(trace));
        CHECK(fs::exists(report));
    }

    // a rerun reproduces every non-time column exactly
    const std::string dir2 = "bench_test_out2";
    fs::remove_all(dir2);
    run_table(tiny_config(dir2));
    auto runs2 = read_csv(fs::path(dir2) / "runs.csv");
    REQUIRE(runs2.size() == runs.size());
    for (std::size_t i = 0; i < runs.size(); ++i) {
        for (std::size_t c = 0; c < runs[i].size(); ++c) {
            if (c == 19 || c == 20) continue;  // time_total, time_proj
            CHECK(runs[i][c] == runs2[i][c]);
        }
    }
    auto t1 = read_csv(fs::path(dir) / ("trace_" + runs[1][0] + ".csv"));
    auto t2 = read_csv(fs::path(dir2) / ("trace_" + runs[1][0] + ".csv"));
    REQUIRE(t1.size() == t2.size());
    for (std::size_t i = 0; i < t1.size(); ++i) {
        for (std::size_t c = 0; c + 1 < t1[i].size(); ++c) {  // last column is seconds
            CHECK(t1[i][c] == t2[i][c]);
        }
    }
    fs::remove_all(dir);
    fs::remove_all(dir2);
}

TEST_CASE("replay is byte-identical across invocations") {
    QpInstance inst = generate_instance(5, LambdaRule::TenQInf, 19);
    const std::string path = "replay_test.qpinst.json";
    save_instance(inst, path);

    RunParams params;
    params.method = "slb-aifb";
    params.upsilon = 1.0;
    params.power = 3.1;
    std::string first = replay(path, params);
    std::string second = replay(path, params);
    CHECK(first == second);
    CHECK(first.find("seconds") == std::string::npos);

    std::string timed = replay(path, params, true);
    CHECK(timed.find("seconds_total") != std::string::npos);
    std::remove(path.c_str());
}

TEST_CASE("replay solves the hand-checked instance in a few iterations") {
    // min 0.5 u1^2 - u1 + 0.5 u2^2  s.t.  u1 <= 0: optimum (0, 0), z = -1
    QpInstance inst = hand_instance();
    const std::string path = "replay_hand.qpinst.json";
    save_instance(inst, path);
    RunParams params;
    params.method = "spinapg";
    params.upsilon = 0.0;  // subproblems at the 1e-10 tolerance floor throughout
    params.power = 3.1;
    params.kkt_tol = 1e-10;
    std::string out = replay(path, params);
    CHECK(out.find("\"status\": \"converged\"") != std::string::npos);

    // parse outer count from the json text
    auto pos = out.find("\"outer\": ");
    REQUIRE(pos != std::string::npos);
    int outer = std::stoi(out.substr(pos + 9));
    CHECK(outer <= 5);
    std::remove(path.c_str());
}

TEST_CASE("replay propagates schema errors with the field path") {
    const std::string path = "replay_bad.qpinst.json";
    {
        std::ofstream f(path);
        f << "{\"format\":\"qpinst\",\"version\":1,\"m\":10,\"seed\":1}";
    }
    RunParams params;
    try {
        replay(path, params);
        FAIL_CHECK("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(std::string(e.what()).find("n") != std::string::npos);
    }
    std::remove(path.c_str());
}

TEST_CASE("float formatting round-trips") {
    for (double v : {1.0, 1.0 / 3.0, 442.0, 9.87e-7, 1e-300, 0.0}) {
        CHECK(std::stod(format_float(v)) == v);
    }
}

TEST_CASE("config files use the flag keys") {
    const std::string path = "bench_config_test.json";
    {
        std::ofstream f(path);
        f << R"({"n": [8, 12], "lambda": "ten-qinf", "methods": ["spinapg", "ifista"],
                 "upsilon_power": [[1.0, 2.1], [0.001, 3.1]], "tau": [0.5, 0.9],
                 "seeds": [3, 4], "kkt_tol": 1e-5, "max_outer": 500, "jobs": 2,
                 "out": "cfg_out"})";
    }
    ExperimentConfig cfg = config_from_json_file(path);
    CHECK(cfg.n_list == std::vector<int>{8, 12});
    CHECK(cfg.rule == LambdaRule::TenQInf);
    CHECK(cfg.methods == std::vector<std::string>{"spinapg", "ifista"});
    REQUIRE(cfg.upsilon_power.size() == 2);
    CHECK(cfg.upsilon_power[1].second == 3.1);
    CHECK(cfg.taus == std::vector<double>{0.5, 0.9});
    CHECK(cfg.seeds == std::vector<std::uint64_t>{3, 4});
    CHECK(cfg.kkt_tol == 1e-5);
    CHECK(cfg.max_outer == 500);
    CHECK(cfg.jobs == 2);
    CHECK(cfg.output_dir == "cfg_out");
    CHECK_NOTHROW(validate(cfg));
    std::remove(path.c_str());
}
