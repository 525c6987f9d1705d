#include "chaoslab/experiment.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace chaoslab;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("chaoslab-exp-" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

json tiny_simulation()
{
    return json::parse(R"({
        "schema_version": 1, "kind": "simulate", "name": "tiny-sim", "seed": 4,
        "kernel": {"kind": "biot_savart", "grid_size": 64},
        "initial": {"kind": "taylor_green", "amplitude": 0.5},
        "simulation": {"sigma": 0.1, "dt": 0.005, "T": 0.01, "N": 8, "M": 3, "output_times": [0.0, 0.01]}
    })");
}

std::string config_error_key(const json& doc)
{
    try {
        parse_config(doc, "test");
    } catch (const ConfigError& e) {
        return e.key();
    }
    return "<no error>";
}

json read_json(const fs::path& p)
{
    std::ifstream is(p);
    return json::parse(is);
}

std::set<std::string> files_in(const fs::path& dir)
{
    std::set<std::string> out;
    for (const auto& e : fs::directory_iterator(dir)) out.insert(e.path().filename().string());
    return out;
}

int run_cli(const std::string& args)
{
    const std::string cmd = std::string(CHAOS_LAB_BINARY) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_SUITE("experiment")
{
    TEST_CASE("every builtin experiment parses")
    {
        const auto builtins = list_builtin_experiments();
        CHECK(builtins.size() >= 8);
        for (const auto& b : builtins) {
            INFO(b.name);
            const ExperimentConfig cfg = load_config(b.name);
            CHECK(cfg.name == b.name);
            CHECK(cfg.source == "builtin:" + b.name);
            CHECK_FALSE(b.description.empty());
        }
        const ExperimentConfig file = load_config(std::string(CHAOS_LAB_CONFIG_DIR) + "/potential-check.json");
        CHECK(file.kind == ExperimentKind::Potential);
    }

    TEST_CASE("config hash is independent of key order")
    {
        const json a = json::parse(R"({"b": 1, "a": {"y": 2, "x": [1, 2]}})");
        const json b = json::parse(R"({"a": {"x": [1, 2], "y": 2}, "b": 1})");
        const json c = json::parse(R"({"a": {"x": [2, 1], "y": 2}, "b": 1})");
        CHECK(config_hash(a) == config_hash(b));
        CHECK(config_hash(a) != config_hash(c));
    }

    TEST_CASE("invalid configs name the offending key")
    {
        json doc = tiny_simulation();
        CHECK(config_error_key(doc) == "<no error>");

        json d = doc;
        d.erase("schema_version");
        CHECK(config_error_key(d) == "schema_version");
        d = doc;
        d["schema_version"] = 2;
        CHECK(config_error_key(d) == "schema_version");
        d = doc;
        d["kernel"]["kind"] = "coulomb";
        CHECK(config_error_key(d) == "kernel.kind");
        d = doc;
        d["simulation"]["N"] = 0;
        CHECK(config_error_key(d) == "simulation.N");
        d = doc;
        d["simulation"]["dt"] = "fast";
        CHECK(config_error_key(d) == "simulation.dt");
        d = doc;
        d["simulation"]["typo"] = 1;
        CHECK(config_error_key(d) == "simulation.typo");
        d = doc;
        d["initial"]["amplitude"] = 3.0;
        CHECK(config_error_key(d) == "initial.amplitude");
        d = doc;
        d["partition"] = json::object();
        CHECK(config_error_key(d) == "partition");
        d = doc;
        d["kind"] = "dance";
        CHECK(config_error_key(d) == "kind");

        json p = json::parse(R"({"schema_version": 1, "kind": "partition", "name": "p",
            "cases": [{"test_function": {"name": "mixed", "eps": 0.1}, "variant": "double-sum", "quadrature_N": [9]}]})");
        CHECK(config_error_key(p) == "cases[0].quadrature_N");
        p["cases"][0]["quadrature_N"] = json::array({2});
        p["cases"][0]["test_function"]["name"] = "nope";
        CHECK(config_error_key(p) == "cases[0].test_function.name");

        CHECK_THROWS_AS(load_config("no-such-builtin"), ConfigError);
    }

    TEST_CASE("a run writes a manifest that lists exactly its artifacts")
    {
        const fs::path out = scratch("run");
        const ExperimentConfig cfg = parse_config(tiny_simulation(), "test");
        RunOptions opt;
        opt.output_dir = out;
        const RunResult r = run_experiment(cfg, opt);
        CHECK(r.exit_code == 0);
        const fs::path dir = out / "tiny-sim";
        const json m = read_json(dir / "manifest.json");
        CHECK(m["incomplete"] == false);
        CHECK(m["exit_code"] == 0);
        CHECK(m["seed"] == 4);
        CHECK(m["kind"] == "simulate");
        CHECK(m["toolkit_version"] == kToolkitVersion);
        CHECK_FALSE(m["stages"].empty());
        std::set<std::string> listed;
        for (const auto& f : m["outputs"]) listed.insert(f.get<std::string>());
        listed.insert("manifest.json");
        CHECK(listed == files_in(dir));
        CHECK(listed.count("snapshot_t1.csv") == 1);

        std::ifstream snap(dir / "snapshot_t1.csv");
        std::string header;
        std::getline(snap, header);
        CHECK(header == "realization,particle,x1,x2");
        int rows = 0;
        for (std::string line; std::getline(snap, line);) ++rows;
        CHECK(rows == 24);

        // the hash recorded is the hash of the stored config
        std::ostringstream hex;
        hex << std::hex;
        hex.width(16);
        hex.fill('0');
        hex << config_hash(read_json(dir / "config.json"));
        CHECK(m["config_hash"] == hex.str());

        // a seed override changes the seed and the recorded config, and stale files are removed
        json fewer = tiny_simulation();
        fewer["simulation"]["output_times"] = json::array({0.01});
        RunOptions opt2 = opt;
        opt2.seed_override = 99;
        const RunResult r2 = run_experiment(parse_config(fewer, "test"), opt2);
        CHECK(r2.exit_code == 0);
        const json m2 = read_json(dir / "manifest.json");
        CHECK(m2["seed"] == 99);
        CHECK(read_json(dir / "config.json")["seed"] == 99);
        CHECK_FALSE(fs::exists(dir / "snapshot_t1.csv"));
        CHECK(fs::exists(dir / "snapshot_t0.csv"));
        fs::remove_all(out);
    }

    TEST_CASE("failing assertions give exit code 1")
    {
        const fs::path out = scratch("fail");
        const json doc = json::parse(R"({"schema_version": 1, "kind": "potential", "name": "strict-potential",
            "potential": {"grid": 32, "tolerance": 1e-9}})");
        RunOptions opt;
        opt.output_dir = out;
        const RunResult r = run_experiment(parse_config(doc, "test"), opt);
        CHECK(r.exit_code == 1);
        CHECK_FALSE(r.failures.empty());
        const json m = read_json(out / "strict-potential" / "manifest.json");
        CHECK(m["incomplete"] == false);
        CHECK(m["assertions"][0]["pass"] == false);
        fs::remove_all(out);
    }

    TEST_CASE("small convergence study end to end")
    {
        const fs::path out = scratch("converge");
        const json doc = json::parse(R"({
            "schema_version": 1, "kind": "converge", "name": "mini-converge", "seed": 2,
            "kernel": {"kind": "smooth_fourier", "stream_modes": [{"k": [1, 0], "cos": 1.0}], "normalize_sup": 1.0},
            "initial": {"kind": "taylor_green", "amplitude": 0.5},
            "simulation": {"sigma": 0.1, "dt": 0.01, "T": 0.05, "N": [16, 32, 64], "M": 20},
            "pde": {"grid": 16, "dt": 0.01},
            "estimator": {"kind": "histogram", "bins": 8, "calibration_factor": 4, "bootstrap": 20},
            "assertions": {"ckp": true}
        })");
        RunOptions opt;
        opt.output_dir = out;
        const RunResult r = run_experiment(parse_config(doc, "test"), opt);
        CHECK(r.exit_code == 0);
        const fs::path dir = out / "mini-converge";
        const json fit = read_json(dir / "rate_fit.json");
        CHECK(fit["points"].size() == 3);
        CHECK(fit["ci95"][0].get<double>() <= fit["slope"].get<double>());
        std::ifstream csv(dir / "entropy_reports.csv");
        std::string header;
        std::getline(csv, header);
        CHECK(header.rfind("N,M,k,t,H_k,L1,ckp_rhs,estimator,bins,seed", 0) == 0);
        CHECK(fs::exists(dir / "reference.bin"));
        fs::remove_all(out);
    }

    TEST_CASE("cache directory comes from the environment")
    {
        const fs::path out = scratch("cache-out");
        const fs::path cache = scratch("cache-dir");
        setenv(kCacheDirEnv, cache.c_str(), 1);
        const json doc = json::parse(R"({"schema_version": 1, "kind": "pde", "name": "cached-pde",
            "kernel": {"kind": "biot_savart", "grid_size": 128},
            "initial": {"kind": "taylor_green", "amplitude": 0.5},
            "pde": {"grid": 16, "dt": 0.01, "sigma": 0.1, "T": 0.02}})");
        RunOptions opt;
        opt.output_dir = out;
        const RunResult r = run_experiment(parse_config(doc, "test"), opt);
        unsetenv(kCacheDirEnv);
        CHECK(r.exit_code == 0);
        CHECK_FALSE(files_in(cache).empty());
        fs::remove_all(out);
        fs::remove_all(cache);
    }

    TEST_CASE("command line exit codes")
    {
        const fs::path out = scratch("cli");
        CHECK(run_cli("list") == 0);
        CHECK(run_cli("--version") == 0);
        CHECK(run_cli("") == 2);
        CHECK(run_cli("frobnicate") == 2);
        CHECK(run_cli("run no-such-config") == 2);
        {
            std::ofstream bad(out / "bad.json");
            bad << R"({"schema_version": 1, "kind": "potential", "name": "x", "potential": {"grid": 33}})";
        }
        CHECK(run_cli("run " + (out / "bad.json").string()) == 2);
        {
            std::ofstream broken(out / "broken.json");
            broken << "{ not json";
        }
        CHECK(run_cli("run " + (out / "broken.json").string()) == 2);
        {
            std::ofstream ok(out / "ok.json");
            ok << tiny_simulation().dump();
        }
        CHECK(run_cli("--threads 2 run " + (out / "ok.json").string() + " -q --seed-override 11 --output-dir " + out.string()) == 0);
        CHECK(read_json(out / "tiny-sim" / "manifest.json")["seed"] == 11);
        fs::remove_all(out);
    }
}
