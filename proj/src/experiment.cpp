#include "chaoslab/experiment.hpp"

#include "chaoslab/combinatorics.hpp"
#include "chaoslab/convergence.hpp"
#include "chaoslab/field_io.hpp"
#include "chaoslab/partition.hpp"
#include "chaoslab/potential.hpp"
#include "chaoslab/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace chaoslab {

namespace builtin_data {
// generated from configs/*.json
struct Entry {
    const char* name;
    const char* text;
};
extern const Entry kEntries[];
extern const std::size_t kCount;
} // namespace builtin_data

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------------------------
// config reading

class Block {
public:
    Block(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object()) throw ConfigError(path_, "expected an object");
    }

    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }
    const json& raw(const std::string& key) const
    {
        if (!has(key)) throw ConfigError(at(key), "required key is missing");
        return j_.at(key);
    }

    double number(const std::string& key) const
    {
        const json& v = raw(key);
        if (!v.is_number()) throw ConfigError(at(key), "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw ConfigError(at(key), "must be finite");
        return d;
    }
    double number(const std::string& key, double def) const { return has(key) ? number(key) : def; }

    std::int64_t integer(const std::string& key) const
    {
        const json& v = raw(key);
        if (!v.is_number_integer()) throw ConfigError(at(key), "expected an integer");
        return v.get<std::int64_t>();
    }
    std::int64_t integer(const std::string& key, std::int64_t def) const { return has(key) ? integer(key) : def; }

    std::uint64_t seed(const std::string& key, std::uint64_t def) const
    {
        if (!has(key)) return def;
        const json& v = raw(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
            throw ConfigError(at(key), "expected a nonnegative integer");
        }
        return v.get<std::uint64_t>();
    }

    bool boolean(const std::string& key, bool def) const
    {
        if (!has(key)) return def;
        const json& v = raw(key);
        if (!v.is_boolean()) throw ConfigError(at(key), "expected true or false");
        return v.get<bool>();
    }

    std::string string(const std::string& key) const
    {
        const json& v = raw(key);
        if (!v.is_string()) throw ConfigError(at(key), "expected a string");
        return v.get<std::string>();
    }
    std::string string(const std::string& key, const std::string& def) const { return has(key) ? string(key) : def; }

    std::vector<double> numbers(const std::string& key) const
    {
        const json& v = raw(key);
        if (!v.is_array()) throw ConfigError(at(key), "expected an array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) throw ConfigError(at(key) + "[" + std::to_string(i) + "]", "expected a number");
            out.push_back(v[i].get<double>());
        }
        return out;
    }

    std::vector<int> integers(const std::string& key) const
    {
        const json& v = raw(key);
        if (v.is_number_integer()) return {v.get<int>()};
        if (!v.is_array()) throw ConfigError(at(key), "expected an integer or an array of integers");
        std::vector<int> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number_integer()) throw ConfigError(at(key) + "[" + std::to_string(i) + "]", "expected an integer");
            out.push_back(v[i].get<int>());
        }
        return out;
    }

    Block child(const std::string& key) const { return Block(raw(key), at(key)); }
    std::optional<Block> optional_child(const std::string& key) const
    {
        if (!has(key)) return std::nullopt;
        return child(key);
    }

    std::vector<Block> children(const std::string& key) const
    {
        const json& v = raw(key);
        if (!v.is_array()) throw ConfigError(at(key), "expected an array of objects");
        std::vector<Block> out;
        for (std::size_t i = 0; i < v.size(); ++i) out.emplace_back(v[i], at(key) + "[" + std::to_string(i) + "]");
        return out;
    }

    void allow(std::initializer_list<const char*> keys) const
    {
        std::set<std::string> ok(keys.begin(), keys.end());
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!ok.count(it.key())) throw ConfigError(at(it.key()), "unknown key");
        }
    }

    const std::string& path() const { return path_; }

private:
    const json& j_;
    std::string path_;
};

template <class F> auto guarded(const std::string& key, F&& f) -> decltype(f())
{
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const InvalidArgument& e) {
        throw ConfigError(key, e.what());
    }
}

void require(bool ok, const std::string& key, const std::string& message)
{
    if (!ok) throw ConfigError(key, message);
}

WaveVector wave(const Block& b, const std::string& key, int dim)
{
    const auto k = b.integers(key);
    require(static_cast<int>(k.size()) == dim, b.at(key), "expected " + std::to_string(dim) + " entries");
    WaveVector w{};
    for (int j = 0; j < dim; ++j) w[static_cast<std::size_t>(j)] = k[static_cast<std::size_t>(j)];
    return w;
}

Vec vec(const Block& b, const std::string& key, int dim)
{
    if (!b.has(key)) return {0.0, 0.0};
    const auto v = b.numbers(key);
    require(static_cast<int>(v.size()) == dim, b.at(key), "expected " + std::to_string(dim) + " entries");
    Vec out{0.0, 0.0};
    for (int j = 0; j < dim; ++j) out[static_cast<std::size_t>(j)] = v[static_cast<std::size_t>(j)];
    return out;
}

FourierVectorField parse_vector_field(const Block& b, int dim)
{
    if (b.has("stream_modes")) {
        require(dim == 2, b.at("stream_modes"), "stream functions need dim = 2");
        std::vector<FourierVectorField::StreamMode> modes;
        for (const auto& m : b.children("stream_modes")) {
            m.allow({"k", "cos", "sin"});
            modes.push_back({wave(m, "k", 2), m.number("cos", 0.0), m.number("sin", 0.0)});
        }
        return guarded(b.at("stream_modes"), [&] { return FourierVectorField::from_stream_function(modes); });
    }
    std::vector<VectorMode> modes;
    if (b.has("modes")) {
        for (const auto& m : b.children("modes")) {
            m.allow({"k", "cos", "sin"});
            modes.push_back({wave(m, "k", dim), vec(m, "sin", dim), vec(m, "cos", dim)});
        }
    }
    return guarded(b.path(), [&] { return FourierVectorField(dim, modes); });
}

struct KernelSpec {
    std::string kind = "zero";
    int dim = 2;
    double alpha = Kernel::kDefaultAlpha;
    double delta = 0.0;
    int grid_size = Kernel::kDefaultTableSize;
    FourierVectorField field;

    Kernel make(const std::optional<fs::path>& cache) const
    {
        if (kind == "zero") return Kernel::zero(dim);
        if (kind == "biot_savart") return Kernel::biot_savart(alpha, delta, grid_size, cache);
        return Kernel::smooth_fourier(field);
    }
};

KernelSpec parse_kernel(const Block& b)
{
    KernelSpec k;
    k.kind = b.string("kind");
    if (k.kind == "zero") {
        b.allow({"kind", "dim"});
        k.dim = static_cast<int>(b.integer("dim", 2));
        require(k.dim == 1 || k.dim == 2, b.at("dim"), "must be 1 or 2");
    } else if (k.kind == "biot_savart") {
        b.allow({"kind", "alpha", "delta", "grid_size"});
        k.dim = 2;
        k.alpha = b.number("alpha", Kernel::kDefaultAlpha);
        k.delta = b.number("delta", 0.0);
        k.grid_size = static_cast<int>(b.integer("grid_size", Kernel::kDefaultTableSize));
        require(k.alpha > 0.0, b.at("alpha"), "must be > 0");
        require(k.delta >= 0.0, b.at("delta"), "must be >= 0");
        require(k.grid_size >= 32 && (k.grid_size & (k.grid_size - 1)) == 0, b.at("grid_size"),
                "must be a power of two >= 32");
    } else if (k.kind == "smooth_fourier") {
        b.allow({"kind", "dim", "modes", "stream_modes", "normalize_sup"});
        k.dim = static_cast<int>(b.integer("dim", 2));
        require(k.dim == 1 || k.dim == 2, b.at("dim"), "must be 1 or 2");
        k.field = parse_vector_field(b, k.dim);
        require(!k.field.empty(), b.path(), "smooth_fourier kernel needs modes or stream_modes");
        if (b.has("normalize_sup")) {
            const double target = b.number("normalize_sup");
            require(target > 0.0, b.at("normalize_sup"), "must be > 0");
            k.field = k.field.scaled(target / k.field.sup_norm());
        }
        guarded(b.path(), [&] { return Kernel::smooth_fourier(k.field); });
    } else {
        throw ConfigError(b.at("kind"), "unknown kernel kind '" + k.kind + "' (zero, biot_savart, smooth_fourier)");
    }
    return k;
}

FourierDensity parse_density(const Block& b, int dim)
{
    const std::string kind = b.string("kind");
    if (kind == "uniform") {
        b.allow({"kind"});
        return FourierDensity::uniform(dim);
    }
    if (kind == "taylor_green") {
        b.allow({"kind", "amplitude"});
        require(dim == 2, b.at("kind"), "taylor_green needs dim = 2");
        const double a = b.number("amplitude", 0.5);
        return guarded(b.at("amplitude"), [&] { return FourierDensity::taylor_green(a); });
    }
    if (kind == "modes") {
        b.allow({"kind", "modes"});
        std::vector<ScalarMode> modes;
        for (const auto& m : b.children("modes")) {
            m.allow({"k", "cos", "sin"});
            modes.push_back({wave(m, "k", dim), m.number("cos", 0.0), m.number("sin", 0.0)});
        }
        return guarded(b.at("modes"), [&] { return FourierDensity(dim, modes); });
    }
    if (kind == "random_band_limited") {
        b.allow({"kind", "kmax", "seed", "min_density"});
        const int kmax = static_cast<int>(b.integer("kmax", 2));
        const auto seed = b.seed("seed", 1);
        const double lo = b.number("min_density", 0.5);
        return guarded(b.path(), [&] { return FourierDensity::random_band_limited(dim, kmax, seed, lo); });
    }
    throw ConfigError(b.at("kind"), "unknown density '" + kind + "' (uniform, taylor_green, modes, random_band_limited)");
}

EstimatorConfig parse_estimator(const Block& b, int* calibration, int* bootstrap)
{
    b.allow({"kind", "bins", "bandwidth", "pair_budget", "calibration_factor", "bootstrap"});
    EstimatorConfig e;
    e.kind = guarded(b.at("kind"), [&] { return estimator_kind_from_string(b.string("kind", "histogram")); });
    e.bins = static_cast<int>(b.integer("bins", 64));
    e.bandwidth = b.number("bandwidth", 0.0);
    e.pair_budget = static_cast<std::size_t>(b.integer("pair_budget", 10000000));
    require(e.bins >= 1, b.at("bins"), "must be >= 1");
    require(e.bandwidth >= 0.0, b.at("bandwidth"), "must be >= 0");
    if (calibration != nullptr) *calibration = static_cast<int>(b.integer("calibration_factor", 64));
    if (bootstrap != nullptr) *bootstrap = static_cast<int>(b.integer("bootstrap", 200));
    return e;
}

struct SimBlock {
    double sigma = 0.0, dt = 1e-3, T = 1.0;
    std::vector<int> N;
    int M = 1;
    std::vector<double> output_times;
    bool reject_flagged = false;
    double flag_threshold = 0.25;
};

SimBlock parse_simulation(const Block& b)
{
    b.allow({"sigma", "dt", "T", "N", "M", "output_times", "reject_flagged", "flag_threshold"});
    SimBlock s;
    s.sigma = b.number("sigma");
    s.dt = b.number("dt");
    s.T = b.number("T");
    s.N = b.integers("N");
    s.M = static_cast<int>(b.integer("M", 1));
    if (b.has("output_times")) s.output_times = b.numbers("output_times");
    s.reject_flagged = b.boolean("reject_flagged", false);
    s.flag_threshold = b.number("flag_threshold", 0.25);
    require(s.sigma >= 0.0, b.at("sigma"), "must be >= 0");
    require(s.dt > 0.0, b.at("dt"), "must be > 0");
    require(s.T > 0.0, b.at("T"), "must be > 0");
    require(s.dt <= s.T, b.at("dt"), "must not exceed T");
    require(!s.N.empty(), b.at("N"), "must not be empty");
    for (int n : s.N) require(n >= 1, b.at("N"), "particle counts must be >= 1");
    require(s.M >= 1, b.at("M"), "must be >= 1");
    for (double t : s.output_times) require(t >= 0.0 && t <= s.T, b.at("output_times"), "times must lie in [0, T]");
    require(s.flag_threshold > 0.0, b.at("flag_threshold"), "must be > 0");
    return s;
}

SimConfig make_sim(const SimBlock& s, const KernelSpec& k, const FourierVectorField& force, const FourierDensity& init,
                   const std::optional<fs::path>& cache)
{
    SimConfig c;
    c.kernel = k.make(cache);
    c.force = force;
    c.initial = init;
    c.sigma = s.sigma;
    c.dt = s.dt;
    c.final_time = s.T;
    c.particles = s.N.front();
    c.output_times = s.output_times;
    c.reject_flagged = s.reject_flagged;
    c.flag_threshold = s.flag_threshold;
    return c;
}

TestFunctionPair make_test_function(const Block& b)
{
    b.allow({"name", "eps", "target_gamma"});
    const std::string name = b.string("name");
    auto build = [&](double eps) {
        if (name == "cos-cos") return TestFunctionPair::cos_cos(eps);
        if (name == "mixed") return TestFunctionPair::mixed(eps);
        if (name == "shifted-cos") return TestFunctionPair::shifted_cos(eps);
        if (name == "centered-nonuniform") return TestFunctionPair::centered_nonuniform(eps);
        throw ConfigError(b.at("name"), "unknown test function '" + name +
                                            "' (cos-cos, mixed, shifted-cos, centered-nonuniform)");
    };
    require(!(b.has("eps") && b.has("target_gamma")), b.path(), "give either eps or target_gamma, not both");
    if (b.has("target_gamma")) {
        const double gamma = b.number("target_gamma");
        require(gamma > 0.0 && gamma < 1.0, b.at("target_gamma"), "must lie in (0, 1)");
        // the growth norm is positively homogeneous in eps
        const double g1 = growth_norm(build(1.0)).value;
        return build(std::sqrt(gamma / kDoubleSumConstant) / g1);
    }
    const double eps = b.number("eps", 1.0);
    return build(eps);
}

std::string join(std::span<const int> v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
    return s;
}

std::string utc_now()
{
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

std::string hex64(std::uint64_t v)
{
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

// ---------------------------------------------------------------------------------------------
// run bookkeeping

struct Assertion {
    std::string name;
    bool pass = false;
    std::string detail;
};

class Run {
public:
    Run(const ExperimentConfig& cfg, const RunOptions& opt, fs::path dir) : cfg_(cfg), opt_(opt), dir_(std::move(dir))
    {
        fs::create_directories(dir_);
        clear_previous();
        manifest_ = json::object();
        manifest_["toolkit_version"] = kToolkitVersion;
        manifest_["schema_version"] = kConfigSchemaVersion;
        manifest_["config_name"] = cfg.name;
        manifest_["config_source"] = cfg.source;
        manifest_["config_hash"] = hex64(config_hash(cfg.raw));
        manifest_["kind"] = to_string(cfg.kind);
        manifest_["seed"] = cfg.seed;
        manifest_["started"] = utc_now();
        manifest_["incomplete"] = true;
        manifest_["stages"] = json::array();
        manifest_["seeds"] = json::array();
        manifest_["outputs"] = json::array();
        manifest_["assertions"] = json::array();
        write_file("config.json", cfg.raw.dump(2) + "\n");
    }

    fs::path path(const std::string& name) const { return dir_ / name; }

    void add_output(const std::string& name)
    {
        if (std::find(outputs_.begin(), outputs_.end(), name) == outputs_.end()) outputs_.push_back(name);
        manifest_["outputs"] = outputs_;
        flush();
    }

    void write_file(const std::string& name, const std::string& body)
    {
        std::ofstream os(path(name), std::ios::binary | std::ios::trunc);
        if (!os) throw Error("cannot write " + path(name).string());
        os << body;
        os.close();
        add_output(name);
    }

    void write_json(const std::string& name, const json& j) { write_file(name, j.dump(2) + "\n"); }

    void add_seed(const std::string& what, std::uint64_t s)
    {
        manifest_["seeds"].push_back({{"use", what}, {"seed", s}});
    }

    template <class F> void stage(const std::string& name, F&& f)
    {
        log("stage " + name);
        const auto t0 = std::chrono::steady_clock::now();
        f();
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        manifest_["stages"].push_back({{"name", name}, {"seconds", secs}});
        flush();
    }

    void check(const std::string& name, bool pass, const std::string& detail)
    {
        assertions_.push_back({name, pass, detail});
        manifest_["assertions"].push_back({{"name", name}, {"pass", pass}, {"detail", detail}});
        log(std::string(pass ? "PASS " : "FAIL ") + name + ": " + detail);
        flush();
    }

    void log(const std::string& s) const
    {
        if (opt_.log) opt_.log(s);
    }

    RunResult finish(const std::string& error)
    {
        RunResult r;
        for (const auto& a : assertions_)
            if (!a.pass) r.failures.push_back(a.name + ": " + a.detail);
        if (!error.empty()) r.failures.push_back("run failed: " + error);
        r.exit_code = r.failures.empty() ? 0 : 1;
        manifest_["finished"] = utc_now();
        manifest_["incomplete"] = !error.empty();
        manifest_["exit_code"] = r.exit_code;
        if (!error.empty()) manifest_["error"] = error;
        flush();
        r.manifest = dir_ / "manifest.json";
        r.outputs = outputs_;
        return r;
    }

    const std::optional<fs::path>& cache() const { return cache_; }
    void set_cache(std::optional<fs::path> c) { cache_ = std::move(c); }

private:
    void flush()
    {
        const fs::path tmp = dir_ / "manifest.json.tmp";
        {
            std::ofstream os(tmp, std::ios::trunc);
            if (!os) throw Error("cannot write manifest in " + dir_.string());
            os << manifest_.dump(2) << "\n";
        }
        fs::rename(tmp, dir_ / "manifest.json");
    }

    /// removes the artifacts listed by an earlier manifest so the directory matches this run
    void clear_previous()
    {
        const fs::path old = dir_ / "manifest.json";
        if (!fs::exists(old)) return;
        try {
            std::ifstream is(old);
            const json j = json::parse(is);
            for (const auto& name : j.value("outputs", json::array())) {
                const fs::path p = dir_ / fs::path(name.get<std::string>()).filename();
                std::error_code ec;
                fs::remove(p, ec);
            }
        } catch (const std::exception&) {
            // unreadable manifest: leave the directory alone
        }
    }

    const ExperimentConfig& cfg_;
    const RunOptions& opt_;
    fs::path dir_;
    json manifest_;
    std::vector<std::string> outputs_;
    std::vector<Assertion> assertions_;
    std::optional<fs::path> cache_;
};

std::string fmt(double v)
{
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

// ---------------------------------------------------------------------------------------------
// per-kind validation and execution

struct Plan {
    std::function<void(Run&)> execute;
};

Plan plan_converge(const ExperimentConfig& cfg)
{
    const Block root(cfg.raw, "");
    const KernelSpec ks = parse_kernel(root.child("kernel"));
    const FourierVectorField force =
        root.has("force") ? parse_vector_field(root.child("force"), ks.dim) : FourierVectorField(ks.dim, {});
    const FourierDensity init = parse_density(root.child("initial"), ks.dim);
    const SimBlock sim = parse_simulation(root.child("simulation"));
    require(sim.N.size() >= 3, root.child("simulation").at("N"), "a convergence study needs at least 3 particle counts");
    int calibration = 64, bootstrap = 200;
    const EstimatorConfig est = root.has("estimator") ? parse_estimator(root.child("estimator"), &calibration, &bootstrap)
                                                      : EstimatorConfig{};
    int grid = 128;
    double pde_dt = sim.dt;
    if (auto p = root.optional_child("pde")) {
        p->allow({"grid", "dt"});
        grid = static_cast<int>(p->integer("grid", 128));
        pde_dt = p->number("dt", sim.dt);
    }
    std::optional<std::array<double, 2>> slope_range;
    bool monotone = false, ckp = true;
    if (auto a = root.optional_child("assertions")) {
        a->allow({"slope_range", "monotone", "ckp"});
        if (a->has("slope_range")) {
            const auto r = a->numbers("slope_range");
            require(r.size() == 2 && r[0] < r[1], a->at("slope_range"), "expected [low, high]");
            slope_range = std::array<double, 2>{r[0], r[1]};
        }
        monotone = a->boolean("monotone", false);
        ckp = a->boolean("ckp", true);
    }
    ConvergenceConfig probe;
    probe.particle_counts = sim.N;
    probe.realizations = sim.M;
    probe.pde_grid = grid;
    probe.pde_dt = pde_dt;
    probe.estimator = est;
    probe.calibration_factor = calibration;
    probe.bootstrap = bootstrap;
    probe.sim.kernel = Kernel::zero(ks.dim);
    probe.sim.force = FourierVectorField(ks.dim, {});
    probe.sim.initial = init;
    probe.sim.sigma = sim.sigma;
    probe.sim.dt = sim.dt;
    probe.sim.final_time = sim.T;
    guarded("", [&] {
        probe.validate();
        return 0;
    });
    if (ks.kind == "smooth_fourier") {
        require(2 * ks.field.max_wavenumber() < grid, "pde.grid", "grid does not resolve the kernel's modes");
    }

    return {[=](Run& run) {
        ConvergenceConfig cc = probe;
        cc.seed = cfg.seed;
        cc.sim = make_sim(sim, ks, force, init, run.cache());
        run.add_seed("study", cfg.seed);
        for (int n : sim.N) run.add_seed("ensemble N=" + std::to_string(n), derive_seed(cfg.seed, static_cast<std::uint64_t>(n)));
        ConvergenceStudy study;
        run.stage("convergence-study", [&] { study = run_convergence_study(cc, [&](const std::string& s) { run.log(s); }); });
        run.stage("write-artifacts", [&] {
            std::ostringstream csv;
            csv << "N,M,k,t,H_k,L1,ckp_rhs,estimator,bins,seed,L1_corrected,iid_L1,flagged_steps,rejected\n";
            for (const auto& p : study.points) {
                const auto& r = p.report;
                csv << r.particles << ',' << r.realizations << ',' << r.k << ',' << fmt(r.time) << ',' << fmt(r.entropy) << ','
                    << fmt(r.l1) << ',' << fmt(r.ckp_rhs) << ',' << r.estimator << ',' << r.bins << ',' << r.seed << ','
                    << fmt(p.l1_corrected) << ',' << fmt(p.iid_l1) << ',' << p.flagged_steps << ',' << p.rejected << '\n';
            }
            run.write_file("entropy_reports.csv", csv.str());
            json fit;
            fit["slope"] = study.fit.slope;
            fit["intercept"] = study.fit.intercept;
            fit["ci95"] = {study.fit.ci_low, study.fit.ci_high};
            fit["bootstrap_samples"] = study.fit.bootstrap_samples;
            fit["bias_floor"] = study.bias_floor;
            fit["monotone"] = study.monotone;
            fit["points"] = json::array();
            for (const auto& p : study.points) fit["points"].push_back({{"N", p.particles}, {"error", p.l1_corrected}});
            fit["reference"] = {{"mass", study.reference_diagnostics.mass},
                                {"inf", study.reference_diagnostics.min},
                                {"l2_energy", study.reference_diagnostics.l2_energy}};
            run.write_json("rate_fit.json", fit);
            write_field_binary(run.path("reference.bin"), study.reference);
            run.add_output("reference.bin");
        });
        std::ostringstream slope;
        slope << "slope " << study.fit.slope << " CI [" << study.fit.ci_low << ", " << study.fit.ci_high << "]";
        run.log(slope.str());
        if (slope_range) {
            run.check("slope-range", study.fit.slope >= (*slope_range)[0] && study.fit.slope <= (*slope_range)[1],
                      slope.str() + " vs [" + fmt((*slope_range)[0]) + ", " + fmt((*slope_range)[1]) + "]");
        }
        if (monotone) run.check("monotone-decrease", study.monotone, slope.str());
        if (ckp) {
            bool all = true;
            for (const auto& p : study.points) all = all && ckp_check(p.report);
            run.check("ckp", all, "L1 <= sqrt(2 k H_k) on every reported pair");
        }
    }};
}

Plan plan_simulate(const ExperimentConfig& cfg)
{
    const Block root(cfg.raw, "");
    const KernelSpec ks = parse_kernel(root.child("kernel"));
    const FourierVectorField force =
        root.has("force") ? parse_vector_field(root.child("force"), ks.dim) : FourierVectorField(ks.dim, {});
    const FourierDensity init = parse_density(root.child("initial"), ks.dim);
    const SimBlock sim = parse_simulation(root.child("simulation"));
    require(sim.N.size() == 1, root.child("simulation").at("N"), "simulate takes a single particle count");
    std::optional<std::uint64_t> max_flagged;
    if (auto a = root.optional_child("assertions")) {
        a->allow({"max_flagged_steps"});
        if (a->has("max_flagged_steps")) max_flagged = static_cast<std::uint64_t>(a->integer("max_flagged_steps"));
    }
    return {[=](Run& run) {
        const SimConfig sc = make_sim(sim, ks, force, init, run.cache());
        run.add_seed("ensemble", cfg.seed);
        Ensemble ens;
        run.stage("ensemble", [&] { ens = run_ensemble(sc, sim.M, cfg.seed); });
        run.stage("write-snapshots", [&] {
            for (std::size_t t = 0; t < ens.times.size(); ++t) {
                const std::string name = "snapshot_t" + std::to_string(t) + ".csv";
                write_snapshot_csv(run.path(name), ens, t);
                run.add_output(name);
            }
            json s;
            s["times"] = ens.times;
            s["realizations"] = ens.realizations();
            s["accepted"] = ens.accepted();
            s["flagged_steps"] = ens.flagged_steps;
            run.write_json("summary.json", s);
        });
        if (max_flagged) {
            run.check("flagged-steps", ens.flagged_steps <= *max_flagged,
                      std::to_string(ens.flagged_steps) + " flagged steps (limit " + std::to_string(*max_flagged) + ")");
        }
    }};
}

Plan plan_pde(const ExperimentConfig& cfg)
{
    const Block root(cfg.raw, "");
    const KernelSpec ks = parse_kernel(root.child("kernel"));
    const FourierVectorField force =
        root.has("force") ? parse_vector_field(root.child("force"), ks.dim) : FourierVectorField(ks.dim, {});
    const Block p = root.child("pde");
    p.allow({"grid", "dt", "sigma", "T", "output_times"});
    const int grid = static_cast<int>(p.integer("grid", 128));
    const double dt = p.number("dt");
    const double sigma = p.number("sigma");
    const double T = p.number("T");
    std::vector<double> times = p.has("output_times") ? p.numbers("output_times") : std::vector<double>{T};
    require(grid >= 8 && (grid & (grid - 1)) == 0, p.at("grid"), "must be a power of two >= 8");
    require(dt > 0.0, p.at("dt"), "must be > 0");
    require(sigma >= 0.0, p.at("sigma"), "must be >= 0");
    require(T >= 0.0, p.at("T"), "must be >= 0");
    for (double t : times) require(t >= 0.0 && t <= T, p.at("output_times"), "times must lie in [0, T]");

    const Block ib = root.child("initial");
    const bool vorticity = ib.string("kind") == "taylor_green_vorticity";
    double amplitude = 1.0;
    FourierDensity density = FourierDensity::uniform(ks.dim);
    if (vorticity) {
        ib.allow({"kind", "amplitude"});
        require(ks.dim == 2, ib.at("kind"), "vorticity needs dim = 2");
        amplitude = ib.number("amplitude", 1.0);
    } else {
        density = parse_density(ib, ks.dim);
    }
    double mass_tol = -1.0, min_density = -1e300;
    bool energy = false;
    if (auto a = root.optional_child("assertions")) {
        a->allow({"mass_tolerance", "min_density", "energy_nonincreasing"});
        mass_tol = a->number("mass_tolerance", -1.0);
        min_density = a->number("min_density", -1e300);
        energy = a->boolean("energy_nonincreasing", false);
    }
    return {[=](Run& run) {
        PdeConfig pc;
        pc.sigma = sigma;
        pc.dt = dt;
        pc.kernel = ks.make(run.cache());
        pc.force = force;
        const GridField init = vorticity ? taylor_green_vorticity(grid, amplitude) : density_on_grid(density, grid);
        PdeSolution sol;
        run.stage("solve", [&] { sol = solve(init, pc, times); });
        run.stage("write-fields", [&] {
            std::ostringstream csv;
            csv << "t,mass,min,l2_energy,max_speed\n";
            for (const auto& d : sol.diagnostics) {
                csv << fmt(d.time) << ',' << fmt(d.mass) << ',' << fmt(d.min) << ',' << fmt(d.l2_energy) << ','
                    << fmt(d.max_speed) << '\n';
            }
            run.write_file("pde_diagnostics.csv", csv.str());
            for (std::size_t i = 0; i < sol.snapshots.size(); ++i) {
                const std::string base = "field_t" + std::to_string(i);
                write_field_binary(run.path(base + ".bin"), sol.snapshots[i]);
                run.add_output(base + ".bin");
                write_field_csv(run.path(base + ".csv"), sol.snapshots[i]);
                run.add_output(base + ".csv");
            }
        });
        const double m0 = init.integral();
        if (mass_tol >= 0.0) {
            double worst = 0.0;
            for (const auto& d : sol.diagnostics) worst = std::max(worst, std::abs(d.mass - m0));
            run.check("mass-conservation", worst <= mass_tol, "max drift " + fmt(worst));
        }
        if (min_density > -1e300) {
            double lo = init.min();
            for (const auto& d : sol.diagnostics) lo = std::min(lo, d.min);
            run.check("positivity", lo >= min_density, "min " + fmt(lo));
        }
        if (energy) {
            bool ok = true;
            double prev = init.l2_squared();
            for (const auto& d : sol.diagnostics) {
                ok = ok && d.l2_energy <= prev + 1e-10;
                prev = d.l2_energy;
            }
            run.check("energy-nonincreasing", ok, "L2 energy across snapshots");
        }
    }};
}

Plan plan_combinatorics(const ExperimentConfig& cfg)
{
    const Block root(cfg.raw, "");
    const Block s = root.child("sweeps");
    s.allow({"binom_q_max", "compositions_q_max", "multinomial_q_max", "multinomial_p_max", "effective_q_max",
             "effective_p_max", "jset_N_max", "jset_k_max", "stirling_n_max"});
    const int binom_q = static_cast<int>(s.integer("binom_q_max", 64));
    const int comp_q = static_cast<int>(s.integer("compositions_q_max", 20));
    const int multi_q = static_cast<int>(s.integer("multinomial_q_max", 5));
    const int multi_p = static_cast<int>(s.integer("multinomial_p_max", 8));
    const int eff_q = static_cast<int>(s.integer("effective_q_max", 12));
    const int eff_p = static_cast<int>(s.integer("effective_p_max", 8));
    const int j_n = static_cast<int>(s.integer("jset_N_max", 8));
    const int j_k = static_cast<int>(s.integer("jset_k_max", 3));
    const int stirling_n = static_cast<int>(s.integer("stirling_n_max", 50));
    require(binom_q >= 1, s.at("binom_q_max"), "must be >= 1");
    require(comp_q >= 1 && comp_q <= 24, s.at("compositions_q_max"), "must lie in [1, 24]");
    require(multi_q >= 1 && multi_p >= 0, s.at("multinomial_q_max"), "must be >= 1");
    require(std::pow(multi_q, multi_p) <= 1e8, s.at("multinomial_p_max"), "q^p exceeds the enumeration budget 1e8");
    require(eff_q >= 1 && eff_p >= 1, s.at("effective_q_max"), "must be >= 1");
    require(std::pow(eff_q, std::min(eff_p, eff_q)) <= 1e9, s.at("effective_p_max"), "q^p exceeds the enumeration limit 1e9");
    require(j_n >= 1 && j_k >= 1, s.at("jset_N_max"), "must be >= 1");
    require(std::pow(j_n, 2 * j_k) <= 1e8, s.at("jset_k_max"), "N^(2k) exceeds the enumeration budget 1e8");
    require(stirling_n >= 1 && stirling_n <= 10000, s.at("stirling_n_max"), "must lie in [1, 10000]");

    return {[=](Run& run) {
        std::ostringstream lines;
        std::map<std::string, std::pair<int, int>> tally;  // family -> (checked, failed)
        auto record = [&](const std::string& family, bool pass, const json& j) {
            auto& t = tally[family];
            ++t.first;
            if (!pass) ++t.second;
            lines << j.dump() << '\n';
        };
        run.stage("stirling", [&] {
            double prev = 2.0;
            for (int n = 1; n <= stirling_n; ++n) {
                const double l = stirling_factor(n);
                const bool ok = l > 1.0 && l < 1.1 && l < prev;
                prev = l;
                record("stirling", ok, {{"quantity", "stirling"}, {"method", "closed-form"}, {"estimate", l},
                                        {"parameters", {{"n", n}}}, {"verdict", ok ? "pass" : "fail"}});
            }
        });
        run.stage("binomial", [&] {
            for (int q = 1; q <= binom_q; ++q)
                for (int p = 1; p <= q; ++p) {
                    const auto r = binom_bound_check(q, p);
                    record("binomial", r.pass, to_json(r));
                }
        });
        run.stage("compositions", [&] {
            for (int q = 1; q <= comp_q; ++q)
                for (int p = 1; p <= q; ++p) {
                    const auto c = count_compositions(q, p);
                    record("compositions", c.equal(),
                           {{"quantity", "compositions"}, {"method", "enumeration"}, {"exact", c.enumerated.str()},
                            {"formula", c.formula.str()}, {"parameters", {{"q", q}, {"p", p}}},
                            {"verdict", c.equal() ? "pass" : "fail"}});
                }
        });
        run.stage("multinomial-sum", [&] {
            for (int q = 1; q <= multi_q; ++q)
                for (int p = 0; p <= multi_p; ++p) {
                    const BigInt sum = multinomial_sum(q, p);
                    const BigInt expect = boost::multiprecision::pow(BigInt(q), static_cast<unsigned>(p));
                    record("multinomial-sum", sum == expect,
                           {{"quantity", "multinomial-sum"}, {"method", "enumeration"}, {"exact", sum.str()},
                            {"formula", expect.str()}, {"parameters", {{"q", q}, {"p", p}}},
                            {"verdict", sum == expect ? "pass" : "fail"}});
                }
        });
        run.stage("effective-set", [&] {
            for (int q = 1; q <= eff_q; ++q)
                for (int p = 1; p <= std::min(q, eff_p); ++p) {
                    const auto r = effective_set(q, p);
                    record("effective-set", r.pass,
                           {{"quantity", "effective-set"}, {"method", "enumeration"}, {"exact", r.exact.str()},
                            {"bounds", r.bounds}, {"parameters", {{"q", q}, {"p", p}}},
                            {"verdict", r.pass ? "pass" : "fail"}});
                }
        });
        run.stage("j-set", [&] {
            for (int N = 1; N <= j_n; ++N)
                for (int k = 1; k <= j_k; ++k)
                    for (int m = 0; m <= 2 * k; ++m)
                        for (int n = 0; m + n <= N && n <= k; ++n) {
                            if (!valid_split(N, k, m, n)) continue;
                            const auto r = j_set(N, k, m, n);
                            record("j-set", r.pass,
                                   {{"quantity", "j-set"}, {"method", "enumeration"}, {"exact", r.exact.str()},
                                    {"bound", r.bound}, {"parameters", {{"N", N}, {"k", k}, {"m", m}, {"n", n}}},
                                    {"verdict", r.pass ? "pass" : "fail"}});
                        }
        });
        run.write_file("bound_reports.jsonl", lines.str());
        json summary = json::object();
        for (const auto& [family, t] : tally) summary[family] = {{"checked", t.first}, {"failed", t.second}};
        run.write_json("summary.json", summary);
        for (const auto& [family, t] : tally) {
            run.check(family, t.second == 0, std::to_string(t.first) + " checked, " + std::to_string(t.second) + " failed");
        }
    }};
}

Plan plan_partition(const ExperimentConfig& cfg)
{
    const Block root(cfg.raw, "");
    struct Case {
        TestFunctionPair tf;
        PartitionVariant variant;
        std::vector<int> quad_n, mc_n;
        int nodes;
        std::uint64_t samples;
    };
    std::vector<Case> cases;
    for (const auto& c : root.children("cases")) {
        c.allow({"test_function", "variant", "quadrature_N", "monte_carlo_N", "nodes", "samples"});
        Case k;
        k.tf = make_test_function(c.child("test_function"));
        const std::string v = c.string("variant");
        if (v == "squared-sum") k.variant = PartitionVariant::SquaredSum;
        else if (v == "double-sum") k.variant = PartitionVariant::DoubleSum;
        else throw ConfigError(c.at("variant"), "expected squared-sum or double-sum");
        k.quad_n = c.has("quadrature_N") ? c.integers("quadrature_N") : std::vector<int>{};
        k.mc_n = c.has("monte_carlo_N") ? c.integers("monte_carlo_N") : std::vector<int>{};
        k.nodes = static_cast<int>(c.integer("nodes", 64));
        k.samples = static_cast<std::uint64_t>(c.integer("samples", 1000000));
        for (int n : k.quad_n) require(n >= 1 && n <= 4, c.at("quadrature_N"), "quadrature needs 1 <= N <= 4");
        for (int n : k.mc_n) require(n >= 1, c.at("monte_carlo_N"), "must be >= 1");
        require(k.nodes >= 4 && k.nodes <= 256, c.at("nodes"), "must lie in [4, 256]");
        require(k.samples >= 2, c.at("samples"), "must be >= 2");
        guarded(c.at("test_function"), [&] {
            k.tf.check_flags();
            return 0;
        });
        cases.push_back(std::move(k));
    }
    return {[=](Run& run) {
        std::ostringstream lines;
        int checked = 0, failed = 0;
        run.stage("partition", [&] {
            for (std::size_t ci = 0; ci < cases.size(); ++ci) {
                const auto& c = cases[ci];
                auto emit = [&](const BoundReport& r) {
                    ++checked;
                    if (!r.pass) ++failed;
                    lines << to_json(r).dump() << '\n';
                    std::ostringstream os;
                    os << c.tf.name << " " << to_string(c.variant) << " N=" << r.parameters["N"] << " "
                       << to_string(r.method) << ": " << r.upper() << " <= " << r.bound;
                    run.log(os.str());
                };
                for (int n : c.quad_n) {
                    PartitionOptions o{c.variant, PartitionMode::Quadrature, c.nodes, c.samples, cfg.seed};
                    emit(partition_function(c.tf, n, o));
                }
                for (int n : c.mc_n) {
                    const std::uint64_t s = derive_seed(cfg.seed, ci * 1000 + static_cast<std::uint64_t>(n));
                    run.add_seed("monte-carlo case " + std::to_string(ci) + " N=" + std::to_string(n), s);
                    PartitionOptions o{c.variant, PartitionMode::MonteCarlo, c.nodes, c.samples, s};
                    emit(partition_function(c.tf, n, o));
                }
            }
        });
        run.write_file("partition_reports.jsonl", lines.str());
        run.check("partition-bounds", failed == 0, std::to_string(checked) + " checked, " + std::to_string(failed) + " violations");
    }};
}

Plan plan_cancellation(const ExperimentConfig& cfg)
{
    const Block root(cfg.raw, "");
    const Block a = root.child("audit");
    a.allow({"N", "lengths", "nodes", "test_functions", "nonzero_threshold"});
    const int N = static_cast<int>(a.integer("N", 3));
    const std::vector<int> lengths = a.integers("lengths");
    const int nodes = static_cast<int>(a.integer("nodes", 128));
    const double threshold = a.number("nonzero_threshold", 1e-4);
    require(N >= 1 && N <= 4, a.at("N"), "quadrature needs 1 <= N <= 4");
    require(nodes >= 4 && nodes <= 256, a.at("nodes"), "must lie in [4, 256]");
    for (int l : lengths) require(l >= 2 && l % 2 == 0 && std::pow(N, 2 * l) <= 1e8, a.at("lengths"), "lengths must be even, >= 2 and small enough to sweep");
    std::vector<TestFunctionPair> tfs;
    for (const auto& t : a.children("test_functions")) {
        tfs.push_back(make_test_function(t));
        require(tfs.back().x_cancel && tfs.back().z_cancel, t.path(), "audit needs doubly cancelling test functions");
    }
    require(!tfs.empty(), a.at("test_functions"), "must not be empty");

    return {[=](Run& run) {
        std::ostringstream csv;
        csv << "test_function,length,I,J,m,n,in_j_set,value\n";
        int vanish_fail = 0, vacuous = 0, total = 0, reduced = 0;
        run.stage("sweep", [&] {
            for (const auto& tf : tfs)
                for (int len : lengths) {
                    for_each_tuple(N, len, [&](std::span<const int> I) {
                        if (!is_reduced(I, N)) return;
                        ++reduced;
                        double best_inside = 0.0;
                        const std::vector<int> Ic(I.begin(), I.end());
                        for_each_tuple(N, len, [&](std::span<const int> J) {
                            const auto r = verify_cancellation(Ic, J, tf, N, nodes);
                            ++total;
                            if (!r.pass) ++vanish_fail;
                            if (r.in_j_set) best_inside = std::max(best_inside, std::abs(r.value));
                            csv << tf.name << ',' << len << ',' << join(Ic) << ',' << join(J) << ',' << r.m << ',' << r.n << ','
                                << (r.in_j_set ? 1 : 0) << ',' << fmt(r.value) << '\n';
                        });
                        if (best_inside <= threshold) {
                            ++vacuous;
                            run.log("no nonzero companion for I = (" + join(Ic) + ") with " + tf.name);
                        }
                    });
                }
        });
        run.write_file("cancellation.csv", csv.str());
        run.write_json("summary.json", {{"integrals", total}, {"reduced_indices", reduced},
                                        {"nonvanishing_outside", vanish_fail}, {"vacuous_indices", vacuous}});
        run.check("vanishing-outside-j-set", vanish_fail == 0,
                  std::to_string(total) + " integrals, " + std::to_string(vanish_fail) + " above 1e-8 outside J_{m,n}");
        run.check("non-vacuity", vacuous == 0,
                  std::to_string(reduced) + " reduced indices, " + std::to_string(vacuous) + " without a nonzero companion");
    }};
}

Plan plan_change_of_law(const ExperimentConfig& cfg)
{
    const Block root(cfg.raw, "");
    const Block c = root.child("change_of_law");
    c.allow({"instances", "space_size", "eta_range", "N_max", "phi_scale"});
    const int instances = static_cast<int>(c.integer("instances", 10000));
    const int size = static_cast<int>(c.integer("space_size", 8));
    std::vector<double> eta = c.has("eta_range") ? c.numbers("eta_range") : std::vector<double>{0.05, 5.0};
    const int n_max = static_cast<int>(c.integer("N_max", 10));
    const double scale = c.number("phi_scale", 1.0);
    require(instances >= 1, c.at("instances"), "must be >= 1");
    require(size >= 1, c.at("space_size"), "must be >= 1");
    require(eta.size() == 2 && eta[0] > 0.0 && eta[0] <= eta[1], c.at("eta_range"), "expected [low, high] with 0 < low <= high");
    require(n_max >= 1, c.at("N_max"), "must be >= 1");
    require(scale > 0.0, c.at("phi_scale"), "must be > 0");
    return {[=](Run& run) {
        int passed = 0;
        double worst = -1e300;
        run.add_seed("instances", cfg.seed);
        run.stage("instances", [&] {
            for (int i = 0; i < instances; ++i) {
                RngStream rng(CounterRng(cfg.seed), static_cast<std::uint64_t>(i));
                std::vector<double> rho(static_cast<std::size_t>(size)), bar(rho.size()), phi(rho.size());
                double s1 = 0.0, s2 = 0.0;
                for (std::size_t k = 0; k < rho.size(); ++k) {
                    rho[k] = -std::log(rng.uniform());
                    bar[k] = -std::log(rng.uniform());
                    phi[k] = scale * (2.0 * rng.uniform() - 1.0);
                    s1 += rho[k];
                    s2 += bar[k];
                }
                for (std::size_t k = 0; k < rho.size(); ++k) {
                    rho[k] /= s1;
                    bar[k] /= s2;
                }
                // every fourth instance compares a density with itself
                if (i % 4 == 0) rho = bar;
                const double e = eta[0] * std::pow(eta[1] / eta[0], rng.uniform());
                const int N = 1 + static_cast<int>(rng.uniform() * n_max) % n_max;
                const auto r = change_of_law_check(rho, bar, phi, e, N);
                if (r.pass) ++passed;
                worst = std::max(worst, r.lhs - r.rhs);
            }
        });
        run.write_json("change_of_law.json", {{"instances", instances}, {"passed", passed}, {"max_lhs_minus_rhs", worst}});
        run.check("change-of-law", passed == instances, std::to_string(passed) + "/" + std::to_string(instances) + " pass");
    }};
}

Plan plan_potential(const ExperimentConfig& cfg)
{
    const Block root(cfg.raw, "");
    const Block p = root.child("potential");
    p.allow({"grid", "alpha", "exclusion_radius", "tolerance"});
    const int grid = static_cast<int>(p.integer("grid", 256));
    const double alpha = p.number("alpha", Kernel::kDefaultAlpha);
    const double radius = p.number("exclusion_radius", 0.05);
    const double tol = p.number("tolerance", 1e-2);
    require(grid >= 32 && (grid & (grid - 1)) == 0, p.at("grid"), "must be a power of two >= 32");
    require(alpha > 0.0, p.at("alpha"), "must be > 0");
    require(radius > 0.0 && radius < 0.5, p.at("exclusion_radius"), "must lie in (0, 0.5)");
    require(tol > 0.0, p.at("tolerance"), "must be > 0");
    (void)cfg;
    return {[=](Run& run) {
        PotentialMatrix v;
        DivergenceResidual r;
        run.stage("build", [&] { v = build_biot_savart_potential(grid, alpha); });
        run.stage("residual", [&] { r = divergence_residual(v, radius); });
        run.write_json("potential.json", {{"grid", grid}, {"alpha", alpha}, {"norm_inf", v.norm_inf},
                                          {"max_residual", r.max_residual}, {"kernel_norm", r.kernel_norm},
                                          {"relative_residual", r.relative()}, {"tested_cells", r.tested}});
        run.check("div-v-residual", r.relative() < tol, "relative residual " + fmt(r.relative()) + " vs " + fmt(tol));
        run.check("v-bounded", std::isfinite(v.norm_inf), "||V||_inf = " + fmt(v.norm_inf));
    }};
}

Plan make_plan(const ExperimentConfig& cfg)
{
    switch (cfg.kind) {
    case ExperimentKind::Converge: return plan_converge(cfg);
    case ExperimentKind::Simulate: return plan_simulate(cfg);
    case ExperimentKind::Pde: return plan_pde(cfg);
    case ExperimentKind::Combinatorics: return plan_combinatorics(cfg);
    case ExperimentKind::Partition: return plan_partition(cfg);
    case ExperimentKind::VerifyCancellation: return plan_cancellation(cfg);
    case ExperimentKind::ChangeOfLaw: return plan_change_of_law(cfg);
    case ExperimentKind::Potential: return plan_potential(cfg);
    }
    throw ConfigError("kind", "unsupported kind");
}

const std::map<std::string, ExperimentKind>& kind_names()
{
    static const std::map<std::string, ExperimentKind> m = {
        {"converge", ExperimentKind::Converge},
        {"simulate", ExperimentKind::Simulate},
        {"pde", ExperimentKind::Pde},
        {"combinatorics", ExperimentKind::Combinatorics},
        {"partition", ExperimentKind::Partition},
        {"verify-cancellation", ExperimentKind::VerifyCancellation},
        {"change-of-law", ExperimentKind::ChangeOfLaw},
        {"potential", ExperimentKind::Potential},
    };
    return m;
}

const std::map<ExperimentKind, std::vector<const char*>>& kind_blocks()
{
    static const std::map<ExperimentKind, std::vector<const char*>> m = {
        {ExperimentKind::Converge, {"kernel", "force", "initial", "simulation", "pde", "estimator", "assertions"}},
        {ExperimentKind::Simulate, {"kernel", "force", "initial", "simulation", "assertions"}},
        {ExperimentKind::Pde, {"kernel", "force", "initial", "pde", "assertions"}},
        {ExperimentKind::Combinatorics, {"sweeps"}},
        {ExperimentKind::Partition, {"cases"}},
        {ExperimentKind::VerifyCancellation, {"audit"}},
        {ExperimentKind::ChangeOfLaw, {"change_of_law"}},
        {ExperimentKind::Potential, {"potential"}},
    };
    return m;
}

} // namespace

std::string to_string(ExperimentKind kind)
{
    for (const auto& [name, k] : kind_names())
        if (k == kind) return name;
    return "unknown";
}

std::uint64_t config_hash(const nlohmann::json& doc)
{
    // nlohmann::json objects keep keys sorted, so dump() is canonical
    const std::string s = doc.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

ExperimentConfig parse_config(const nlohmann::json& doc, const std::string& source)
{
    const Block root(doc, "");
    ExperimentConfig cfg;
    cfg.source = source;
    cfg.raw = doc;
    const auto version = root.integer("schema_version");
    require(version == kConfigSchemaVersion, "schema_version",
            "unsupported version " + std::to_string(version) + " (expected " + std::to_string(kConfigSchemaVersion) + ")");
    const std::string kind = root.string("kind");
    const auto it = kind_names().find(kind);
    if (it == kind_names().end()) throw ConfigError("kind", "unknown experiment kind '" + kind + "'");
    cfg.kind = it->second;
    cfg.name = root.string("name");
    cfg.description = root.string("description", "");
    cfg.seed = root.seed("seed", 1);
    cfg.output_dir = root.string("output_dir", "");

    std::set<std::string> allowed = {"schema_version", "kind", "name", "description", "seed", "output_dir"};
    for (const char* b : kind_blocks().at(cfg.kind)) allowed.insert(b);
    for (auto i = doc.begin(); i != doc.end(); ++i) {
        if (!allowed.count(i.key())) throw ConfigError(i.key(), "unknown key for kind '" + kind + "'");
    }
    make_plan(cfg);  // full validation, no compute
    return cfg;
}

std::vector<BuiltinExperiment> list_builtin_experiments()
{
    std::vector<BuiltinExperiment> out;
    for (std::size_t i = 0; i < builtin_data::kCount; ++i) {
        const auto& e = builtin_data::kEntries[i];
        const json j = json::parse(e.text);
        out.push_back({e.name, j.value("description", std::string()), e.text});
    }
    return out;
}

ExperimentConfig load_config(const std::string& path_or_name)
{
    std::string text;
    std::string source = path_or_name;
    if (fs::exists(path_or_name)) {
        std::ifstream is(path_or_name);
        if (!is) throw ConfigError("", "cannot read " + path_or_name);
        std::ostringstream ss;
        ss << is.rdbuf();
        text = ss.str();
    } else {
        for (const auto& b : list_builtin_experiments())
            if (b.name == path_or_name) {
                text = b.text;
                source = "builtin:" + b.name;
            }
        if (text.empty()) throw ConfigError("", "no config file or builtin experiment named '" + path_or_name + "'");
    }
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("", source + ": malformed JSON: " + e.what());
    }
    try {
        return parse_config(doc, source);
    } catch (const ConfigError& e) {
        throw ConfigError(e.key(), source + ": " + e.what());
    }
}

RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& options)
{
    ExperimentConfig effective = cfg;
    if (options.seed_override) {
        effective.seed = *options.seed_override;
        effective.raw["seed"] = *options.seed_override;
    }
    Plan plan = make_plan(effective);
    fs::path dir = options.output_dir ? *options.output_dir / effective.name
                                      : (effective.output_dir.empty() ? fs::path("chaos-lab-out") / effective.name
                                                                      : effective.output_dir);
    Run run(effective, options, dir);
    std::optional<fs::path> cache = options.cache_dir;
    if (!cache) {
        if (const char* env = std::getenv(kCacheDirEnv); env != nullptr && *env != '\0') cache = fs::path(env);
    }
    if (cache) fs::create_directories(*cache);
    run.set_cache(cache);
    std::string error;
    try {
        plan.execute(run);
    } catch (const std::exception& e) {
        error = e.what();
        run.log(std::string("error: ") + e.what());
    }
    return run.finish(error);
}

} // namespace chaoslab
