#include "chaoslab/experiment.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <chrono>
#include <iomanip>
#include <iostream>

namespace {

void print_list()
{
    const auto builtins = chaoslab::list_builtin_experiments();
    std::size_t width = 0;
    for (const auto& b : builtins) width = std::max(width, b.name.size());
    for (const auto& b : builtins) {
        std::cout << std::left << std::setw(static_cast<int>(width) + 2) << b.name << b.description << "\n";
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"chaos-lab: propagation-of-chaos experiments"};
    app.set_version_flag("--version", std::string(chaoslab::kToolkitVersion));
    app.require_subcommand(1);

    int threads = 0;
    app.add_option("--threads", threads, "OpenMP threads (0 keeps the runtime default)")->check(CLI::NonNegativeNumber);

    auto* run = app.add_subcommand("run", "run an experiment from a config file or builtin name");
    std::string config;
    std::uint64_t seed = 0;
    std::string output_dir;
    bool quiet = false;
    run->add_option("config", config, "path to a JSON config, or a builtin name")->required();
    auto* seed_opt = run->add_option("--seed-override", seed, "replace the config seed");
    run->add_option("--output-dir", output_dir, "parent directory for the run's artifacts");
    run->add_flag("-q,--quiet", quiet, "suppress progress output");
    run->add_option("--threads", threads, "OpenMP threads (0 keeps the runtime default)")->check(CLI::NonNegativeNumber);

    app.add_subcommand("list", "list builtin experiments");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (threads > 0) omp_set_num_threads(threads);

    if (app.got_subcommand("list")) {
        print_list();
        return 0;
    }

    chaoslab::ExperimentConfig cfg;
    try {
        cfg = chaoslab::load_config(config);
    } catch (const chaoslab::ConfigError& e) {
        std::cerr << "config error";
        if (!e.key().empty()) std::cerr << " at '" << e.key() << "'";
        std::cerr << ": " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    chaoslab::RunOptions options;
    if (seed_opt->count() > 0) options.seed_override = seed;
    if (!output_dir.empty()) options.output_dir = output_dir;
    const auto t0 = std::chrono::steady_clock::now();
    if (!quiet) {
        options.log = [t0](const std::string& msg) {
            const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            std::cerr << "[" << std::fixed << std::setprecision(1) << std::setw(7) << s << "s] " << msg << "\n";
        };
    }

    chaoslab::RunResult result;
    try {
        result = chaoslab::run_experiment(cfg, options);
    } catch (const chaoslab::ConfigError& e) {
        std::cerr << "config error at '" << e.key() << "': " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::cout << "manifest: " << result.manifest.string() << "\n";
    for (const auto& f : result.failures) std::cout << "FAIL " << f << "\n";
    std::cout << (result.exit_code == 0 ? "all assertions passed" : "run failed") << "\n";
    return result.exit_code;
}
