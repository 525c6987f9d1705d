#pragma once

#include "chaoslab/error.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace chaoslab {

inline constexpr int kConfigSchemaVersion = 1;
inline constexpr const char* kToolkitVersion = "1.0.0";
/// Environment variable naming the directory for cached kernel tabulations.
inline constexpr const char* kCacheDirEnv = "CHAOS_LAB_CACHE_DIR";

/// Invalid configuration; `key` is the JSON path of the offending entry.
class ConfigError : public InvalidArgument {
public:
    ConfigError(const std::string& key, const std::string& message)
        : InvalidArgument(key.empty() ? message : key + ": " + message), key_(key)
    {
    }
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

enum class ExperimentKind { Converge, Simulate, Pde, Combinatorics, Partition, VerifyCancellation, ChangeOfLaw, Potential };
std::string to_string(ExperimentKind kind);

struct ExperimentConfig {
    std::string source;  ///< file path or builtin name
    std::string name;
    std::string description;
    ExperimentKind kind = ExperimentKind::Converge;
    std::uint64_t seed = 1;
    std::filesystem::path output_dir;
    nlohmann::json raw;  ///< full document, used for hashing and per-kind blocks
};

/// Parses and fully validates a config document; throws ConfigError naming the key.
ExperimentConfig parse_config(const nlohmann::json& doc, const std::string& source);

/// Loads a config from a file path or, when no such file exists, a builtin name.
ExperimentConfig load_config(const std::string& path_or_name);

struct BuiltinExperiment {
    std::string name;
    std::string description;
    std::string text;  ///< JSON document
};
std::vector<BuiltinExperiment> list_builtin_experiments();

/// FNV-1a 64 over the canonical (sorted-key, compact) serialization.
std::uint64_t config_hash(const nlohmann::json& doc);

struct RunOptions {
    std::optional<std::uint64_t> seed_override;
    std::optional<std::filesystem::path> output_dir;
    std::optional<std::filesystem::path> cache_dir;  ///< defaults to $CHAOS_LAB_CACHE_DIR
    std::function<void(const std::string&)> log;
};

struct RunResult {
    int exit_code = 0;                 ///< 0 all assertions pass, 1 an assertion or the run failed
    std::vector<std::string> failures;
    std::filesystem::path manifest;
    std::vector<std::string> outputs;  ///< file names relative to the output directory
};

/// Executes the pipeline. The manifest is written before any compute with "incomplete": true
/// and rewritten as artifacts appear; it is finalized at the end.
RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});

} // namespace chaoslab
