#pragma once

#include "hybridfp/hybrid_iteration.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

namespace hybridfp {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct OutputPaths {
    std::optional<std::filesystem::path> trace;    // CSV; the JSON sidecar sits next to it
    std::optional<std::filesystem::path> summary;
    std::optional<std::filesystem::path> plot;
};

struct RunConfig {
    std::string name;
    ProblemInstance instance;
    AlgorithmParams params;
    SolverSettings settings;
    OutputPaths outputs;
};

/// Parses and validates a config document. Unknown keys, wrong types and
/// invalid parameters raise ConfigError before anything is computed.
/// Relative output paths are resolved against `base_dir`.
RunConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir = {});

RunConfig load_config(const std::filesystem::path& path);

}  // namespace hybridfp
