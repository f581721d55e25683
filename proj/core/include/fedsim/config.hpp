#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "fedsim/orchestrator.hpp"

namespace fedsim {

/// Parses `key = value` lines with dotted keys (e.g. `attack.lambda = 5`).
/// `#` starts a comment. Unknown keys, malformed values and duplicate keys
/// raise ConfigError carrying the 1-based line; the result is validated.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

/// Sets one key on `cfg` without validating the whole config.
void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value,
                   std::size_t line = 0);

bool is_known_key(std::string_view key);
std::vector<std::string> known_keys();

/// Canonical text with every key in a fixed order; parse_config() of the
/// output yields an equal configuration.
std::string serialize_config(const ExperimentConfig& cfg);

/// 16 hex digits of FNV-1a 64 over serialize_config().
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace fedsim
