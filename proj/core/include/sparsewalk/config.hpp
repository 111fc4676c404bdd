#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sparsewalk/trainer.hpp"

namespace sparsewalk {

struct EvalConfig {
  int trials = 60;
  std::vector<std::string> suites{"seen", "noise", "ablation", "unseen"};

  bool operator==(const EvalConfig&) const = default;
};

/// Everything a run depends on. Serialized as a JSON document; unknown keys are rejected and
/// missing keys keep their defaults.
struct RunConfig {
  std::uint64_t seed = 1;
  TrainConfig train;
  EvalConfig eval;

  bool operator==(const RunConfig&) const = default;
};

/// Throws ConfigError naming the offending field.
void validate(const RunConfig& cfg);

/// Canonical JSON text (fixed key order, round-trip precision).
std::string to_json(const RunConfig& cfg);

/// Parses and validates. Throws ConfigError naming the offending field.
RunConfig run_config_from_json(const std::string& text);

/// Throws ConfigError with the path when the file cannot be read.
RunConfig load_run_config(const std::string& path);

/// FNV-1a 64 of `text`.
std::uint64_t fnv1a64(const std::string& text);

/// Hash of the canonical JSON form.
std::uint64_t config_hash(const RunConfig& cfg);

/// 16 lowercase hex digits.
std::string hex64(std::uint64_t value);

}  // namespace sparsewalk
