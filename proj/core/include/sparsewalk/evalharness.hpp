#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "sparsewalk/curriculum.hpp"
#include "sparsewalk/env.hpp"
#include "sparsewalk/learn/policy.hpp"

namespace sparsewalk::evalharness {

inline constexpr int kDefaultTrials = 60;
inline constexpr double kUnseenVelocity = 0.6;
inline constexpr double kUnseenNoise = 0.03;

/// Maps an observation to a normalized action.
using PolicyFn = std::function<env::JointVector(const env::ObsVector&)>;

/// Deterministic policy: the actor mean. Throws ShapeMismatchError if the actor does not map
/// 34 observations to 8 actions.
PolicyFn mean_policy(learn::PolicyParams params);

struct ErrorStats {
  double mse = 0.0;
  double mean = 0.0;
  double std = 0.0;

  bool operator==(const ErrorStats&) const = default;
};

/// Population statistics. Throws std::invalid_argument on an empty series.
ErrorStats error_stats(const std::vector<double>& series);

struct TrialSpec {
  env::Task task;
  double noise_sigma = 0.0;
  raysensor::RayMask ablation;
  std::uint64_t seed = 0;
};

struct TrialResult {
  bool success = false;
  env::Termination reason = env::Termination::None;
  std::vector<double> vbar_x;
  double distance = 0.0;
  double duration = 0.0;
  int steps = 0;
  ErrorStats stats;  ///< zero when no step was taken

  bool operator==(const TrialResult&) const = default;
};

/// Runs one episode with goal termination enabled. When `trace` is set it receives the
/// per-control-step rollout.
TrialResult run_trial(const PolicyFn& policy, const env::EnvConfig& cfg, const TrialSpec& spec,
                      std::vector<env::TraceRow>* trace = nullptr);
TrialResult run_trial(const learn::PolicyParams& policy, const env::EnvConfig& cfg,
                      const TrialSpec& spec);

/// One table row: a task template evaluated over repeated trials.
struct SuiteEntry {
  std::string label;
  terrain::TerrainKind kind = terrain::TerrainKind::Flat;
  double v_ref_x = 0.6;
  double noise_sigma = 0.0;
  raysensor::RayMask ablation;
  int n_trials = kDefaultTrials;
  bool first_block_goal = false;  ///< success at the end of the first stair block

  bool operator==(const SuiteEntry&) const = default;
};

enum class SuiteKind { Seen, Noise, Ablation, Unseen };

std::string_view to_string(SuiteKind kind);
std::optional<SuiteKind> suite_from_string(std::string_view name);

struct Suite {
  SuiteKind kind = SuiteKind::Seen;
  std::vector<SuiteEntry> entries;
};

/// Noise levels of the sweep; the suite also carries a noise-free baseline row first.
inline constexpr double kNoiseLevels[] = {0.01, 0.03, 0.07, 0.11, 0.15};

Suite seen_suite(int n_trials = kDefaultTrials);
Suite noise_suite(int n_trials = kDefaultTrials);
Suite ablation_suite(int n_trials = kDefaultTrials);
Suite unseen_suite(int n_trials = kDefaultTrials);
Suite make_suite(SuiteKind kind, int n_trials = kDefaultTrials);

/// Overrides applied to every entry (command-line --noise-sigma / --ablate-rays).
struct SuiteOverrides {
  std::optional<double> noise_sigma;
  std::optional<raysensor::RayMask> ablation;
};

Suite apply_overrides(Suite suite, const SuiteOverrides& overrides);

struct EvalRanges {
  curriculum::TerrainRanges terrain{
      {0.10, 0.20}, {5.0 * kPi / 180.0, 11.0 * kPi / 180.0}, {0.10, 0.20}, 0.30, {1.0, 2.0}};
  curriculum::Range alternating_run{0.20, 0.55};
};

/// Draws the terrain parameters and seeds of one trial of `entry`.
TrialSpec make_trial(const SuiteEntry& entry, const EvalRanges& ranges, Rng& rng);

struct RowResult {
  SuiteEntry entry;
  int n_trials = 0;
  int successes = 0;
  double success_rate = 0.0;
  double ci_half_width = 0.0;  ///< 95% normal approximation
  ErrorStats stats;            ///< pooled over every control step of every trial
  std::vector<int> termination_counts;  ///< indexed by env::Termination

  bool operator==(const RowResult&) const = default;
};

struct SuiteResult {
  SuiteKind kind = SuiteKind::Seen;
  std::vector<RowResult> rows;
};

/// Trial (row r, index i) is seeded from mix_seed(mix_seed(master_seed, r), i); results are
/// merged in spec order regardless of `threads`.
SuiteResult run_suite(const PolicyFn& policy, const env::EnvConfig& cfg, const Suite& suite,
                      std::uint64_t master_seed, int threads = 1, const EvalRanges& ranges = {},
                      const std::string& record_dir = "");

double binomial_half_width(double p, int n);

/// Column header of the table emitted for `kind`.
const std::string& table_header(SuiteKind kind);

/// CSV table (header plus rows). The noise table lists ratios against the suite's noise-free
/// row, which is not printed.
std::string table_csv(const SuiteResult& result);

/// Structured report with every row, termination counts and the noise-free baseline.
std::string report_json(const SuiteResult& result);

}  // namespace sparsewalk::evalharness
