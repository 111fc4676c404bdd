#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sparsewalk/curriculum.hpp"
#include "sparsewalk/env.hpp"
#include "sparsewalk/learn/ppo.hpp"

namespace sparsewalk {

struct TrainConfig {
  env::EnvConfig env;
  learn::PolicyLayout layout;
  learn::PPOConfig ppo;
  curriculum::CurriculumConfig curriculum;
  int max_updates = 6000;
  /// Stop after the warm-up stage (training smoke runs).
  bool warmup_only = false;
  int threads = 0;  ///< 0 = all cores

  bool operator==(const TrainConfig&) const = default;
};

void validate(const TrainConfig& cfg);

struct UpdateLog {
  int update = 0;
  std::string stage;
  double mean_return = 0.0;  ///< over episodes finished in this rollout; carried over if none
  int episodes = 0;
  double mean_episode_length = 0.0;
  double mean_reward = 0.0;  ///< per control step over the rollout
  learn::UpdateStats stats;
  double entropy_coef = 0.0;
  curriculum::Curriculum::Event event = curriculum::Curriculum::Event::None;
  std::string next_stage;

  double surrogate_loss() const { return stats.surrogate; }
  double entropy_loss() const { return -entropy_coef * stats.entropy; }
  double policy_loss() const { return surrogate_loss() + entropy_loss(); }
};

/// Column header of the per-update training log.
const std::string& train_log_header();
std::string train_log_row(const UpdateLog& log);

/// Curriculum-driven PPO: parallel environments, rollout collection and policy updates.
class Trainer {
 public:
  Trainer(const TrainConfig& cfg, std::uint64_t seed);

  /// One rollout of n_envs x horizon control steps followed by a PPO update.
  UpdateLog iterate();

  bool finished() const;
  int updates() const { return updates_; }
  const learn::PolicyParams& params() const { return params_; }
  const curriculum::Curriculum& curriculum() const { return curriculum_; }
  const TrainConfig& config() const { return cfg_; }

 private:
  void reset_env(int e);
  void collect();

  TrainConfig cfg_;
  int threads_;
  Rng init_rng_;
  Rng task_rng_;
  Rng update_rng_;
  std::vector<Rng> action_rngs_;
  learn::PolicyParams params_;
  learn::Optimizer optimizer_;
  curriculum::Curriculum curriculum_;
  std::vector<env::Episode> envs_;
  learn::RolloutBuffer buffer_;
  int updates_ = 0;
  double last_mean_return_ = 0.0;
  std::vector<double> finished_returns_;
  std::vector<int> finished_lengths_;
};

}  // namespace sparsewalk
