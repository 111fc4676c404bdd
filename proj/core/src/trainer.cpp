#include "sparsewalk/trainer.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "sparsewalk/parallel.hpp"

namespace sparsewalk {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

std::string_view event_name(curriculum::Curriculum::Event e) {
  using Event = curriculum::Curriculum::Event;
  switch (e) {
    case Event::None: return "";
    case Event::Advanced: return "advanced";
    case Event::ForcedAdvance: return "forced_advance";
    case Event::Finished: return "finished";
    case Event::ForcedFinish: return "forced_finish";
  }
  return "";
}

}  // namespace

void validate(const TrainConfig& cfg) {
  env::validate(cfg.env);
  learn::validate(cfg.layout);
  learn::validate(cfg.ppo);
  curriculum::validate(cfg.curriculum);
  if (cfg.layout.obs_dim != env::kObsDim || cfg.layout.action_dim != env::kActionDim) {
    throw ShapeMismatchError("policy layout must map 34 observations to 8 actions");
  }
  if (cfg.max_updates < 1) {
    throw std::invalid_argument("max_updates must be at least 1");
  }
  if (cfg.threads < 0) {
    throw std::invalid_argument("threads must be non-negative");
  }
}

const std::string& train_log_header() {
  static const std::string header =
      "update,stage,mean_return,episodes,mean_episode_length,mean_reward,surrogate_loss,"
      "entropy_loss,policy_loss,value_loss,total_loss,policy_noise,approx_kl,clip_fraction,"
      "grad_norm,event";
  return header;
}

std::string train_log_row(const UpdateLog& log) {
  std::ostringstream out;
  out.precision(10);
  out << log.update << ',' << log.stage << ',' << log.mean_return << ',' << log.episodes << ','
      << log.mean_episode_length << ',' << log.mean_reward << ',' << log.surrogate_loss() << ','
      << log.entropy_loss() << ',' << log.policy_loss() << ',' << log.stats.value << ','
      << log.stats.loss << ',' << log.stats.policy_noise << ',' << log.stats.approx_kl << ','
      << log.stats.clip_fraction << ',' << log.stats.grad_norm << ',' << event_name(log.event);
  return out.str();
}

Trainer::Trainer(const TrainConfig& cfg, std::uint64_t seed)
    : cfg_(cfg),
      threads_(resolve_threads(cfg.threads)),
      init_rng_(make_rng(seed, 0)),
      task_rng_(make_rng(seed, 1)),
      update_rng_(make_rng(seed, 2)),
      curriculum_(cfg.curriculum) {
  validate(cfg_);
  cfg_.env.terminate_on_goal = false;
  params_ = learn::make_policy(cfg_.layout, init_rng_);
  optimizer_ = learn::Optimizer(cfg_.ppo, params_);
  const int n = cfg_.ppo.n_envs;
  for (int e = 0; e < n; ++e) {
    action_rngs_.push_back(make_rng(seed, 100 + static_cast<std::uint64_t>(e)));
    const env::Task task = curriculum_.sample(task_rng_);
    envs_.emplace_back(cfg_.env, task, task_rng_());
  }
  buffer_ = learn::RolloutBuffer(n, cfg_.ppo.horizon, env::kObsDim, env::kActionDim);
}

bool Trainer::finished() const {
  return updates_ >= cfg_.max_updates || curriculum_.finished() ||
         (cfg_.warmup_only && curriculum_.stage().name != curriculum::StageName::WarmUp);
}

void Trainer::reset_env(int e) {
  const env::Task task = curriculum_.sample(task_rng_);
  envs_[e] = env::Episode(cfg_.env, task, task_rng_());
}

void Trainer::collect() {
  const int n = cfg_.ppo.n_envs;
  const Eigen::ArrayXd sigma = params_.log_std.col(0).array().exp();
  const double log_norm = params_.log_std.sum() + 0.5 * kLog2Pi * env::kActionDim;
  std::normal_distribution<double> normal(0.0, 1.0);
  learn::Matrix obs(env::kObsDim, n);
  std::vector<env::StepResult> results(n);
  std::vector<env::JointVector> targets(n);

  for (int t = 0; t < cfg_.ppo.horizon; ++t) {
    for (int e = 0; e < n; ++e) {
      obs.col(e) = envs_[e].observation();
    }
    const learn::PolicyEval eval = learn::policy_forward(params_, obs);
    for (int e = 0; e < n; ++e) {
      Eigen::ArrayXd eps(env::kActionDim);
      for (int j = 0; j < env::kActionDim; ++j) {
        eps[j] = normal(action_rngs_[e]);
      }
      const env::JointVector a = eval.mean.col(e).array() + sigma * eps;
      const int i = buffer_.index(e, t);
      buffer_.obs.col(i) = obs.col(e);
      buffer_.actions.col(i) = a;
      buffer_.logp[i] = -0.5 * eps.square().sum() - log_norm;
      buffer_.values[i] = eval.value(0, e);
      targets[e] = env::action_to_target(a, cfg_.env.model, cfg_.env.action_scale);
    }
    parallel_for(n, threads_, [&](int e) { results[e] = envs_[e].step(targets[e]); });
    for (int e = 0; e < n; ++e) {
      const int i = buffer_.index(e, t);
      buffer_.rewards[i] = results[e].reward;
      buffer_.dones[i] = results[e].done ? 1 : 0;
      if (results[e].done) {
        finished_returns_.push_back(envs_[e].episode_return());
        finished_lengths_.push_back(envs_[e].steps());
        reset_env(e);
      }
    }
  }
  for (int e = 0; e < n; ++e) {
    obs.col(e) = envs_[e].observation();
  }
  const learn::Matrix last = learn::mlp_forward(params_.critic, obs);
  buffer_.bootstrap = last.row(0).transpose();
}

UpdateLog Trainer::iterate() {
  if (finished()) {
    throw std::logic_error("training already finished");
  }
  finished_returns_.clear();
  finished_lengths_.clear();
  collect();
  buffer_.compute_advantages(cfg_.ppo.gamma, cfg_.ppo.lambda);

  UpdateLog log;
  log.update = updates_;
  log.stage = std::string(curriculum::to_string(curriculum_.stage().name));
  log.entropy_coef = cfg_.ppo.entropy_coef;
  log.episodes = static_cast<int>(finished_returns_.size());
  if (log.episodes > 0) {
    double sum = 0.0;
    double len = 0.0;
    for (int k = 0; k < log.episodes; ++k) {
      sum += finished_returns_[k];
      len += finished_lengths_[k];
    }
    last_mean_return_ = sum / log.episodes;
    log.mean_episode_length = len / log.episodes;
  }
  log.mean_return = last_mean_return_;
  log.mean_reward = buffer_.rewards.mean();

  log.stats = learn::ppo_update(buffer_, params_, optimizer_, cfg_.ppo, update_rng_);
  ++updates_;
  log.event = curriculum_.record_update(log.stats.policy_noise);
  log.next_stage = std::string(curriculum::to_string(curriculum_.stage().name));
  return log;
}

}  // namespace sparsewalk
