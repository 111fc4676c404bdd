#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "sparsewalk/trainer.hpp"

namespace sw = sparsewalk;

namespace {

sw::TrainConfig tiny_config() {
  sw::TrainConfig cfg;
  cfg.layout.hidden = {16, 16};
  cfg.ppo.n_envs = 3;
  cfg.ppo.horizon = 20;
  cfg.ppo.epochs = 2;
  cfg.ppo.minibatches = 2;
  cfg.max_updates = 3;
  cfg.threads = 1;
  return cfg;
}

int count_columns(const std::string& line) {
  return static_cast<int>(std::count(line.begin(), line.end(), ',')) + 1;
}

}  // namespace

TEST(Trainer, RunsToUpdateLimit) {
  sw::Trainer t(tiny_config(), 1);
  std::vector<sw::UpdateLog> logs;
  while (!t.finished()) logs.push_back(t.iterate());
  ASSERT_EQ(logs.size(), 3u);
  for (std::size_t i = 0; i < logs.size(); ++i) {
    EXPECT_EQ(logs[i].update, static_cast<int>(i));
    EXPECT_EQ(logs[i].stage, "warmup");
    EXPECT_TRUE(std::isfinite(logs[i].stats.loss));
  }
  EXPECT_EQ(logs.back().stats.policy_noise, sw::learn::policy_noise(t.params()));
  EXPECT_EQ(t.updates(), 3);
  EXPECT_THROW(t.iterate(), std::logic_error);
  EXPECT_NO_THROW(sw::learn::check_layout(t.params(), tiny_config().layout));
}

TEST(Trainer, DeterministicAcrossThreadCounts) {
  sw::TrainConfig a_cfg = tiny_config();
  sw::TrainConfig b_cfg = tiny_config();
  b_cfg.threads = 3;
  sw::Trainer a(a_cfg, 7);
  sw::Trainer b(b_cfg, 7);
  while (!a.finished()) {
    EXPECT_EQ(sw::train_log_row(a.iterate()), sw::train_log_row(b.iterate()));
  }
  EXPECT_EQ(a.params().actor.weights[0], b.params().actor.weights[0]);
  EXPECT_EQ(a.params().log_std, b.params().log_std);
}

TEST(Trainer, SeedChangesTheRun) {
  sw::Trainer a(tiny_config(), 1);
  sw::Trainer b(tiny_config(), 2);
  a.iterate();
  b.iterate();
  EXPECT_NE(a.params().actor.weights[0], b.params().actor.weights[0]);
}

TEST(Trainer, LogRowMatchesHeader) {
  sw::Trainer t(tiny_config(), 3);
  const std::string row = sw::train_log_row(t.iterate());
  EXPECT_EQ(count_columns(row), count_columns(sw::train_log_header()));
}

TEST(Trainer, RejectsInvalidConfig) {
  sw::TrainConfig cfg = tiny_config();
  cfg.layout.obs_dim = 10;
  EXPECT_THROW(sw::Trainer(cfg, 1), sw::ShapeMismatchError);
  cfg = tiny_config();
  cfg.max_updates = 0;
  EXPECT_THROW(sw::validate(cfg), std::invalid_argument);
}

TEST(Trainer, WarmUpOnlyStopsAtStageChange) {
  sw::TrainConfig cfg = tiny_config();
  cfg.warmup_only = true;
  cfg.max_updates = 10;
  cfg.curriculum.stage_budget = 2;
  sw::Trainer t(cfg, 4);
  int n = 0;
  while (!t.finished()) {
    t.iterate();
    ++n;
  }
  EXPECT_EQ(n, 2);
}
