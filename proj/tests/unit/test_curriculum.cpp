#include <gtest/gtest.h>

#include <cmath>

#include "sparsewalk/curriculum.hpp"

namespace sw = sparsewalk;
using namespace sw::curriculum;
using sw::terrain::TerrainKind;

namespace {

int terrain_index(TerrainKind kind) {
  for (std::size_t i = 0; i < kTrainingTerrains.size(); ++i) {
    if (kTrainingTerrains[i] == kind) return static_cast<int>(i);
  }
  return -1;
}

std::vector<long> terrain_counts(const Stage& stage, int n, std::uint64_t seed) {
  sw::Rng rng = sw::make_rng(seed);
  std::vector<long> counts(4, 0);
  for (int i = 0; i < n; ++i) ++counts[terrain_index(sample_task(stage, rng).terrain.kind)];
  return counts;
}

}  // namespace

TEST(Curriculum, ClipReferenceVelocity) {
  EXPECT_EQ(clip_reference_velocity(0.1), 0.0);
  EXPECT_EQ(clip_reference_velocity(-0.149), 0.0);
  EXPECT_EQ(clip_reference_velocity(0.15), 0.15);
  EXPECT_EQ(clip_reference_velocity(-0.5), -0.5);
  EXPECT_EQ(clip_reference_velocity(0.0), 0.0);
}

TEST(Curriculum, StageTables) {
  EXPECT_EQ(make_stage(StageName::WarmUp).terrain_probs, (std::array<double, 4>{1, 0, 0, 0}));
  EXPECT_EQ(make_stage(StageName::StageAlpha).terrain_probs,
            (std::array<double, 4>{0.3, 0.1, 0.1, 0.5}));
  EXPECT_EQ(make_stage(StageName::StageGamma).terrain_probs,
            (std::array<double, 4>{0.3, 0.1, 0.1, 0.5}));
  EXPECT_EQ(make_stage(StageName::Uniform).terrain_probs,
            (std::array<double, 4>{0.25, 0.25, 0.25, 0.25}));
  EXPECT_EQ(make_stage(StageName::StageAlpha).flat_velocity.lo, 0.0);
  EXPECT_EQ(make_stage(StageName::StageGamma).flat_velocity.lo, -0.7);
  for (StageName n : {StageName::WarmUp, StageName::StageAlpha, StageName::StageGamma,
                      StageName::Uniform}) {
    EXPECT_NO_THROW(validate(make_stage(n)));
    EXPECT_EQ(stage_from_string(to_string(n)), n);
  }
  EXPECT_FALSE(stage_from_string("nope").has_value());
}

TEST(Curriculum, StageValidation) {
  Stage s = make_stage(StageName::StageAlpha);
  s.terrain_probs[0] = 0.31;
  EXPECT_THROW(validate(s), std::invalid_argument);
  s = make_stage(StageName::StageAlpha);
  s.terrain_probs = {1.2, -0.2, 0.0, 0.0};
  EXPECT_THROW(validate(s), std::invalid_argument);
  s = make_stage(StageName::StageAlpha);
  s.obstacle_velocity.lo = 0.1;
  EXPECT_THROW(validate(s), std::invalid_argument);
}

TEST(Curriculum, WarmUpIsAlwaysFlat) {
  const Stage s = make_stage(StageName::WarmUp);
  sw::Rng rng = sw::make_rng(1);
  for (int i = 0; i < 2000; ++i) {
    const sw::env::Task t = sample_task(s, rng);
    EXPECT_EQ(t.terrain.kind, TerrainKind::Flat);
    EXPECT_GE(t.v_ref_x, 0.0);
    EXPECT_LE(t.v_ref_x, 0.7);
    EXPECT_TRUE(t.v_ref_x == 0.0 || t.v_ref_x >= 0.15);
  }
}

TEST(Curriculum, TerrainFrequenciesPassChiSquared) {
  for (StageName n : {StageName::StageAlpha, StageName::StageGamma, StageName::Uniform}) {
    const Stage s = make_stage(n);
    const auto counts = terrain_counts(s, 20000, 2);
    const std::vector<double> probs(s.terrain_probs.begin(), s.terrain_probs.end());
    EXPECT_LT(chi_squared(counts, probs), kChiSquared3At001) << to_string(n);
  }
}

TEST(Curriculum, ChiSquaredStatistic) {
  EXPECT_NEAR(chi_squared({30, 10, 10, 50}, {0.3, 0.1, 0.1, 0.5}), 0.0, 1e-12);
  // (60-50)^2/50 + (40-50)^2/50
  EXPECT_NEAR(chi_squared({60, 40}, {0.5, 0.5}), 4.0, 1e-12);
  EXPECT_THROW(chi_squared({1, 2}, {1.0}), std::invalid_argument);
}

TEST(Curriculum, VelocityLaws) {
  sw::Rng rng = sw::make_rng(3);
  const Stage gamma = make_stage(StageName::StageGamma);
  bool saw_negative = false;
  for (int i = 0; i < 5000; ++i) {
    const sw::env::Task t = sample_task(gamma, rng);
    EXPECT_NO_THROW(sw::env::validate(t));
    if (t.terrain.kind == TerrainKind::Flat) {
      EXPECT_TRUE(t.v_ref_x == 0.0 || std::abs(t.v_ref_x) >= 0.15);
      saw_negative = saw_negative || t.v_ref_x < 0.0;
    } else {
      EXPECT_GE(t.v_ref_x, 0.15);
      EXPECT_LE(t.v_ref_x, 0.7);
    }
  }
  EXPECT_TRUE(saw_negative);

  const Stage alpha = make_stage(StageName::StageAlpha);
  for (int i = 0; i < 5000; ++i) EXPECT_GE(sample_task(alpha, rng).v_ref_x, 0.0);
}

TEST(Curriculum, TerrainParametersWithinRanges) {
  const TerrainRanges r;
  sw::Rng rng = sw::make_rng(4);
  for (int i = 0; i < 500; ++i) {
    const auto step = sample_terrain(TerrainKind::Step, r, rng);
    EXPECT_GE(step.params.step_height, 0.10);
    EXPECT_LE(step.params.step_height, 0.20);
    const auto ramp = sample_terrain(TerrainKind::Ramp, r, rng);
    EXPECT_GE(std::tan(ramp.params.ramp_slope), 0.1 - 1e-12);
    EXPECT_LE(std::tan(ramp.params.ramp_slope), 0.2 + 1e-12);
    const auto stairs = sample_terrain(TerrainKind::Stairs, r, rng);
    EXPECT_GE(stairs.params.stair_rise, 0.10);
    EXPECT_LE(stairs.params.stair_rise, 0.20);
    EXPECT_EQ(stairs.params.stair_run, 0.30);
    EXPECT_GE(stairs.start_x, 1.0);
    EXPECT_LE(stairs.start_x, 2.0);
  }
}

TEST(Curriculum, SamplingIsDeterministic) {
  const Stage s = make_stage(StageName::StageAlpha);
  sw::Rng a = sw::make_rng(5);
  sw::Rng b = sw::make_rng(5);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_task(s, a), sample_task(s, b));
}

TEST(Curriculum, ShouldAdvance) {
  EXPECT_FALSE(should_advance({}));
  EXPECT_FALSE(should_advance({0.1, 0.25}));
  EXPECT_TRUE(should_advance({0.6, 0.2}));
  EXPECT_TRUE(should_advance({0.6, 0.19}));
}

TEST(Curriculum, AdvancesOnNoiseThreshold) {
  Curriculum c{CurriculumConfig{}};
  EXPECT_EQ(c.stage().name, StageName::WarmUp);
  EXPECT_EQ(c.record_update(0.5), Curriculum::Event::None);
  EXPECT_EQ(c.record_update(0.2), Curriculum::Event::Advanced);
  EXPECT_EQ(c.stage().name, StageName::StageAlpha);
  EXPECT_EQ(c.updates_in_stage(), 0);
  EXPECT_EQ(c.record_update(0.1), Curriculum::Event::Advanced);
  EXPECT_EQ(c.stage().name, StageName::StageGamma);
  EXPECT_EQ(c.record_update(0.1), Curriculum::Event::Finished);
  EXPECT_TRUE(c.finished());
  EXPECT_EQ(c.record_update(0.1), Curriculum::Event::None);
  EXPECT_EQ(c.noise_history().size(), 4u);
}

TEST(Curriculum, BudgetForcesAdvance) {
  CurriculumConfig cfg;
  cfg.stage_budget = 3;
  Curriculum c{cfg};
  EXPECT_EQ(c.record_update(0.6), Curriculum::Event::None);
  EXPECT_EQ(c.record_update(0.6), Curriculum::Event::None);
  EXPECT_EQ(c.record_update(0.6), Curriculum::Event::ForcedAdvance);
  EXPECT_EQ(c.stage().name, StageName::StageAlpha);
  for (int i = 0; i < 2; ++i) c.record_update(0.6);
  EXPECT_EQ(c.record_update(0.6), Curriculum::Event::ForcedAdvance);
  for (int i = 0; i < 2; ++i) c.record_update(0.6);
  EXPECT_EQ(c.record_update(0.6), Curriculum::Event::ForcedFinish);
  EXPECT_TRUE(c.finished());
}

TEST(Curriculum, StagesOnlyMoveForward) {
  Curriculum c{CurriculumConfig{}};
  c.enter(StageName::StageGamma);
  EXPECT_EQ(c.stage_index(), 2);
  EXPECT_THROW(c.enter(StageName::WarmUp), std::logic_error);
  EXPECT_THROW(c.enter(StageName::StageGamma), std::logic_error);
  EXPECT_THROW(c.enter(StageName::Uniform), std::logic_error);
}

TEST(Curriculum, UniformBaselineIsSingleStage) {
  CurriculumConfig cfg;
  cfg.uniform_baseline = true;
  Curriculum c{cfg};
  EXPECT_EQ(c.stage().name, StageName::Uniform);
  EXPECT_EQ(c.record_update(0.1), Curriculum::Event::Finished);
}

TEST(Curriculum, ConfigValidation) {
  CurriculumConfig cfg;
  cfg.stage_budget = 0;
  EXPECT_THROW(validate(cfg), std::invalid_argument);
  cfg = CurriculumConfig{};
  cfg.ranges.start_x = {0.5, 2.0};
  EXPECT_THROW(validate(cfg), std::invalid_argument);
}
