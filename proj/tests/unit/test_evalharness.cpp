#include <gtest/gtest.h>

#include <cmath>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sparsewalk/evalharness.hpp"

namespace sw = sparsewalk;
using namespace sw::evalharness;
using sw::terrain::TerrainKind;

namespace {

PolicyFn zero_policy() {
  return [](const sw::env::ObsVector&) { return sw::env::JointVector::Zero().eval(); };
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

Suite single_row(TerrainKind kind, double v, int trials) {
  Suite s{SuiteKind::Seen, {}};
  s.entries.push_back({std::string(sw::terrain::to_string(kind)), kind, v, 0.0, {}, trials});
  return s;
}

}  // namespace

TEST(ErrorStats, Examples) {
  const ErrorStats a = error_stats({0.0, 0.0, 0.0});
  EXPECT_EQ(a.mse, 0.0);
  EXPECT_EQ(a.mean, 0.0);
  EXPECT_EQ(a.std, 0.0);
  const ErrorStats b = error_stats({1.0, -1.0});
  EXPECT_NEAR(b.mse, 1.0, 1e-15);
  EXPECT_NEAR(b.mean, 0.0, 1e-15);
  EXPECT_NEAR(b.std, 1.0, 1e-15);
  const ErrorStats c = error_stats({0.2, 0.2, 0.2, 0.2});
  EXPECT_NEAR(c.mse, 0.04, 1e-15);
  EXPECT_NEAR(c.mean, 0.2, 1e-15);
  EXPECT_NEAR(c.std, 0.0, 1e-15);
  EXPECT_THROW(error_stats({}), std::invalid_argument);
}

TEST(ErrorStats, MseIsMeanSquaredPlusVariance) {
  sw::Rng rng = sw::make_rng(1);
  std::normal_distribution<double> g(0.3, 0.7);
  std::vector<double> x(1000);
  for (double& v : x) v = g(rng);
  const ErrorStats s = error_stats(x);
  EXPECT_NEAR(s.mse, s.mean * s.mean + s.std * s.std, 1e-12);
}

TEST(BinomialHalfWidth, NormalApproximation) {
  EXPECT_NEAR(binomial_half_width(0.5, 60), 1.96 * std::sqrt(0.25 / 60), 1e-15);
  EXPECT_EQ(binomial_half_width(1.0, 60), 0.0);
  EXPECT_THROW(binomial_half_width(0.5, 0), std::invalid_argument);
}

TEST(Suites, SeenRows) {
  const Suite s = make_suite(SuiteKind::Seen);
  ASSERT_EQ(s.entries.size(), 13u);
  int flat = 0;
  for (const auto& e : s.entries) {
    EXPECT_EQ(e.n_trials, 60);
    EXPECT_EQ(e.noise_sigma, 0.0);
    EXPECT_TRUE(e.ablation.none());
    if (e.kind == TerrainKind::Flat) {
      ++flat;
      EXPECT_EQ(std::abs(e.v_ref_x) == 0.7 || std::abs(e.v_ref_x) == 0.5, true);
    }
  }
  EXPECT_EQ(flat, 4);
}

TEST(Suites, NoiseRows) {
  const Suite s = make_suite(SuiteKind::Noise, 5);
  ASSERT_EQ(s.entries.size(), 6u);
  EXPECT_EQ(s.entries[0].noise_sigma, 0.0);
  const double levels[] = {0.01, 0.03, 0.07, 0.11, 0.15};
  for (int i = 0; i < 5; ++i) {
    EXPECT_EQ(s.entries[i + 1].noise_sigma, levels[i]);
    EXPECT_EQ(s.entries[i + 1].kind, TerrainKind::Stairs);
    EXPECT_EQ(s.entries[i + 1].v_ref_x, 0.6);
    EXPECT_EQ(s.entries[i + 1].n_trials, 5);
  }
}

TEST(Suites, AblationRows) {
  const Suite s = make_suite(SuiteKind::Ablation);
  ASSERT_EQ(s.entries.size(), 12u);
  std::vector<std::string> labels;
  for (const auto& e : s.entries) labels.push_back(sw::raysensor::format_ray_list(e.ablation));
  EXPECT_EQ(labels[0], "8");
  EXPECT_EQ(labels[3], "11");
  EXPECT_EQ(labels[4], "8 9 10 11");
  EXPECT_EQ(labels[5], "1");
  EXPECT_EQ(labels[11], "7");
}

TEST(Suites, UnseenRows) {
  const Suite s = make_suite(SuiteKind::Unseen);
  ASSERT_EQ(s.entries.size(), 4u);
  for (const auto& e : s.entries) {
    EXPECT_EQ(e.v_ref_x, 0.6);
    EXPECT_EQ(e.noise_sigma, 0.03);
  }
  EXPECT_FALSE(s.entries[2].first_block_goal);
  EXPECT_TRUE(s.entries[3].first_block_goal);
  EXPECT_THROW(make_suite(SuiteKind::Unseen, 0), std::invalid_argument);
  EXPECT_EQ(suite_from_string("unseen"), SuiteKind::Unseen);
  EXPECT_FALSE(suite_from_string("other").has_value());
}

TEST(Suites, Overrides) {
  SuiteOverrides o;
  o.noise_sigma = 0.05;
  sw::raysensor::RayMask m;
  m.set(0);
  o.ablation = m;
  const Suite s = apply_overrides(make_suite(SuiteKind::Seen), o);
  for (const auto& e : s.entries) {
    EXPECT_EQ(e.noise_sigma, 0.05);
    EXPECT_EQ(e.ablation, m);
  }
  o.noise_sigma = -1.0;
  EXPECT_THROW(apply_overrides(s, o), std::invalid_argument);
}

TEST(Headers, Golden) {
  EXPECT_EQ(table_header(SuiteKind::Seen),
            "task,v_ref_x,success_rate,ci_half_width,vbar_x_mse,vbar_x_mean,vbar_x_std,n_trials");
  EXPECT_EQ(table_header(SuiteKind::Noise),
            "noise_sigma,success_rate,ci_half_width,ratio_vbar_x_mse,ratio_vbar_x_mean,"
            "ratio_vbar_x_std,n_trials");
  EXPECT_EQ(table_header(SuiteKind::Ablation),
            "ablated_rays,success_rate,ci_half_width,vbar_x_mse,vbar_x_mean,vbar_x_std,n_trials");
  EXPECT_EQ(table_header(SuiteKind::Unseen),
            "terrain,success_rate,ci_half_width,vbar_x_mse,vbar_x_mean,vbar_x_std,n_trials");
}

TEST(MakeTrial, ParametersWithinEvaluationRanges) {
  const EvalRanges ranges;
  sw::Rng rng = sw::make_rng(2);
  for (int i = 0; i < 200; ++i) {
    const TrialSpec ramp = make_trial({"ramp", TerrainKind::Ramp, 0.6}, ranges, rng);
    EXPECT_GE(ramp.task.terrain.params.ramp_slope, 5.0 * sw::kPi / 180.0);
    EXPECT_LE(ramp.task.terrain.params.ramp_slope, 11.0 * sw::kPi / 180.0);
    const TrialSpec alt =
        make_trial({"alt", TerrainKind::AlternatingStairs, 0.6}, ranges, rng);
    ASSERT_EQ(alt.task.terrain.params.stair_run_sequence.size(), 8u);
    for (double r : alt.task.terrain.params.stair_run_sequence) {
      EXPECT_GE(r, 0.20);
      EXPECT_LE(r, 0.55);
    }
    EXPECT_FALSE(alt.task.goal_x.has_value());
  }
}

TEST(MakeTrial, FirstBlockGoal) {
  sw::Rng rng = sw::make_rng(3);
  SuiteEntry e{"alt", TerrainKind::AlternatingStairs, 0.6, 0.03, {}, 1, true};
  const TrialSpec spec = make_trial(e, EvalRanges{}, rng);
  ASSERT_TRUE(spec.task.goal_x.has_value());
  sw::Rng terrain_rng = sw::make_rng(spec.task.terrain_seed);
  const auto field = sw::terrain::build_terrain(spec.task.terrain, terrain_rng);
  EXPECT_EQ(*spec.task.goal_x, field.first_block_end_x());
  EXPECT_LT(*spec.task.goal_x, field.obstacle_end_x());
}

TEST(RunTrial, GoalAtSpawnSucceedsImmediately) {
  TrialSpec spec;
  spec.task.v_ref_x = 0.5;
  spec.task.goal_x = -1.0;
  const TrialResult r = run_trial(zero_policy(), sw::env::EnvConfig{}, spec);
  EXPECT_TRUE(r.success);
  EXPECT_EQ(r.reason, sw::env::Termination::Goal);
  EXPECT_LE(r.steps, 1);
}

TEST(RunTrial, StandingStillTracksZeroVelocity) {
  TrialSpec spec;
  spec.task.v_ref_x = 0.0;
  spec.task.episode_limit = 500;
  std::vector<sw::env::TraceRow> trace;
  const TrialResult r = run_trial(zero_policy(), sw::env::EnvConfig{}, spec, &trace);
  EXPECT_TRUE(r.success);
  EXPECT_EQ(r.reason, sw::env::Termination::Timeout);
  EXPECT_EQ(r.steps, 500);
  EXPECT_EQ(r.vbar_x.size(), 500u);
  EXPECT_EQ(trace.size(), 500u);
  EXPECT_NEAR(r.duration, 5.0, 1e-9);
  EXPECT_LT(r.stats.mse, 0.01);
  for (std::size_t i = 400; i < r.vbar_x.size(); ++i) EXPECT_LT(std::abs(r.vbar_x[i]), 0.02) << i;
}

TEST(RunSuite, PoolsTrialsAndIsDeterministic) {
  Suite s = single_row(TerrainKind::Flat, 0.5, 3);
  const sw::env::EnvConfig cfg;
  const SuiteResult a = run_suite(zero_policy(), cfg, s, 11, 1);
  const SuiteResult b = run_suite(zero_policy(), cfg, s, 11, 2);
  ASSERT_EQ(a.rows.size(), 1u);
  EXPECT_EQ(a.rows, b.rows);
  const RowResult& row = a.rows[0];
  EXPECT_EQ(row.n_trials, 3);
  EXPECT_EQ(row.successes, 0);
  int total = 0;
  for (int c : row.termination_counts) total += c;
  EXPECT_EQ(total, 3);
  // A robot that stands still misses v_ref by about v_ref.
  EXPECT_NEAR(row.stats.mean, 0.5, 0.1);
  EXPECT_EQ(table_csv(a), table_csv(b));
  EXPECT_EQ(report_json(a), report_json(b));
}

TEST(RunSuite, TrialSeedsDependOnMasterSeed) {
  const Suite s = single_row(TerrainKind::Step, 0.5, 1);
  sw::Rng a = sw::make_rng(sw::mix_seed(1, 0), 0);
  sw::Rng b = sw::make_rng(sw::mix_seed(2, 0), 0);
  EXPECT_NE(make_trial(s.entries[0], EvalRanges{}, a).seed,
            make_trial(s.entries[0], EvalRanges{}, b).seed);
}

TEST(TableCsv, NoiseRatiosAgainstBaseline) {
  SuiteResult r;
  r.kind = SuiteKind::Noise;
  RowResult base;
  base.entry.noise_sigma = 0.0;
  base.n_trials = 4;
  base.stats = {0.04, 0.2, 0.1};
  RowResult noisy = base;
  noisy.entry.noise_sigma = 0.07;
  noisy.stats = {0.08, 0.3, 0.05};
  noisy.success_rate = 0.5;
  r.rows = {base, noisy};
  const auto l = lines(table_csv(r));
  ASSERT_EQ(l.size(), 2u);
  EXPECT_EQ(l[1], "0.07,0.5,0,2,1.5,0.5,4");

  r.rows = {noisy};
  EXPECT_THROW(table_csv(r), std::invalid_argument);
}

TEST(TableCsv, SeenRowFormat) {
  SuiteResult r;
  r.kind = SuiteKind::Seen;
  RowResult row;
  row.entry = {"stairs", TerrainKind::Stairs, 0.6};
  row.n_trials = 60;
  row.successes = 30;
  row.success_rate = 0.5;
  row.ci_half_width = binomial_half_width(0.5, 60);
  row.stats = {0.01, 0.05, 0.02};
  r.rows = {row};
  const auto l = lines(table_csv(r));
  ASSERT_EQ(l.size(), 2u);
  EXPECT_EQ(l[0], table_header(SuiteKind::Seen));
  std::ostringstream ci;
  ci << std::setprecision(8) << row.ci_half_width;
  EXPECT_EQ(l[1], "stairs,0.6,0.5," + ci.str() + ",0.01,0.05,0.02,60");
}

TEST(ReportJson, CarriesEveryRow) {
  SuiteResult r;
  r.kind = SuiteKind::Ablation;
  RowResult row;
  row.entry = make_suite(SuiteKind::Ablation).entries[4];
  row.n_trials = 2;
  row.termination_counts.assign(7, 0);
  row.termination_counts[static_cast<int>(sw::env::Termination::Timeout)] = 2;
  r.rows = {row, row};
  const auto j = nlohmann::json::parse(report_json(r));
  EXPECT_EQ(j["suite"], "ablation");
  ASSERT_EQ(j["rows"].size(), 2u);
  EXPECT_EQ(j["rows"][0]["ablated_rays"], "8 9 10 11");
  EXPECT_EQ(j["rows"][0]["terminations"]["timeout"], 2);
}

TEST(MeanPolicy, RejectsWrongShapes) {
  sw::learn::PolicyLayout layout;
  layout.obs_dim = 10;
  EXPECT_THROW(mean_policy(sw::learn::make_zero_policy(layout)), sw::ShapeMismatchError);
  const PolicyFn f = mean_policy(sw::learn::make_zero_policy(sw::learn::PolicyLayout{}));
  EXPECT_EQ(f(sw::env::ObsVector::Ones()), sw::env::JointVector::Zero());
}
