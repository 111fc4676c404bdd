// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.
// Usage: acceptance [criterion numbers...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "oracles.hpp"
#include "sparsewalk/curriculum.hpp"
#include "sparsewalk/dynamics.hpp"
#include "sparsewalk/env.hpp"
#include "sparsewalk/evalharness.hpp"
#include "sparsewalk/learn/ppo.hpp"
#include "sparsewalk/raysensor.hpp"
#include "sparsewalk/trainer.hpp"

namespace sw = sparsewalk;
namespace fs = std::filesystem;

namespace {

constexpr double kDeg = sw::kPi / 180.0;

// Pinned tolerances.
constexpr double kRayGapTol = 1e-9;
constexpr double kRewardTol = 1e-12;
constexpr int kRaycastCases = 1000;
constexpr double kMarchStep = 1e-4;
constexpr double kRaycastTol = 1e-3;
constexpr int kGradientNets = 20;
constexpr double kGradientRelTol = 1e-4;
constexpr int kGaeEpisodes = 100;
constexpr double kGaeTol = 1e-10;
constexpr double kFreeFallTol = 1e-9;
constexpr double kMomentumTol = 1e-9;
constexpr double kPenetrationLimit = 5e-3;
constexpr double kDriftLimit = 1e-2;
constexpr int kCurriculumSamples = 100000;
constexpr int kSmokeSeeds = 3;
constexpr int kSmokeUpdates = 300;
constexpr int kSmokeEvalTrials = 20;
constexpr double kSmokeVelocity = 0.5;
constexpr double kSmokeMaxError = 0.3;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(double v, int precision = 6) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "sparsewalk");
  std::ostringstream out;
  std::ostringstream err;
  const int code = sw::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("sparsewalk_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// 1. Ray design guide.
Outcome ray_design() {
  Outcome o;
  const int n = sw::raysensor::min_ray_count(0.5, 0.055, 60 * kDeg);
  const CliRun r = run_cli({"raydesign", "--height", "0.5", "--foot", "0.055", "--fov", "60"});
  if (r.code != 0) return {false, "raydesign exited with " + std::to_string(r.code)};
  std::istringstream in(r.out);
  std::string line;
  int printed_n = -1;
  double gap12 = std::nan("");
  while (std::getline(in, line)) {
    if (line.rfind("N=", 0) == 0) printed_n = std::stoi(line.substr(2));
    if (line.rfind("2,", 0) == 0) gap12 = std::stod(line.substr(line.rfind(',') + 1));
  }
  const double expected = 0.5 * std::tan(6 * kDeg);
  o.pass = n == 11 && printed_n == 11 && std::abs(gap12 - expected) <= kRayGapTol;
  o.detail = "N=" + std::to_string(n) + " printed N=" + std::to_string(printed_n) +
             " d12=" + fmt(gap12, 17) + " expected " + fmt(expected, 17);
  return o;
}

// 2. Reward formulas.
Outcome reward_formulas() {
  using namespace sw::env;
  const RewardWeights w;
  struct Case {
    const char* name;
    double got;
    double want;
  };
  JointVector tau = JointVector::Zero();
  tau[0] = 6.0;
  tau[5] = 8.0;  // |tau|^2 = 100
  JointVector qdot = JointVector::Zero();
  qdot[2] = 1.0;
  qdot[3] = 3.0;  // |qdot|^2 = 10
  JointVector qdot_perm = JointVector::Zero();
  qdot_perm[7] = 1.0;
  qdot_perm[0] = 3.0;

  sw::dynamics::RobotModel model;
  sw::dynamics::RobotState still = sw::dynamics::nominal_state(model);
  still.tau.setZero();
  Task stand;
  sw::dynamics::RobotState pushing = still;
  pushing.tau = tau;

  const std::vector<Case> cases{
      {"torque zero", reward_torque(JointVector::Zero(), w), 0.0},
      {"torque |tau|^2=100", reward_torque(tau, w), -0.01},
      {"torque homogeneity", reward_torque(2 * tau, w), 4 * reward_torque(tau, w)},
      {"jointvel zero", reward_jointvel(JointVector::Zero(), w), 0.0},
      {"jointvel |qdot|^2=10", reward_jointvel(qdot, w), -0.001},
      {"jointvel permutation", reward_jointvel(qdot_perm, w), reward_jointvel(qdot, w)},
      {"orientation level", reward_orientation(0, 0, w), 0.0},
      {"orientation pi/2", reward_orientation(0, sw::kPi / 2, w), -0.025},
      {"orientation sign", reward_orientation(0, -0.7, w), reward_orientation(0, 0.7, w)},
      {"velocity perfect", reward_velocity({0.6, 0}, {0.6, 0}, w), 1.0},
      {"velocity standing", reward_velocity({0.6, 0}, {0, 0}, w), 0.0},
      {"velocity clipped task", reward_velocity({0, 0}, {0.15, 0}, w), 0.0},
      {"yaw aligned", reward_yaw(0.3, 0.3, w), 0.0},
      {"yaw clipped", reward_yaw(0.0, 0.5 * sw::kPi, w), -1.5},
      {"yaw 0.1 pi", reward_yaw(0.0, 0.1 * sw::kPi, w), -0.5},
      {"total standing", total_reward(still, stand, w), 1.0},
      {"total torque 100", total_reward(pushing, stand, w), 0.99},
  };
  Outcome o;
  int failed = 0;
  for (const auto& c : cases) {
    if (!(std::abs(c.got - c.want) <= kRewardTol)) {
      ++failed;
      o.detail += std::string(c.name) + "=" + fmt(c.got, 17) + " ";
    }
  }
  o.pass = failed == 0;
  o.detail = std::to_string(cases.size() - failed) + "/" + std::to_string(cases.size()) +
             " examples within " + fmt(kRewardTol) + (failed ? "; failed: " + o.detail : "");
  return o;
}

// 3. Raycast against a marching oracle on every terrain kind.
Outcome raycast_oracle() {
  sw::Rng rng = sw::make_rng(2024);
  std::uniform_real_distribution<double> x(-0.5, 12.0);
  std::uniform_real_distribution<double> lift(0.05, 1.0);
  std::uniform_real_distribution<double> pitch(-0.5, 0.5);
  std::uniform_int_distribution<int> ray(0, sw::raysensor::kDefaultRays - 1);
  std::uniform_real_distribution<double> h(0.10, 0.20);
  std::uniform_real_distribution<double> run(0.20, 0.55);
  const sw::raysensor::RayConfig cfg;
  const auto dirs = sw::raysensor::ray_directions(cfg);
  double worst = 0.0;
  for (int i = 0; i < kRaycastCases; ++i) {
    sw::terrain::TerrainSpec spec;
    spec.kind = static_cast<sw::terrain::TerrainKind>(i % 7);
    spec.start_x = std::uniform_real_distribution<double>(1.0, 2.0)(rng);
    spec.params.step_height = h(rng);
    spec.params.stair_rise = h(rng);
    spec.params.ramp_slope = std::uniform_real_distribution<double>(0.0997, 0.1974)(rng);
    for (int k = 0; k < 2 * sw::terrain::kAlternatingTreadsPerBlock; ++k) {
      spec.params.stair_run_sequence.push_back(run(rng));
    }
    const auto field = sw::terrain::build_terrain(spec, rng);
    const double ox = x(rng);
    const sw::raysensor::Vec2 origin{ox, field.height_at(ox) + lift(rng)};
    const double p = pitch(rng);
    const sw::raysensor::Vec2 d0 = dirs[ray(rng)];
    // Body-frame ray rotated by the trunk pitch (nose-down positive).
    const sw::raysensor::Vec2 dir{std::cos(p) * d0.x + std::sin(p) * d0.z,
                                  -std::sin(p) * d0.x + std::cos(p) * d0.z};
    const double got = sw::raysensor::raycast(field, origin, dir, cfg.clip_min, cfg.clip_max);
    const double want =
        sw::oracle::march_raycast(field, origin, dir, cfg.clip_min, cfg.clip_max, kMarchStep);
    worst = std::max(worst, std::abs(got - want));
  }
  return {worst <= kRaycastTol, std::to_string(kRaycastCases) + " cases over 7 terrain kinds, max |error| " +
                                    fmt(worst) + " m (limit " + fmt(kRaycastTol) + ")"};
}

// 4. Gradient check: weights, biases and log_std through the full PPO loss.
Outcome gradient_check() {
  using namespace sw::learn;
  sw::Rng rng = sw::make_rng(77);
  std::uniform_int_distribution<int> width(2, 9);
  std::uniform_int_distribution<int> depth(1, 3);
  std::normal_distribution<double> g(0.0, 1.0);
  double worst = 0.0;
  for (int net = 0; net < kGradientNets; ++net) {
    PolicyLayout layout;
    layout.obs_dim = width(rng);
    layout.action_dim = width(rng);
    layout.hidden.clear();
    for (int k = depth(rng); k > 0; --k) layout.hidden.push_back(width(rng));
    PolicyParams p = make_policy(layout, rng);
    for_each_tensor(p, [&](const std::string&, Matrix& m) {
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] += 0.4 * g(rng);
    });
    const int n = 12;
    Batch b;
    b.obs.resize(layout.obs_dim, n);
    b.actions.resize(layout.action_dim, n);
    b.logp_old.resize(n);
    b.advantages.resize(n);
    b.returns.resize(n);
    for (Eigen::Index i = 0; i < b.obs.size(); ++i) b.obs.data()[i] = g(rng);
    for (Eigen::Index i = 0; i < b.actions.size(); ++i) b.actions.data()[i] = g(rng);
    for (int i = 0; i < n; ++i) {
      b.advantages[i] = g(rng);
      b.returns[i] = g(rng);
    }
    // Old log-probabilities far from the current ones keep every sample away from the clip kinks.
    const Matrix mean = mlp_forward(p.actor, b.obs);
    for (int i = 0; i < n; ++i) {
      const double logp =
          gaussian_logprob_entropy(mean.col(i), p.log_std.col(0), b.actions.col(i)).first;
      b.logp_old[i] = logp + (i % 3 == 0 ? 0.0 : (i % 3 == 1 ? 1.0 : -1.0));
    }
    PPOConfig cfg;
    cfg.entropy_coef = 0.05;
    PolicyParams grad = zeros_like(p);
    ppo_loss(b, p, cfg, &grad);
    worst = std::max(worst, sw::oracle::max_gradient_error(
                                p, grad, [&](const PolicyParams& q) { return ppo_loss(b, q, cfg).loss; }));
  }
  return {worst < kGradientRelTol, std::to_string(kGradientNets) +
                                       " random networks, max relative error " + fmt(worst) +
                                       " (limit " + fmt(kGradientRelTol) + ")"};
}

// 5. GAE against the brute-force discounted sum.
Outcome gae_oracle() {
  sw::Rng rng = sw::make_rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<int> len(1, 10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::bernoulli_distribution done(0.15);
  double worst = 0.0;
  int checks = 0;
  for (int ep = 0; ep < kGaeEpisodes; ++ep) {
    const int n = len(rng);
    std::vector<double> r(n), v(n);
    std::vector<std::uint8_t> d(n);
    sw::learn::Vector rv(n), vv(n);
    for (int t = 0; t < n; ++t) {
      rv[t] = r[t] = g(rng);
      vv[t] = v[t] = g(rng);
      d[t] = done(rng) ? 1 : 0;
    }
    const double boot = g(rng);
    const double gamma = 0.9 + 0.1 * u(rng);
    for (double lambda : {0.0, 1.0, 0.95, u(rng)}) {
      const auto ref = sw::oracle::brute_force_advantages(r, v, d, boot, gamma, lambda);
      const auto [adv, ret] = sw::learn::gae(rv, vv, d, boot, gamma, lambda);
      for (int t = 0; t < n; ++t) {
        worst = std::max(worst, std::abs(adv[t] - ref[t]));
        worst = std::max(worst, std::abs(ret[t] - (ref[t] + v[t])));
        ++checks;
      }
    }
  }
  return {worst <= kGaeTol, std::to_string(kGaeEpisodes) + " episodes, lambda in {0, 1, 0.95, random}, " +
                                std::to_string(checks) + " entries, max |error| " + fmt(worst)};
}

// 6. Dynamics sanity.
Outcome dynamics_sanity() {
  using namespace sw::dynamics;
  const sw::terrain::HeightField flat;
  const ContactParams contact;

  RobotModel passive;
  passive.kp = passive.kd = 0.0;
  passive.hip_min = passive.knee_min = -100.0;
  passive.hip_max = passive.knee_max = 100.0;
  RobotState s = nominal_state(passive);
  s.q[1] = 10.0;
  const RobotState fallen = advance(s, s.joints(), flat, passive, contact, 40);
  const double dvz = fallen.v[1] - s.v[1];

  double momentum_err = 0.0;
  sw::Rng rng = sw::make_rng(6);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    RobotState a = nominal_state(passive);
    for (int i = 2; i < kDof; ++i) a.q[i] += 0.3 * u(rng);
    for (int i = 0; i < kDof; ++i) a.v[i] = u(rng);
    a.q[1] = 50.0;
    for (int k = 0; k < 400; ++k) {
      const double before = horizontal_momentum(a, passive);
      a = step(a, JointVector::Zero(), flat, passive, contact);
      momentum_err = std::max(momentum_err, std::abs(horizontal_momentum(a, passive) - before));
    }
  }

  const RobotModel model;
  RobotState d = nominal_state(model);
  d.q[1] += 0.01;
  const JointVector target = nominal_joint_pose(model);
  double penetration = 0.0;
  double z_lo = 1e9, z_hi = -1e9, x_lo = 1e9, x_hi = -1e9;
  const int steps = static_cast<int>(std::lround(5.0 / kPhysicsDt));
  const int settle = static_cast<int>(std::lround(1.0 / kPhysicsDt));
  for (int k = 0; k < steps; ++k) {
    d = step(d, target, flat, model, contact);
    for (const auto& foot : foot_positions(d.q, model)) penetration = std::max(penetration, -foot.y());
    if (k >= settle) {
      z_lo = std::min(z_lo, d.z());
      z_hi = std::max(z_hi, d.z());
      x_lo = std::min(x_lo, d.x());
      x_hi = std::max(x_hi, d.x());
    }
  }
  const double drift = z_hi - z_lo;
  Outcome o;
  o.pass = std::abs(dvz + 0.981) <= kFreeFallTol && momentum_err <= kMomentumTol &&
           penetration < kPenetrationLimit && drift < kDriftLimit;
  o.detail = "free-fall dv_z=" + fmt(dvz, 15) + ", momentum drift/step " + fmt(momentum_err) +
             ", penetration " + fmt(penetration * 1e3, 3) + " mm, trunk drift " +
             fmt(drift * 1e3, 3) + " mm over 1-5 s (horizontal sway " + fmt((x_hi - x_lo) * 1e3, 3) +
             " mm, not gated)";
  return o;
}

// 7. Curriculum distribution and velocity clipping.
Outcome curriculum_distribution() {
  using namespace sw::curriculum;
  using sw::terrain::TerrainKind;
  const Stage alpha = make_stage(StageName::StageAlpha);
  sw::Rng rng = sw::make_rng(7);
  // Order (Step, Ramp, Stairs, Flat).
  const TerrainKind order[] = {TerrainKind::Step, TerrainKind::Ramp, TerrainKind::Stairs,
                               TerrainKind::Flat};
  std::vector<long> counts(4, 0);
  int clip_violations = 0;
  for (int i = 0; i < kCurriculumSamples; ++i) {
    const sw::env::Task t = sample_task(alpha, rng);
    for (int k = 0; k < 4; ++k) counts[k] += t.terrain.kind == order[k] ? 1 : 0;
    const double v = t.v_ref_x;
    if (t.terrain.kind == TerrainKind::Flat) {
      if (v != 0.0 && std::abs(v) < sw::env::kVelocityClip) ++clip_violations;
    } else if (v < sw::env::kVelocityClip || v > sw::env::kMaxReferenceSpeed) {
      ++clip_violations;
    }
  }
  sw::Rng vrng = sw::make_rng(8);
  std::uniform_real_distribution<double> raw(-0.7, 0.7);
  int zeros = 0;
  for (int i = 0; i < kCurriculumSamples; ++i) {
    const double v = raw(vrng);
    const double c = clip_reference_velocity(v);
    if (std::abs(v) < 0.15 ? c != 0.0 : c != v) ++clip_violations;
    zeros += c == 0.0 ? 1 : 0;
  }
  const double chi2 = chi_squared(counts, {0.1, 0.1, 0.5, 0.3});
  Outcome o;
  o.pass = chi2 < kChiSquared3At001 && clip_violations == 0;
  o.detail = "chi2=" + fmt(chi2) + " (critical " + fmt(kChiSquared3At001) + ") counts " +
             std::to_string(counts[0]) + "/" + std::to_string(counts[1]) + "/" +
             std::to_string(counts[2]) + "/" + std::to_string(counts[3]) +
             ", clipping violations " + std::to_string(clip_violations) + " (" +
             std::to_string(zeros) + " of " + std::to_string(kCurriculumSamples) +
             " raw velocities clipped to 0)";
  return o;
}

// 8. Training smoke test, best of three seeds.
Outcome training_smoke() {
  Outcome o;
  o.pass = false;
  for (int seed = 1; seed <= kSmokeSeeds; ++seed) {
    const auto start = std::chrono::steady_clock::now();
    sw::TrainConfig cfg;
    cfg.warmup_only = true;
    cfg.max_updates = kSmokeUpdates;
    sw::Trainer trainer(cfg, static_cast<std::uint64_t>(seed));
    std::vector<double> returns;
    while (!trainer.finished()) returns.push_back(trainer.iterate().mean_return);
    const double minutes =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() / 60.0;

    const std::size_t k = std::min<std::size_t>(10, returns.size());
    double first = 0.0, last = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      first += returns[i] / k;
      last += returns[returns.size() - k + i] / k;
    }
    // Doubling relative to the starting magnitude; for a positive start this is last >= 2 first.
    const bool improved = last >= first + std::abs(first);

    const sw::evalharness::PolicyFn policy = sw::evalharness::mean_policy(trainer.params());
    const sw::evalharness::SuiteEntry entry{"flat", sw::terrain::TerrainKind::Flat,
                                            kSmokeVelocity, 0.0, {}, kSmokeEvalTrials};
    double error = 0.0;
    for (int i = 0; i < kSmokeEvalTrials; ++i) {
      sw::Rng rng = sw::make_rng(sw::mix_seed(1000 + seed, 0), static_cast<std::uint64_t>(i));
      const auto spec = sw::evalharness::make_trial(entry, {}, rng);
      const auto r = sw::evalharness::run_trial(policy, cfg.env, spec);
      double sum = 0.0;
      for (double v : r.vbar_x) sum += std::abs(v);
      error += (r.vbar_x.empty() ? kSmokeVelocity : sum / r.vbar_x.size()) / kSmokeEvalTrials;
    }
    const bool tracks = error <= kSmokeMaxError;

    std::ostringstream line;
    line << "seed " << seed << ": " << returns.size() << " updates in " << fmt(minutes, 3)
         << " min, return first10=" << fmt(first) << " last10=" << fmt(last)
         << (improved ? " (ok)" : " (short)") << ", flat v=0.5 mean|vbar_x|=" << fmt(error)
         << (tracks ? " (ok)" : " (short)");
    std::cout << "  " << line.str() << std::endl;
    o.detail = line.str();
    if (improved && tracks) {
      o.pass = true;
      break;
    }
  }
  return o;
}

// 9. Evaluation table schemas against golden headers.
Outcome eval_schema() {
  using namespace sw::evalharness;
  const std::vector<std::pair<SuiteKind, std::string>> golden{
      {SuiteKind::Seen,
       "task,v_ref_x,success_rate,ci_half_width,vbar_x_mse,vbar_x_mean,vbar_x_std,n_trials"},
      {SuiteKind::Noise,
       "noise_sigma,success_rate,ci_half_width,ratio_vbar_x_mse,ratio_vbar_x_mean,"
       "ratio_vbar_x_std,n_trials"},
      {SuiteKind::Ablation,
       "ablated_rays,success_rate,ci_half_width,vbar_x_mse,vbar_x_mean,vbar_x_std,n_trials"},
      {SuiteKind::Unseen,
       "terrain,success_rate,ci_half_width,vbar_x_mse,vbar_x_mean,vbar_x_std,n_trials"},
  };
  const std::vector<std::vector<std::string>> first_column{
      {"stairs", "stairs", "stairs", "ramp", "ramp", "ramp", "step", "step", "step", "flat",
       "flat", "flat", "flat"},
      {"0.01", "0.03", "0.07", "0.11", "0.15"},
      {"8", "9", "10", "11", "8 9 10 11", "1", "2", "3", "4", "5", "6", "7"},
      {"barriers", "ditches", "alternating_stairs_full", "alternating_stairs_first_block"},
  };
  // A stub policy that always falls over keeps every trial short.
  const PolicyFn stub = [](const sw::env::ObsVector&) {
    sw::env::JointVector a = sw::env::JointVector::Constant(-1.0);
    return a;
  };
  Outcome o;
  std::string problems;
  for (std::size_t s = 0; s < golden.size(); ++s) {
    const SuiteResult r = run_suite(stub, sw::env::EnvConfig{}, make_suite(golden[s].first, 1), 1);
    std::istringstream in(table_csv(r));
    std::string header;
    std::getline(in, header);
    if (header != golden[s].second) problems += std::string(to_string(golden[s].first)) + " header; ";
    std::vector<std::string> col;
    for (std::string line; std::getline(in, line);) {
      col.push_back(line.substr(0, line.find(',')));
      const auto fields = std::count(line.begin(), line.end(), ',');
      if (fields != std::count(header.begin(), header.end(), ',')) {
        problems += std::string(to_string(golden[s].first)) + " column count; ";
      }
    }
    if (col != first_column[s]) problems += std::string(to_string(golden[s].first)) + " rows; ";
  }

  // The same structure through the command-line tool on a real checkpoint.
  const fs::path dir = scratch_dir("schema");
  std::ofstream(dir / "smoke.json")
      << R"({"threads": 1, "ppo": {"n_envs": 2, "horizon": 8, "epochs": 1, "minibatches": 1},)"
      << R"( "training": {"max_updates": 1}})";
  const CliRun t = run_cli({"train", "-c", (dir / "smoke.json").string(), "-o", dir.string()});
  const CliRun e = run_cli({"eval", (dir / "checkpoint_final.swck").string(), "--trials", "1",
                            "-o", dir.string()});
  if (t.code != 0 || e.code != 0) {
    problems += "cli exit codes " + std::to_string(t.code) + "/" + std::to_string(e.code) + "; ";
  } else {
    for (const auto& [kind, header] : golden) {
      std::istringstream in(slurp(dir / ("eval_" + std::string(to_string(kind)) + ".csv")));
      std::string comment, line;
      std::getline(in, comment);
      std::getline(in, line);
      if (comment.rfind("# sparsewalk eval config_hash=", 0) != 0 || line != header) {
        problems += "cli " + std::string(to_string(kind)) + " table; ";
      }
    }
  }
  fs::remove_all(dir);
  o.pass = problems.empty();
  o.detail = o.pass ? "4 suites match golden headers and row structure (library and CLI)"
                    : problems;
  return o;
}

// 10. Determinism of train and eval outputs.
Outcome determinism() {
  const fs::path root = scratch_dir("determinism");
  const std::string cfg = (root / "smoke.json").string();
  std::ofstream(cfg) << R"({"seed": 11, "ppo": {"n_envs": 4, "horizon": 16, "epochs": 2,)"
                     << R"( "minibatches": 2}, "training": {"max_updates": 3}})";
  std::vector<std::string> mismatches;
  for (const char* run : {"a", "b"}) {
    const fs::path out = root / run;
    const CliRun t = run_cli({"train", "-c", cfg, "-o", out.string()});
    const CliRun e = run_cli({"eval", (out / "checkpoint_final.swck").string(), "-s", "noise",
                              "-s", "unseen", "--trials", "2", "-o", out.string()});
    if (t.code != 0 || e.code != 0) {
      fs::remove_all(root);
      return {false, "cli failed: " + t.err + e.err};
    }
  }
  int compared = 0;
  for (const auto& entry : fs::directory_iterator(root / "a")) {
    const auto name = entry.path().filename();
    ++compared;
    if (slurp(entry.path()) != slurp(root / "b" / name)) mismatches.push_back(name.string());
  }
  fs::remove_all(root);
  Outcome o;
  o.pass = mismatches.empty() && compared >= 7;
  o.detail = std::to_string(compared) + " artifacts compared byte for byte";
  for (const auto& m : mismatches) o.detail += ", differs: " + m;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"ray design guide", ray_design},
      {"reward formulas", reward_formulas},
      {"raycast oracle", raycast_oracle},
      {"gradient check", gradient_check},
      {"GAE oracle", gae_oracle},
      {"dynamics sanity", dynamics_sanity},
      {"curriculum distribution", curriculum_distribution},
      {"training smoke test", training_smoke},
      {"evaluation table schema", eval_schema},
      {"determinism", determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += o.pass ? 0 : 1;
    std::printf("CRITERION %d %s: %s (%.1fs) %s\n", id, criteria[i].first,
                o.pass ? "PASS" : "FAIL", secs, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
