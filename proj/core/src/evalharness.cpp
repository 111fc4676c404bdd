#include "sparsewalk/evalharness.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "sparsewalk/parallel.hpp"

namespace sparsewalk::evalharness {

using terrain::TerrainKind;

PolicyFn mean_policy(learn::PolicyParams params) {
  if (params.actor.input_dim() != env::kObsDim || params.actor.output_dim() != env::kActionDim ||
      params.critic.input_dim() != env::kObsDim) {
    throw ShapeMismatchError("policy maps " + std::to_string(params.actor.input_dim()) + " -> " +
                             std::to_string(params.actor.output_dim()) + ", expected " +
                             std::to_string(env::kObsDim) + " -> " +
                             std::to_string(env::kActionDim));
  }
  auto shared = std::make_shared<const learn::Mlp>(std::move(params.actor));
  return [shared](const env::ObsVector& obs) -> env::JointVector {
    const learn::Matrix out = learn::mlp_forward(*shared, obs);
    return out;
  };
}

ErrorStats error_stats(const std::vector<double>& series) {
  if (series.empty()) {
    throw std::invalid_argument("error_stats needs a non-empty series");
  }
  const double n = static_cast<double>(series.size());
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double v : series) {
    sum += v;
    sum_sq += v * v;
  }
  ErrorStats s;
  s.mean = sum / n;
  s.mse = sum_sq / n;
  double var = 0.0;
  for (double v : series) {
    var += (v - s.mean) * (v - s.mean);
  }
  s.std = std::sqrt(var / n);
  return s;
}

TrialResult run_trial(const PolicyFn& policy, const env::EnvConfig& cfg, const TrialSpec& spec,
                      std::vector<env::TraceRow>* trace) {
  env::EnvConfig trial_cfg = cfg;
  trial_cfg.terminate_on_goal = true;
  env::Episode ep(trial_cfg, spec.task, spec.seed, spec.noise_sigma, spec.ablation);
  ep.record_trace(trace != nullptr);
  const double x0 = ep.state().x();
  TrialResult r;
  while (!ep.done()) {
    const env::JointVector action = policy(ep.observation());
    const auto step = ep.step(env::action_to_target(action, cfg.model, cfg.action_scale));
    r.vbar_x.push_back(step.info.vbar_x);
  }
  r.success = ep.success();
  r.reason = ep.reason();
  r.steps = ep.steps();
  r.distance = ep.state().x() - x0;
  r.duration = ep.state().time;
  if (!r.vbar_x.empty()) {
    r.stats = error_stats(r.vbar_x);
  }
  if (trace) {
    *trace = ep.trace();
  }
  return r;
}

TrialResult run_trial(const learn::PolicyParams& policy, const env::EnvConfig& cfg,
                      const TrialSpec& spec) {
  return run_trial(mean_policy(policy), cfg, spec);
}

std::string_view to_string(SuiteKind kind) {
  switch (kind) {
    case SuiteKind::Seen: return "seen";
    case SuiteKind::Noise: return "noise";
    case SuiteKind::Ablation: return "ablation";
    case SuiteKind::Unseen: return "unseen";
  }
  return "unknown";
}

std::optional<SuiteKind> suite_from_string(std::string_view name) {
  for (SuiteKind k : {SuiteKind::Seen, SuiteKind::Noise, SuiteKind::Ablation, SuiteKind::Unseen}) {
    if (to_string(k) == name) {
      return k;
    }
  }
  return std::nullopt;
}

Suite seen_suite(int n_trials) {
  Suite s{SuiteKind::Seen, {}};
  for (TerrainKind kind : {TerrainKind::Stairs, TerrainKind::Ramp, TerrainKind::Step}) {
    for (double v : {0.7, 0.6, 0.4}) {
      s.entries.push_back({std::string(terrain::to_string(kind)), kind, v, 0.0, {}, n_trials});
    }
  }
  for (double v : {0.7, -0.7, 0.5, -0.5}) {
    s.entries.push_back({"flat", TerrainKind::Flat, v, 0.0, {}, n_trials});
  }
  return s;
}

Suite noise_suite(int n_trials) {
  Suite s{SuiteKind::Noise, {}};
  s.entries.push_back({"stairs", TerrainKind::Stairs, 0.6, 0.0, {}, n_trials});
  for (double sigma : kNoiseLevels) {
    s.entries.push_back({"stairs", TerrainKind::Stairs, 0.6, sigma, {}, n_trials});
  }
  return s;
}

Suite ablation_suite(int n_trials) {
  Suite s{SuiteKind::Ablation, {}};
  const auto single = [&](int ray) {
    raysensor::RayMask m;
    m.set(ray - 1);
    s.entries.push_back({"stairs", TerrainKind::Stairs, 0.6, 0.0, m, n_trials});
  };
  for (int ray = 8; ray <= 11; ++ray) {
    single(ray);
  }
  raysensor::RayMask joint;
  for (int ray = 8; ray <= 11; ++ray) {
    joint.set(ray - 1);
  }
  s.entries.push_back({"stairs", TerrainKind::Stairs, 0.6, 0.0, joint, n_trials});
  for (int ray = 1; ray <= 7; ++ray) {
    single(ray);
  }
  return s;
}

Suite unseen_suite(int n_trials) {
  Suite s{SuiteKind::Unseen, {}};
  const double v = kUnseenVelocity;
  const double sigma = kUnseenNoise;
  s.entries.push_back({"barriers", TerrainKind::Barriers, v, sigma, {}, n_trials});
  s.entries.push_back({"ditches", TerrainKind::Ditches, v, sigma, {}, n_trials});
  s.entries.push_back(
      {"alternating_stairs_full", TerrainKind::AlternatingStairs, v, sigma, {}, n_trials});
  s.entries.push_back({"alternating_stairs_first_block", TerrainKind::AlternatingStairs, v, sigma,
                       {}, n_trials, true});
  return s;
}

Suite make_suite(SuiteKind kind, int n_trials) {
  if (n_trials < 1) {
    throw std::invalid_argument("trials must be at least 1");
  }
  switch (kind) {
    case SuiteKind::Seen: return seen_suite(n_trials);
    case SuiteKind::Noise: return noise_suite(n_trials);
    case SuiteKind::Ablation: return ablation_suite(n_trials);
    case SuiteKind::Unseen: return unseen_suite(n_trials);
  }
  throw std::invalid_argument("unknown suite");
}

Suite apply_overrides(Suite suite, const SuiteOverrides& o) {
  if (o.noise_sigma && !(*o.noise_sigma >= 0.0)) {
    throw std::invalid_argument("noise sigma must be non-negative");
  }
  for (auto& e : suite.entries) {
    if (o.noise_sigma) {
      e.noise_sigma = *o.noise_sigma;
    }
    if (o.ablation) {
      e.ablation = *o.ablation;
    }
  }
  return suite;
}

TrialSpec make_trial(const SuiteEntry& entry, const EvalRanges& ranges, Rng& rng) {
  TrialSpec spec;
  spec.noise_sigma = entry.noise_sigma;
  spec.ablation = entry.ablation;
  spec.task.v_ref_x = entry.v_ref_x;
  switch (entry.kind) {
    case TerrainKind::Flat:
    case TerrainKind::Step:
    case TerrainKind::Ramp:
    case TerrainKind::Stairs:
      spec.task.terrain = curriculum::sample_terrain(entry.kind, ranges.terrain, rng);
      break;
    case TerrainKind::Barriers:
    case TerrainKind::Ditches:
      spec.task.terrain.kind = entry.kind;
      spec.task.terrain.start_x =
          std::uniform_real_distribution<double>(ranges.terrain.start_x.lo,
                                                 ranges.terrain.start_x.hi)(rng);
      break;
    case TerrainKind::AlternatingStairs: {
      spec.task.terrain.kind = entry.kind;
      spec.task.terrain.start_x =
          std::uniform_real_distribution<double>(ranges.terrain.start_x.lo,
                                                 ranges.terrain.start_x.hi)(rng);
      std::uniform_real_distribution<double> run(ranges.alternating_run.lo,
                                                 ranges.alternating_run.hi);
      spec.task.terrain.params.stair_run_sequence.clear();
      for (int k = 0; k < 2 * terrain::kAlternatingTreadsPerBlock; ++k) {
        spec.task.terrain.params.stair_run_sequence.push_back(run(rng));
      }
      break;
    }
  }
  spec.task.terrain_seed = rng();
  spec.seed = rng();
  if (entry.first_block_goal) {
    Rng terrain_rng = make_rng(spec.task.terrain_seed);
    spec.task.goal_x = terrain::build_terrain(spec.task.terrain, terrain_rng).first_block_end_x();
  }
  return spec;
}

double binomial_half_width(double p, int n) {
  if (n < 1) {
    throw std::invalid_argument("binomial_half_width needs n >= 1");
  }
  return 1.96 * std::sqrt(p * (1.0 - p) / n);
}

SuiteResult run_suite(const PolicyFn& policy, const env::EnvConfig& cfg, const Suite& suite,
                      std::uint64_t master_seed, int threads, const EvalRanges& ranges,
                      const std::string& record_dir) {
  SuiteResult out;
  out.kind = suite.kind;
  for (std::size_t r = 0; r < suite.entries.size(); ++r) {
    const SuiteEntry& entry = suite.entries[r];
    if (entry.n_trials < 1) {
      throw std::invalid_argument("suite entry needs at least one trial");
    }
    const std::uint64_t row_seed = mix_seed(master_seed, r);
    std::vector<TrialResult> trials(entry.n_trials);
    parallel_for(entry.n_trials, threads, [&](int i) {
      Rng rng = make_rng(row_seed, static_cast<std::uint64_t>(i));
      const TrialSpec spec = make_trial(entry, ranges, rng);
      if (record_dir.empty()) {
        trials[i] = run_trial(policy, cfg, spec);
      } else {
        std::vector<env::TraceRow> trace;
        trials[i] = run_trial(policy, cfg, spec, &trace);
        std::ofstream f(record_dir + "/" + std::string(to_string(suite.kind)) + "_row" +
                        std::to_string(r) + "_trial" + std::to_string(i) + ".csv");
        f << env::trace_csv(trace);
      }
    });

    RowResult row;
    row.entry = entry;
    row.n_trials = entry.n_trials;
    row.termination_counts.assign(static_cast<int>(env::Termination::Goal) + 1, 0);
    std::vector<double> pooled;
    for (const auto& t : trials) {
      row.successes += t.success ? 1 : 0;
      ++row.termination_counts[static_cast<int>(t.reason)];
      pooled.insert(pooled.end(), t.vbar_x.begin(), t.vbar_x.end());
    }
    row.success_rate = static_cast<double>(row.successes) / row.n_trials;
    row.ci_half_width = binomial_half_width(row.success_rate, row.n_trials);
    if (!pooled.empty()) {
      row.stats = error_stats(pooled);
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

const std::string& table_header(SuiteKind kind) {
  static const std::string seen =
      "task,v_ref_x,success_rate,ci_half_width,vbar_x_mse,vbar_x_mean,vbar_x_std,n_trials";
  static const std::string noise =
      "noise_sigma,success_rate,ci_half_width,ratio_vbar_x_mse,ratio_vbar_x_mean,"
      "ratio_vbar_x_std,n_trials";
  static const std::string ablation =
      "ablated_rays,success_rate,ci_half_width,vbar_x_mse,vbar_x_mean,vbar_x_std,n_trials";
  static const std::string unseen =
      "terrain,success_rate,ci_half_width,vbar_x_mse,vbar_x_mean,vbar_x_std,n_trials";
  switch (kind) {
    case SuiteKind::Seen: return seen;
    case SuiteKind::Noise: return noise;
    case SuiteKind::Ablation: return ablation;
    case SuiteKind::Unseen: return unseen;
  }
  throw std::invalid_argument("unknown suite");
}

namespace {

double ratio(double num, double den) {
  return den == 0.0 ? std::numeric_limits<double>::quiet_NaN() : num / den;
}

const RowResult* noise_baseline(const SuiteResult& result) {
  for (const auto& row : result.rows) {
    if (row.entry.noise_sigma == 0.0) {
      return &row;
    }
  }
  return nullptr;
}

}  // namespace

std::string table_csv(const SuiteResult& result) {
  std::ostringstream out;
  out << std::setprecision(8);
  out << table_header(result.kind) << '\n';
  const RowResult* base = result.kind == SuiteKind::Noise ? noise_baseline(result) : nullptr;
  if (result.kind == SuiteKind::Noise && !base) {
    throw std::invalid_argument("noise suite lacks a noise-free baseline row");
  }
  for (const auto& row : result.rows) {
    const auto& s = row.stats;
    switch (result.kind) {
      case SuiteKind::Seen:
        out << row.entry.label << ',' << row.entry.v_ref_x << ',';
        break;
      case SuiteKind::Noise:
        if (&row == base) {
          continue;
        }
        out << row.entry.noise_sigma << ',';
        break;
      case SuiteKind::Ablation:
        out << raysensor::format_ray_list(row.entry.ablation) << ',';
        break;
      case SuiteKind::Unseen:
        out << row.entry.label << ',';
        break;
    }
    out << row.success_rate << ',' << row.ci_half_width << ',';
    if (base) {
      out << ratio(s.mse, base->stats.mse) << ',' << ratio(s.mean, base->stats.mean) << ','
          << ratio(s.std, base->stats.std);
    } else {
      out << s.mse << ',' << s.mean << ',' << s.std;
    }
    out << ',' << row.n_trials << '\n';
  }
  return out.str();
}

std::string report_json(const SuiteResult& result) {
  nlohmann::ordered_json j;
  j["suite"] = std::string(to_string(result.kind));
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : result.rows) {
    nlohmann::ordered_json r;
    r["label"] = row.entry.label;
    r["terrain"] = std::string(terrain::to_string(row.entry.kind));
    r["v_ref_x"] = row.entry.v_ref_x;
    r["noise_sigma"] = row.entry.noise_sigma;
    r["ablated_rays"] = raysensor::format_ray_list(row.entry.ablation);
    r["first_block_goal"] = row.entry.first_block_goal;
    r["n_trials"] = row.n_trials;
    r["successes"] = row.successes;
    r["success_rate"] = row.success_rate;
    r["ci_half_width"] = row.ci_half_width;
    r["vbar_x"] = {{"mse", row.stats.mse}, {"mean", row.stats.mean}, {"std", row.stats.std}};
    nlohmann::ordered_json reasons;
    for (std::size_t k = 0; k < row.termination_counts.size(); ++k) {
      reasons[std::string(env::to_string(static_cast<env::Termination>(k)))] =
          row.termination_counts[k];
    }
    r["terminations"] = reasons;
    j["rows"].push_back(r);
  }
  return j.dump(2) + "\n";
}

}  // namespace sparsewalk::evalharness
