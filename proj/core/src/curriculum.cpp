#include "sparsewalk/curriculum.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sparsewalk::curriculum {

namespace {

constexpr std::pair<StageName, std::string_view> kStageNames[] = {
    {StageName::WarmUp, "warmup"},
    {StageName::StageAlpha, "alpha"},
    {StageName::StageGamma, "gamma"},
    {StageName::Uniform, "uniform"},
};

double uniform(Rng& rng, Range r) {
  return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
}

}  // namespace

std::string_view to_string(StageName name) {
  for (const auto& [n, s] : kStageNames) {
    if (n == name) {
      return s;
    }
  }
  return "unknown";
}

std::optional<StageName> stage_from_string(std::string_view name) {
  for (const auto& [n, s] : kStageNames) {
    if (s == name) {
      return n;
    }
  }
  return std::nullopt;
}

Stage make_stage(StageName name) {
  Stage s;
  s.name = name;
  switch (name) {
    case StageName::WarmUp:
      s.terrain_probs = {1.0, 0.0, 0.0, 0.0};
      s.flat_velocity = {0.0, 0.7, true};
      break;
    case StageName::StageAlpha:
      s.terrain_probs = {0.3, 0.1, 0.1, 0.5};
      s.flat_velocity = {0.0, 0.7, true};
      break;
    case StageName::StageGamma:
      s.terrain_probs = {0.3, 0.1, 0.1, 0.5};
      s.flat_velocity = {-0.7, 0.7, true};
      break;
    case StageName::Uniform:
      s.terrain_probs = {0.25, 0.25, 0.25, 0.25};
      s.flat_velocity = {-0.7, 0.7, true};
      break;
  }
  s.obstacle_velocity = {0.15, 0.7, false};
  return s;
}

void validate(const Stage& stage) {
  double sum = 0.0;
  for (double p : stage.terrain_probs) {
    if (!(p >= 0.0)) {
      throw std::invalid_argument("terrain probabilities must be non-negative");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument("terrain probabilities must sum to 1");
  }
  for (const VelocityLaw& law : {stage.flat_velocity, stage.obstacle_velocity}) {
    if (!(law.lo <= law.hi) || std::abs(law.lo) > env::kMaxReferenceSpeed ||
        std::abs(law.hi) > env::kMaxReferenceSpeed) {
      throw std::invalid_argument("velocity law must lie within [-0.7, 0.7]");
    }
  }
  if (stage.obstacle_velocity.lo < env::kVelocityClip) {
    throw std::invalid_argument("obstacle tasks need reference velocities of at least 0.15");
  }
}

double clip_reference_velocity(double v) { return std::abs(v) < env::kVelocityClip ? 0.0 : v; }

terrain::TerrainSpec sample_terrain(terrain::TerrainKind kind, const TerrainRanges& ranges,
                                    Rng& rng) {
  terrain::TerrainSpec spec;
  spec.kind = kind;
  spec.start_x = uniform(rng, ranges.start_x);
  switch (kind) {
    case terrain::TerrainKind::Step:
      spec.params.step_height = uniform(rng, ranges.step_height);
      break;
    case terrain::TerrainKind::Ramp:
      spec.params.ramp_slope = uniform(rng, ranges.ramp_angle);
      break;
    case terrain::TerrainKind::Stairs:
      spec.params.stair_rise = uniform(rng, ranges.stair_rise);
      spec.params.stair_run = ranges.stair_run;
      break;
    default:
      break;
  }
  return spec;
}

env::Task sample_task(const Stage& stage, Rng& rng, const TerrainRanges& ranges) {
  std::discrete_distribution<int> pick(stage.terrain_probs.begin(), stage.terrain_probs.end());
  const terrain::TerrainKind kind = kTrainingTerrains[pick(rng)];
  const VelocityLaw& law =
      kind == terrain::TerrainKind::Flat ? stage.flat_velocity : stage.obstacle_velocity;
  double v = std::uniform_real_distribution<double>(law.lo, law.hi)(rng);
  if (law.clip) {
    v = clip_reference_velocity(v);
  }
  env::Task task;
  task.terrain = sample_terrain(kind, ranges, rng);
  task.terrain_seed = rng();
  task.v_ref_x = v;
  return task;
}

bool should_advance(const std::vector<double>& noise_history, double threshold) {
  return !noise_history.empty() && noise_history.back() <= threshold;
}

void validate(const CurriculumConfig& cfg) {
  if (cfg.stage_budget < 1) {
    throw std::invalid_argument("stage_budget must be at least 1");
  }
  if (!(cfg.noise_threshold > 0)) {
    throw std::invalid_argument("noise_threshold must be positive");
  }
  const auto ok = [](Range r) { return std::isfinite(r.lo) && std::isfinite(r.hi) && r.lo <= r.hi; };
  const auto& r = cfg.ranges;
  if (!ok(r.step_height) || !ok(r.ramp_angle) || !ok(r.stair_rise) || !ok(r.start_x) ||
      r.step_height.lo <= 0 || r.ramp_angle.lo <= 0 || r.ramp_angle.hi >= kPi / 2 ||
      r.stair_rise.lo <= 0 || !(r.stair_run > 0) || r.start_x.lo < 1.0) {
    throw std::invalid_argument("terrain ranges are invalid");
  }
}

Curriculum::Curriculum(const CurriculumConfig& cfg) : cfg_(cfg) {
  validate(cfg_);
  if (cfg_.uniform_baseline) {
    sequence_ = {StageName::Uniform};
  } else {
    sequence_ = {StageName::WarmUp, StageName::StageAlpha, StageName::StageGamma};
  }
  stage_ = make_stage(sequence_.front());
}

Curriculum::Event Curriculum::record_update(double noise) {
  if (finished_) {
    return Event::None;
  }
  noise_.push_back(noise);
  ++updates_in_stage_;
  const bool threshold = should_advance(noise_, cfg_.noise_threshold);
  const bool budget = updates_in_stage_ >= cfg_.stage_budget;
  if (!threshold && !budget) {
    return Event::None;
  }
  if (index_ + 1 == static_cast<int>(sequence_.size())) {
    finished_ = true;
    return threshold ? Event::Finished : Event::ForcedFinish;
  }
  enter(sequence_[index_ + 1]);
  return threshold ? Event::Advanced : Event::ForcedAdvance;
}

void Curriculum::enter(StageName name) {
  for (int i = index_ + 1; i < static_cast<int>(sequence_.size()); ++i) {
    if (sequence_[i] == name) {
      index_ = i;
      stage_ = make_stage(name);
      updates_in_stage_ = 0;
      return;
    }
  }
  throw std::logic_error("stage '" + std::string(to_string(name)) +
                         "' is not ahead of the current stage");
}

double chi_squared(const std::vector<long>& counts, const std::vector<double>& probs) {
  if (counts.size() != probs.size()) {
    throw std::invalid_argument("chi_squared: counts and probabilities differ in length");
  }
  const double n = static_cast<double>(std::accumulate(counts.begin(), counts.end(), 0L));
  double stat = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double expected = n * probs[i];
    const double d = static_cast<double>(counts[i]) - expected;
    stat += d * d / expected;
  }
  return stat;
}

}  // namespace sparsewalk::curriculum
