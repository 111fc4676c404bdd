#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <vector>

#include "sparsewalk/env.hpp"

namespace sparsewalk::curriculum {

enum class StageName { WarmUp, StageAlpha, StageGamma, Uniform };

std::string_view to_string(StageName name);
std::optional<StageName> stage_from_string(std::string_view name);

/// Training terrains in probability-vector order.
inline constexpr std::array<terrain::TerrainKind, 4> kTrainingTerrains{
    terrain::TerrainKind::Flat, terrain::TerrainKind::Step, terrain::TerrainKind::Ramp,
    terrain::TerrainKind::Stairs};

struct VelocityLaw {
  double lo = 0.0;
  double hi = 0.7;
  bool clip = true;  ///< apply clip_reference_velocity after sampling

  bool operator==(const VelocityLaw&) const = default;
};

struct Stage {
  StageName name = StageName::WarmUp;
  std::array<double, 4> terrain_probs{1.0, 0.0, 0.0, 0.0};  ///< Flat, Step, Ramp, Stairs
  VelocityLaw flat_velocity;
  VelocityLaw obstacle_velocity{0.15, 0.7, false};

  bool operator==(const Stage&) const = default;
};

Stage make_stage(StageName name);

/// Throws std::invalid_argument unless probabilities are non-negative and sum to 1 within 1e-12.
void validate(const Stage& stage);

struct Range {
  double lo;
  double hi;

  bool operator==(const Range&) const = default;
};

/// Per-task terrain parameter ranges.
struct TerrainRanges {
  Range step_height{0.10, 0.20};
  Range ramp_angle{0.0996686524911620, 0.1973955598498808};  // atan(0.1), atan(0.2)
  Range stair_rise{0.10, 0.20};
  double stair_run = 0.30;
  Range start_x{1.0, 2.0};

  bool operator==(const TerrainRanges&) const = default;
};

/// Returns 0 when |v| < 0.15, otherwise v.
double clip_reference_velocity(double v);

/// Terrain spec of `kind` with parameters drawn from `ranges`.
terrain::TerrainSpec sample_terrain(terrain::TerrainKind kind, const TerrainRanges& ranges,
                                    Rng& rng);

env::Task sample_task(const Stage& stage, Rng& rng, const TerrainRanges& ranges = {});

/// True exactly when the latest policy noise is at or below `threshold`.
bool should_advance(const std::vector<double>& noise_history, double threshold = 0.2);

struct CurriculumConfig {
  bool uniform_baseline = false;
  int stage_budget = 2000;  ///< updates before a stage is forced to advance
  double noise_threshold = 0.2;
  TerrainRanges ranges;

  bool operator==(const CurriculumConfig&) const = default;
};

void validate(const CurriculumConfig& cfg);

/// Stage progression WarmUp -> StageAlpha -> StageGamma, or a single Uniform stage.
class Curriculum {
 public:
  explicit Curriculum(const CurriculumConfig& cfg);

  const Stage& stage() const { return stage_; }
  int stage_index() const { return index_; }
  int updates_in_stage() const { return updates_in_stage_; }
  bool finished() const { return finished_; }
  const std::vector<double>& noise_history() const { return noise_; }

  enum class Event { None, Advanced, ForcedAdvance, Finished, ForcedFinish };

  /// Records one update's policy noise. Advances on threshold or budget; the last stage
  /// finishes instead of advancing.
  Event record_update(double policy_noise);

  /// Moves to `name`. Throws std::logic_error when `name` is not strictly later in the sequence.
  void enter(StageName name);

  env::Task sample(Rng& rng) const { return sample_task(stage_, rng, cfg_.ranges); }

 private:
  CurriculumConfig cfg_;
  std::vector<StageName> sequence_;
  int index_ = 0;
  Stage stage_;
  int updates_in_stage_ = 0;
  bool finished_ = false;
  std::vector<double> noise_;
};

/// Critical value of the chi-squared distribution with 3 degrees of freedom at p = 0.001.
inline constexpr double kChiSquared3At001 = 16.266236196238129;

/// Pearson chi-squared statistic of observed counts against expected probabilities.
double chi_squared(const std::vector<long>& counts, const std::vector<double>& probs);

}  // namespace sparsewalk::curriculum
