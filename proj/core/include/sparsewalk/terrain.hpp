#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sparsewalk/common.hpp"

namespace sparsewalk::terrain {

enum class TerrainKind { Flat, Step, Ramp, Stairs, Barriers, Ditches, AlternatingStairs };

std::string_view to_string(TerrainKind kind);
std::optional<TerrainKind> terrain_kind_from_string(std::string_view name);

/// Horizontal width of the near-vertical segment that stands in for a vertical face.
inline constexpr double kFaceEpsilon = 1e-3;
inline constexpr double kRampLength = 3.0;
inline constexpr int kStairTreads = 5;
inline constexpr double kStairPlateau = 1.5;
inline constexpr int kAlternatingTreadsPerBlock = 4;
inline constexpr double kGoalMargin = 1.5;

struct TerrainParams {
  double step_height = 0.15;
  double ramp_slope = 0.15;  ///< inclination angle [rad]
  double stair_rise = 0.15;
  double stair_run = 0.30;
  std::vector<double> barrier_sizes{0.10, 0.15, 0.20};
  std::vector<double> ditch_gaps{0.05, 0.10, 0.15, 0.20, 0.30, 0.40};
  double ditch_height = 0.15;
  std::vector<double> stair_run_sequence;  ///< 2 * kAlternatingTreadsPerBlock runs

  bool operator==(const TerrainParams&) const = default;
};

struct TerrainSpec {
  TerrainKind kind = TerrainKind::Flat;
  double start_x = 1.5;  ///< beginning of the obstacle region
  TerrainParams params;

  bool operator==(const TerrainSpec&) const = default;
};

struct Knot {
  double x;
  double z;
};

/// Piecewise-linear elevation profile z(x) with constant extrapolation.
class HeightField {
 public:
  HeightField();  // flat ground
  /// Throws std::invalid_argument unless knot abscissae are strictly increasing.
  HeightField(std::vector<Knot> knots, double obstacle_end_x, double first_block_end_x);

  double height_at(double x) const;
  /// dz/dx of the segment containing x (0 outside the knot range).
  double slope_at(double x) const;

  const std::vector<Knot>& knots() const { return knots_; }
  double obstacle_end_x() const { return obstacle_end_x_; }
  /// End of the first stair block; equals obstacle_end_x() for single-block terrains.
  double first_block_end_x() const { return first_block_end_x_; }
  double goal_x() const { return obstacle_end_x_ + kGoalMargin; }

  /// Nearest point on the surface polyline to (x, z), searching within `radius` of x.
  /// Returns the surface point; the caller decides inside/outside from height_at().
  Knot closest_surface_point(double x, double z, double radius) const;

 private:
  std::vector<Knot> knots_;
  double obstacle_end_x_ = 0.0;
  double first_block_end_x_ = 0.0;
};

/// Throws std::invalid_argument on malformed specs (non-positive sizes, empty sequences,
/// start_x < 1).
void validate(const TerrainSpec& spec);

/// Realizes the spec as a heightfield. `rng` drives the spacing between barriers and
/// the lengths of ditch platforms; everything else is fixed by the spec.
HeightField build_terrain(const TerrainSpec& spec, Rng& rng);

/// Two-column (x,z) CSV with header.
std::string to_csv(const HeightField& field);

}  // namespace sparsewalk::terrain
