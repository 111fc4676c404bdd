#pragma once

#include <bitset>
#include <string>
#include <vector>

#include "sparsewalk/common.hpp"
#include "sparsewalk/terrain.hpp"

namespace sparsewalk::raysensor {

inline constexpr int kMaxRays = 64;
inline constexpr int kDefaultRays = 11;

struct Vec2 {
  double x = 0.0;
  double z = 0.0;
};

/// Rays are numbered from 1 (straight down) to n_rays (forward edge of the field of view).
/// Bit i-1 of a mask refers to ray i.
using RayMask = std::bitset<kMaxRays>;

struct RayConfig {
  int n_rays = kDefaultRays;
  double fov = kPi / 3.0;             ///< total vertical field of view [rad]
  Vec2 mount_offset{0.25, 0.05};      ///< sensor origin in the trunk frame [m]
  double clip_min = 0.1;
  double clip_max = 8.0;

  bool operator==(const RayConfig& o) const {
    return n_rays == o.n_rays && fov == o.fov && mount_offset.x == o.mount_offset.x &&
           mount_offset.z == o.mount_offset.z && clip_min == o.clip_min &&
           clip_max == o.clip_max;
  }
};

/// Throws std::invalid_argument when the config breaks its invariants.
void validate(const RayConfig& cfg);

struct ExteroState {
  std::vector<double> distances;
  double noise_sigma = 0.0;
  RayMask ablation_mask;
};

/// Smallest N >= 2 for which the flat-ground gap between ray 1 and ray 2,
/// h * tan(fov / (N - 1)), is below the effective foot size.
int min_ray_count(double height, double foot_size, double fov);

/// Unit direction vectors in the sensor frame (x forward, z up). Ray i is rotated
/// forward from straight down by (i - 1) * fov / (N - 1).
std::vector<Vec2> ray_directions(const RayConfig& cfg);

/// Distance along `dir` to the first terrain intersection, clamped to [clip_min, clip_max].
/// Exact for piecewise-linear terrain.
double raycast(const terrain::HeightField& field, Vec2 origin, Vec2 dir, double clip_min,
               double clip_max);

struct TrunkPose {
  double x = 0.0;
  double z = 0.0;
  double pitch = 0.0;  ///< counter-clockwise in the x-z plane; positive lifts the nose
};

Vec2 sensor_origin(const TrunkPose& pose, const RayConfig& cfg);

/// Raycasts every ray of the strapdown sensor, adds N(0, noise_sigma^2) noise, re-clamps,
/// then forces masked rays to clip_min.
ExteroState sense(const terrain::HeightField& field, const TrunkPose& pose, const RayConfig& cfg,
                  double noise_sigma, const RayMask& ablation_mask, Rng& rng);

/// Parses "8,9,10,11" (1-based ray numbers) into a mask. Throws std::invalid_argument.
RayMask parse_ray_list(const std::string& text, int n_rays);
std::string format_ray_list(const RayMask& mask);

struct RayDesignRow {
  int ray = 0;             ///< 1-based
  double angle = 0.0;      ///< from vertical [rad]
  double intercept = 0.0;  ///< horizontal flat-ground intercept [m]
  double gap = 0.0;        ///< distance to the previous intercept (0 for ray 1)
};

/// Per-ray flat-ground geometry for a sensor at `height` with N rays.
std::vector<RayDesignRow> ray_design_table(double height, int n_rays, double fov);

}  // namespace sparsewalk::raysensor
