#include "sparsewalk/raysensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sparsewalk::raysensor {

void validate(const RayConfig& cfg) {
  if (cfg.n_rays < 2 || cfg.n_rays > kMaxRays) {
    throw std::invalid_argument("n_rays must be in [2, 64]");
  }
  if (!(cfg.fov > 0.0 && cfg.fov < kPi / 2 + 1e-9)) {
    throw std::invalid_argument("fov must be in (0, pi/2]");
  }
  if (!(cfg.clip_min > 0.0 && cfg.clip_min < cfg.clip_max)) {
    throw std::invalid_argument("clip range must satisfy 0 < clip_min < clip_max");
  }
}

int min_ray_count(double height, double foot_size, double fov) {
  if (!(height > 0.0) || !(foot_size > 0.0) || !(fov > 0.0 && fov < kPi / 2)) {
    throw std::invalid_argument("min_ray_count needs h > 0, d_foot > 0, 0 < fov < pi/2");
  }
  int n = 2;
  while (!(height * std::tan(fov / (n - 1)) < foot_size)) {
    ++n;
  }
  return n;
}

std::vector<Vec2> ray_directions(const RayConfig& cfg) {
  std::vector<Vec2> dirs;
  dirs.reserve(cfg.n_rays);
  for (int i = 0; i < cfg.n_rays; ++i) {
    const double angle = i * cfg.fov / (cfg.n_rays - 1);
    dirs.push_back({std::sin(angle), -std::cos(angle)});
  }
  return dirs;
}

double raycast(const terrain::HeightField& field, Vec2 origin, Vec2 dir, double clip_min,
               double clip_max) {
  const auto clamp = [&](double d) { return std::clamp(d, clip_min, clip_max); };
  const auto gap = [&](double t) {
    return origin.z + t * dir.z - field.height_at(origin.x + t * dir.x);
  };

  double t_prev = 0.0;
  double f_prev = gap(0.0);
  if (f_prev <= 0.0) {
    return clip_min;
  }
  const auto root = [&](double t_next, double f_next) {
    return t_prev + (t_next - t_prev) * f_prev / (f_prev - f_next);
  };

  const auto& knots = field.knots();
  if (dir.x > 0.0) {
    auto it = std::upper_bound(knots.begin(), knots.end(), origin.x,
                               [](double v, const terrain::Knot& k) { return v < k.x; });
    for (; it != knots.end(); ++it) {
      const double t = (it->x - origin.x) / dir.x;
      if (t >= clip_max) {
        break;
      }
      const double f = origin.z + t * dir.z - it->z;
      if (f <= 0.0) {
        return clamp(root(t, f));
      }
      t_prev = t;
      f_prev = f;
    }
  } else if (dir.x < 0.0) {
    auto it = std::lower_bound(knots.begin(), knots.end(), origin.x,
                               [](const terrain::Knot& k, double v) { return k.x < v; });
    while (it != knots.begin()) {
      --it;
      const double t = (it->x - origin.x) / dir.x;
      if (t >= clip_max) {
        break;
      }
      const double f = origin.z + t * dir.z - it->z;
      if (f <= 0.0) {
        return clamp(root(t, f));
      }
      t_prev = t;
      f_prev = f;
    }
  }
  const double f_end = gap(clip_max);
  if (f_end <= 0.0) {
    return clamp(root(clip_max, f_end));
  }
  return clip_max;
}

Vec2 sensor_origin(const TrunkPose& pose, const RayConfig& cfg) {
  const double c = std::cos(pose.pitch);
  const double s = std::sin(pose.pitch);
  return {pose.x + c * cfg.mount_offset.x - s * cfg.mount_offset.z,
          pose.z + s * cfg.mount_offset.x + c * cfg.mount_offset.z};
}

ExteroState sense(const terrain::HeightField& field, const TrunkPose& pose, const RayConfig& cfg,
                  double noise_sigma, const RayMask& ablation_mask, Rng& rng) {
  ExteroState out;
  out.noise_sigma = noise_sigma;
  out.ablation_mask = ablation_mask;
  out.distances.resize(cfg.n_rays);

  const Vec2 origin = sensor_origin(pose, cfg);
  const double c = std::cos(pose.pitch);
  const double s = std::sin(pose.pitch);
  const auto dirs = ray_directions(cfg);
  std::normal_distribution<double> noise(0.0, noise_sigma > 0.0 ? noise_sigma : 1.0);
  for (int i = 0; i < cfg.n_rays; ++i) {
    const Vec2 d{c * dirs[i].x - s * dirs[i].z, s * dirs[i].x + c * dirs[i].z};
    double dist = raycast(field, origin, d, cfg.clip_min, cfg.clip_max);
    if (noise_sigma > 0.0) {
      dist = std::clamp(dist + noise(rng), cfg.clip_min, cfg.clip_max);
    }
    if (ablation_mask.test(i)) {
      dist = cfg.clip_min;
    }
    out.distances[i] = dist;
  }
  return out;
}

RayMask parse_ray_list(const std::string& text, int n_rays) {
  RayMask mask;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) {
      continue;
    }
    std::size_t used = 0;
    int ray = 0;
    try {
      ray = std::stoi(item, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad ray number '" + item + "'");
    }
    if (used != item.size() || ray < 1 || ray > n_rays) {
      throw std::invalid_argument("ray number out of range: '" + item + "'");
    }
    mask.set(ray - 1);
  }
  return mask;
}

std::string format_ray_list(const RayMask& mask) {
  std::string out;
  for (int i = 0; i < kMaxRays; ++i) {
    if (mask.test(i)) {
      if (!out.empty()) {
        out += ' ';
      }
      out += std::to_string(i + 1);
    }
  }
  return out.empty() ? "none" : out;
}

std::vector<RayDesignRow> ray_design_table(double height, int n_rays, double fov) {
  std::vector<RayDesignRow> rows;
  double previous = 0.0;
  for (int i = 0; i < n_rays; ++i) {
    RayDesignRow row;
    row.ray = i + 1;
    row.angle = i * fov / (n_rays - 1);
    row.intercept = height * std::tan(row.angle);
    row.gap = i == 0 ? 0.0 : row.intercept - previous;
    previous = row.intercept;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace sparsewalk::raysensor
