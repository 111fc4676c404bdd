#include "sparsewalk/terrain.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace sparsewalk::terrain {

namespace {

constexpr double kAlternatingBlockGap = 0.5;

struct NamedKind {
  TerrainKind kind;
  std::string_view name;
};

constexpr NamedKind kKindNames[] = {
    {TerrainKind::Flat, "flat"},
    {TerrainKind::Step, "step"},
    {TerrainKind::Ramp, "ramp"},
    {TerrainKind::Stairs, "stairs"},
    {TerrainKind::Barriers, "barriers"},
    {TerrainKind::Ditches, "ditches"},
    {TerrainKind::AlternatingStairs, "alternating_stairs"},
};

// Appends knots left to right; faces occupy kFaceEpsilon horizontally.
class ProfileBuilder {
 public:
  explicit ProfileBuilder(double start_x) : x_(start_x) {
    knots_.push_back({start_x - 1.0, 0.0});
    knots_.push_back({start_x, 0.0});
  }

  void face_to(double z) {
    x_ += kFaceEpsilon;
    z_ = z;
    knots_.push_back({x_, z_});
  }

  void run(double length) {
    x_ += length;
    knots_.push_back({x_, z_});
  }

  void slope_to(double length, double z) {
    x_ += length;
    z_ = z;
    knots_.push_back({x_, z_});
  }

  // Moves the cursor to an absolute x at constant height.
  void run_to(double x) { run(x - x_); }

  double x() const { return x_; }

  std::vector<Knot> finish() && { return std::move(knots_); }

 private:
  std::vector<Knot> knots_;
  double x_;
  double z_ = 0.0;
};

void require(bool ok, const char* what) {
  if (!ok) {
    throw std::invalid_argument(what);
  }
}

bool all_positive(const std::vector<double>& values) {
  return std::all_of(values.begin(), values.end(),
                     [](double v) { return std::isfinite(v) && v > 0.0; });
}

}  // namespace

std::string_view to_string(TerrainKind kind) {
  for (const auto& entry : kKindNames) {
    if (entry.kind == kind) {
      return entry.name;
    }
  }
  return "unknown";
}

std::optional<TerrainKind> terrain_kind_from_string(std::string_view name) {
  for (const auto& entry : kKindNames) {
    if (entry.name == name) {
      return entry.kind;
    }
  }
  return std::nullopt;
}

HeightField::HeightField() : knots_{{0.0, 0.0}} {}

HeightField::HeightField(std::vector<Knot> knots, double obstacle_end_x, double first_block_end_x)
    : knots_(std::move(knots)),
      obstacle_end_x_(obstacle_end_x),
      first_block_end_x_(first_block_end_x) {
  if (knots_.empty()) {
    throw std::invalid_argument("heightfield needs at least one knot");
  }
  for (std::size_t i = 1; i < knots_.size(); ++i) {
    if (!(knots_[i].x > knots_[i - 1].x)) {
      throw std::invalid_argument("heightfield knots must be strictly increasing in x");
    }
  }
}

double HeightField::height_at(double x) const {
  if (x <= knots_.front().x) {
    return knots_.front().z;
  }
  if (x >= knots_.back().x) {
    return knots_.back().z;
  }
  const auto hi = std::upper_bound(knots_.begin(), knots_.end(), x,
                                   [](double value, const Knot& k) { return value < k.x; });
  const auto lo = hi - 1;
  const double t = (x - lo->x) / (hi->x - lo->x);
  return lo->z + t * (hi->z - lo->z);
}

double HeightField::slope_at(double x) const {
  if (x <= knots_.front().x || x >= knots_.back().x) {
    return 0.0;
  }
  const auto hi = std::upper_bound(knots_.begin(), knots_.end(), x,
                                   [](double value, const Knot& k) { return value < k.x; });
  const auto lo = hi - 1;
  return (hi->z - lo->z) / (hi->x - lo->x);
}

Knot HeightField::closest_surface_point(double x, double z, double radius) const {
  const double lo_x = x - radius;
  const double hi_x = x + radius;
  std::vector<Knot> local;
  local.push_back({lo_x, height_at(lo_x)});
  auto it = std::upper_bound(knots_.begin(), knots_.end(), lo_x,
                             [](double value, const Knot& k) { return value < k.x; });
  for (; it != knots_.end() && it->x < hi_x; ++it) {
    local.push_back(*it);
  }
  local.push_back({hi_x, height_at(hi_x)});

  Knot best{x, height_at(x)};
  double best_d2 = (best.z - z) * (best.z - z);
  for (std::size_t i = 1; i < local.size(); ++i) {
    const Knot a = local[i - 1];
    const Knot b = local[i];
    const double ex = b.x - a.x;
    const double ez = b.z - a.z;
    const double len2 = ex * ex + ez * ez;
    double t = len2 > 0.0 ? ((x - a.x) * ex + (z - a.z) * ez) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const Knot p{a.x + t * ex, a.z + t * ez};
    const double d2 = (p.x - x) * (p.x - x) + (p.z - z) * (p.z - z);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = p;
    }
  }
  return best;
}

void validate(const TerrainSpec& spec) {
  const auto& p = spec.params;
  require(std::isfinite(spec.start_x) && spec.start_x >= 1.0, "terrain start_x must be >= 1.0");
  switch (spec.kind) {
    case TerrainKind::Flat:
      break;
    case TerrainKind::Step:
      require(p.step_height > 0.0, "step_height must be positive");
      break;
    case TerrainKind::Ramp:
      require(p.ramp_slope > 0.0 && p.ramp_slope < kPi / 2, "ramp_slope must be in (0, pi/2)");
      break;
    case TerrainKind::Stairs:
      require(p.stair_rise > 0.0, "stair_rise must be positive");
      require(p.stair_run > 0.0, "stair_run must be positive");
      break;
    case TerrainKind::Barriers:
      require(!p.barrier_sizes.empty(), "barrier_sizes must not be empty");
      require(all_positive(p.barrier_sizes), "barrier_sizes must be positive");
      break;
    case TerrainKind::Ditches:
      require(!p.ditch_gaps.empty(), "ditch_gaps must not be empty");
      require(all_positive(p.ditch_gaps), "ditch_gaps must be positive");
      require(p.ditch_height > 0.0, "ditch_height must be positive");
      break;
    case TerrainKind::AlternatingStairs:
      require(p.stair_rise > 0.0, "stair_rise must be positive");
      require(p.stair_run_sequence.size() == 2 * kAlternatingTreadsPerBlock,
              "stair_run_sequence must hold two blocks of treads");
      require(all_positive(p.stair_run_sequence), "stair_run_sequence must be positive");
      break;
  }
  // Gaps and runs narrower than two faces cannot be represented.
  for (double g : p.ditch_gaps) {
    if (spec.kind == TerrainKind::Ditches) {
      require(g > 2 * kFaceEpsilon, "ditch gap narrower than two faces");
    }
  }
}

HeightField build_terrain(const TerrainSpec& spec, Rng& rng) {
  validate(spec);
  const auto& p = spec.params;
  const double s = spec.start_x;
  ProfileBuilder b(s);
  double first_block_end = s;

  switch (spec.kind) {
    case TerrainKind::Flat:
      b.run(1.0);
      return HeightField(std::move(b).finish(), s, s);

    case TerrainKind::Step:
      b.face_to(p.step_height);
      b.run(1.0);
      return HeightField(std::move(b).finish(), s + kFaceEpsilon, s + kFaceEpsilon);

    case TerrainKind::Ramp:
      b.slope_to(kRampLength, kRampLength * std::tan(p.ramp_slope));
      b.run(1.0);
      return HeightField(std::move(b).finish(), s + kRampLength, s + kRampLength);

    case TerrainKind::Stairs: {
      for (int k = 1; k <= kStairTreads; ++k) {
        b.face_to(k * p.stair_rise);
        b.run_to(s + k * p.stair_run);
      }
      b.run(kStairPlateau);
      const double down_start = b.x();
      for (int k = 1; k <= kStairTreads; ++k) {
        b.face_to((kStairTreads - k) * p.stair_rise);
        if (k < kStairTreads) {
          b.run_to(down_start + k * p.stair_run);
        }
      }
      const double end = b.x();
      b.run(1.0);
      return HeightField(std::move(b).finish(), end, end);
    }

    case TerrainKind::Barriers: {
      std::uniform_real_distribution<double> spacing(1.0, 1.5);
      for (std::size_t i = 0; i < p.barrier_sizes.size(); ++i) {
        const double size = p.barrier_sizes[i];
        b.face_to(size);
        b.run(size - kFaceEpsilon);
        b.face_to(0.0);
        if (i + 1 < p.barrier_sizes.size()) {
          b.run(spacing(rng));
        }
      }
      const double end = b.x();
      b.run(1.0);
      return HeightField(std::move(b).finish(), end, end);
    }

    case TerrainKind::Ditches: {
      std::uniform_real_distribution<double> platform(0.8, 1.2);
      b.face_to(p.ditch_height);
      for (double gap : p.ditch_gaps) {
        b.run(platform(rng));
        b.face_to(0.0);
        b.run(gap - 2 * kFaceEpsilon);
        b.face_to(p.ditch_height);
      }
      const double end = b.x();
      b.run(1.0);
      return HeightField(std::move(b).finish(), end, end);
    }

    case TerrainKind::AlternatingStairs: {
      constexpr int n = kAlternatingTreadsPerBlock;
      for (int block = 0; block < 2; ++block) {
        const auto runs = p.stair_run_sequence.begin() + block * n;
        for (int k = 1; k <= n; ++k) {
          b.face_to(k * p.stair_rise);
          b.run(runs[k - 1] - kFaceEpsilon);
        }
        for (int k = n - 1; k >= 0; --k) {
          b.face_to(k * p.stair_rise);
          if (k > 0) {
            b.run(runs[k - 1] - kFaceEpsilon);
          }
        }
        if (block == 0) {
          first_block_end = b.x();
          b.run(kAlternatingBlockGap);
        }
      }
      const double end = b.x();
      b.run(1.0);
      return HeightField(std::move(b).finish(), end, first_block_end);
    }
  }
  throw std::invalid_argument("unknown terrain kind");
}

std::string to_csv(const HeightField& field) {
  std::ostringstream out;
  out << std::setprecision(17) << "x,z\n";
  for (const auto& k : field.knots()) {
    out << k.x << ',' << k.z << '\n';
  }
  return out.str();
}

}  // namespace sparsewalk::terrain
