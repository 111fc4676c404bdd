#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "sparsewalk/dynamics.hpp"
#include "sparsewalk/raysensor.hpp"
#include "sparsewalk/terrain.hpp"

namespace sparsewalk::env {

using dynamics::JointVector;

inline constexpr int kProprioDim = 23;
inline constexpr int kExteroDim = raysensor::kDefaultRays;
inline constexpr int kObsDim = kProprioDim + kExteroDim;
inline constexpr int kActionDim = dynamics::kJoints;
inline constexpr int kEpisodeLimit = 800;  // control steps (8 s)
inline constexpr double kVelocityClip = 0.15;
inline constexpr double kMaxReferenceSpeed = 0.7;

using ObsVector = Eigen::Matrix<double, kObsDim, 1>;
using RayVector = Eigen::Matrix<double, kExteroDim, 1>;

struct Task {
  terrain::TerrainSpec terrain;
  std::uint64_t terrain_seed = 0;
  double v_ref_x = 0.0;
  double yaw_ref = 0.0;
  int episode_limit = kEpisodeLimit;
  /// Overrides the goal line derived from the built terrain.
  std::optional<double> goal_x;

  bool operator==(const Task&) const = default;
};

/// Throws std::invalid_argument on out-of-range reference velocities or limits.
void validate(const Task& task);

struct RewardWeights {
  double c_tau = -1e-4;
  double c_qdot = -1e-4;
  double c_orient = -0.05;
  double c_v = 1.0;
  double c_psi = -5.0;
  double psi_clip = 0.3;

  bool operator==(const RewardWeights&) const = default;
};

void validate(const RewardWeights& w);

double reward_torque(const JointVector& tau, const RewardWeights& w);
double reward_jointvel(const JointVector& qdot, const RewardWeights& w);
double reward_orientation(double roll, double pitch, const RewardWeights& w);
/// 1 - c_v * |(v_ref - v) / s|^2 with s = max(|v_ref|, 0.15).
double reward_velocity(const Eigen::Vector2d& v_ref, const Eigen::Vector2d& v,
                       const RewardWeights& w);
double reward_yaw(double yaw_ref, double yaw, const RewardWeights& w);

struct RewardTerms {
  double torque = 0.0;
  double jointvel = 0.0;
  double orientation = 0.0;
  double velocity = 0.0;
  double yaw = 0.0;

  double total() const { return torque + jointvel + orientation + velocity + yaw; }
};

/// Uses the torque of the last physics substep stored in `state.tau`.
RewardTerms reward_terms(const dynamics::RobotState& state, const Task& task,
                         const RewardWeights& w);
double total_reward(const dynamics::RobotState& state, const Task& task, const RewardWeights& w);

struct ObservationFields {
  double d_z = 0.0;
  double sin_pitch = 0.0;
  double cos_pitch = 1.0;
  double vbar_x = 0.0;
  JointVector q = JointVector::Zero();
  double v_x = 0.0;
  double v_z = 0.0;
  double pitch_rate = 0.0;
  JointVector qdot = JointVector::Zero();
  RayVector rays = RayVector::Zero();

  bool operator==(const ObservationFields&) const = default;
};

ObsVector pack(const ObservationFields& fields);
ObservationFields unpack(const ObsVector& obs);

/// Names of the observation entries in packing order.
const std::vector<std::string>& observation_labels();

ObsVector observe(const dynamics::RobotState& state, const Task& task,
                  const raysensor::ExteroState& extero);

/// Maps a normalized policy action to joint targets: nominal + scale * a, clamped to limits.
JointVector action_to_target(const JointVector& action, const dynamics::RobotModel& model,
                             double action_scale);
JointVector target_to_action(const JointVector& target, const dynamics::RobotModel& model,
                             double action_scale);

enum class Termination { None, TrunkContact, Orientation, Height, NonFinite, Timeout, Goal };

std::string_view to_string(Termination reason);

struct EnvConfig {
  dynamics::RobotModel model;
  dynamics::ContactParams contact;
  raysensor::RayConfig rays;
  RewardWeights weights;
  double action_scale = 0.5;
  double pitch_limit = 1.0;
  double min_clearance = 0.15;
  /// End the episode once the goal line is crossed (evaluation); training keeps going.
  bool terminate_on_goal = false;

  bool operator==(const EnvConfig&) const = default;
};

void validate(const EnvConfig& cfg);

struct StepInfo {
  RewardTerms terms;
  Termination reason = Termination::None;
  double vbar_x = 0.0;
  double progress = 0.0;  ///< x travelled since reset
  bool reached_goal = false;
  bool success = false;
};

struct StepResult {
  ObsVector obs;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

struct TraceRow {
  double time;
  dynamics::GenVector q;
  dynamics::GenVector v;
  JointVector tau;
  std::array<bool, dynamics::kLegs> contact;
  double vbar_x;
  double reward;
};

std::string trace_csv(const std::vector<TraceRow>& rows);

/// One task instance: terrain, robot and sensor state, termination and success bookkeeping.
class Episode {
 public:
  Episode(const EnvConfig& cfg, const Task& task, std::uint64_t seed, double noise_sigma = 0.0,
          raysensor::RayMask ablation = {});

  const ObsVector& observation() const { return obs_; }
  const dynamics::RobotState& state() const { return state_; }
  const terrain::HeightField& field() const { return field_; }
  const Task& task() const { return task_; }
  const EnvConfig& config() const { return cfg_; }
  double goal_x() const { return goal_x_; }
  int steps() const { return steps_; }
  bool done() const { return done_; }
  Termination reason() const { return reason_; }
  bool success() const { return success_; }
  double episode_return() const { return return_; }

  /// Replaces the physical state of an active episode and re-senses the observation.
  void set_state(const dynamics::RobotState& state);

  void record_trace(bool on) { recording_ = on; }
  const std::vector<TraceRow>& trace() const { return trace_; }

  /// Advances one control step holding `q_target`. Throws StepAfterDoneError once done.
  StepResult step(const JointVector& q_target);

 private:
  Termination check_termination() const;

  EnvConfig cfg_;
  Task task_;
  terrain::HeightField field_;
  Rng noise_rng_;
  double noise_sigma_;
  raysensor::RayMask ablation_;
  dynamics::RobotState state_;
  ObsVector obs_;
  double start_x_ = 0.0;
  double goal_x_ = 0.0;
  int steps_ = 0;
  bool done_ = false;
  bool success_ = false;
  bool reached_goal_ = false;
  Termination reason_ = Termination::None;
  double return_ = 0.0;
  bool recording_ = false;
  std::vector<TraceRow> trace_;
};

/// Functional form of Episode::step.
StepResult env_step(Episode& episode, const JointVector& q_target);

}  // namespace sparsewalk::env
