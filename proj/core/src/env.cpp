#include "sparsewalk/env.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace sparsewalk::env {

void validate(const Task& task) {
  terrain::validate(task.terrain);
  if (!std::isfinite(task.v_ref_x) || std::abs(task.v_ref_x) > kMaxReferenceSpeed + 1e-12) {
    throw std::invalid_argument("v_ref_x must be in [-0.7, 0.7]");
  }
  if (task.v_ref_x != 0.0 && std::abs(task.v_ref_x) < kVelocityClip) {
    throw std::invalid_argument("v_ref_x below 0.15 m/s must be stored as 0");
  }
  if (task.episode_limit < 1) {
    throw std::invalid_argument("episode_limit must be positive");
  }
  if (task.goal_x && !std::isfinite(*task.goal_x)) {
    throw std::invalid_argument("goal_x must be finite");
  }
}

void validate(const RewardWeights& w) {
  if (!(w.c_tau < 0 && w.c_qdot < 0 && w.c_orient < 0 && w.c_psi < 0)) {
    throw std::invalid_argument("penalty reward coefficients must be negative");
  }
  if (!(w.c_v > 0)) {
    throw std::invalid_argument("c_v must be positive");
  }
  if (!(w.psi_clip > 0 && w.psi_clip < 1)) {
    throw std::invalid_argument("psi_clip must be in (0, 1)");
  }
}

double reward_torque(const JointVector& tau, const RewardWeights& w) {
  return w.c_tau * tau.squaredNorm();
}

double reward_jointvel(const JointVector& qdot, const RewardWeights& w) {
  return w.c_qdot * qdot.squaredNorm();
}

double reward_orientation(double roll, double pitch, const RewardWeights& w) {
  return w.c_orient * (std::abs(roll) + std::abs(pitch)) / kPi;
}

double reward_velocity(const Eigen::Vector2d& v_ref, const Eigen::Vector2d& v,
                       const RewardWeights& w) {
  const double scale = std::max(v_ref.norm(), kVelocityClip);
  return 1.0 - w.c_v * ((v_ref - v) / scale).squaredNorm();
}

double reward_yaw(double yaw_ref, double yaw, const RewardWeights& w) {
  return w.c_psi * std::min(std::abs((yaw_ref - yaw) / kPi), w.psi_clip);
}

RewardTerms reward_terms(const dynamics::RobotState& state, const Task& task,
                         const RewardWeights& w) {
  RewardTerms r;
  r.torque = reward_torque(state.tau, w);
  r.jointvel = reward_jointvel(state.joint_velocities(), w);
  r.orientation = reward_orientation(0.0, state.pitch(), w);
  r.velocity = reward_velocity({task.v_ref_x, 0.0}, {state.v[0], 0.0}, w);
  r.yaw = reward_yaw(task.yaw_ref, 0.0, w);
  return r;
}

double total_reward(const dynamics::RobotState& state, const Task& task, const RewardWeights& w) {
  return reward_terms(state, task, w).total();
}

ObsVector pack(const ObservationFields& f) {
  ObsVector o;
  o[0] = f.d_z;
  o[1] = f.sin_pitch;
  o[2] = f.cos_pitch;
  o[3] = f.vbar_x;
  o.segment<8>(4) = f.q;
  o[12] = f.v_x;
  o[13] = f.v_z;
  o[14] = f.pitch_rate;
  o.segment<8>(15) = f.qdot;
  o.tail<kExteroDim>() = f.rays;
  return o;
}

ObservationFields unpack(const ObsVector& o) {
  ObservationFields f;
  f.d_z = o[0];
  f.sin_pitch = o[1];
  f.cos_pitch = o[2];
  f.vbar_x = o[3];
  f.q = o.segment<8>(4);
  f.v_x = o[12];
  f.v_z = o[13];
  f.pitch_rate = o[14];
  f.qdot = o.segment<8>(15);
  f.rays = o.tail<kExteroDim>();
  return f;
}

const std::vector<std::string>& observation_labels() {
  static const std::vector<std::string> labels = [] {
    std::vector<std::string> out{"d_z", "sin_pitch", "cos_pitch", "vbar_x"};
    for (int j = 0; j < kActionDim; ++j) out.push_back("q" + std::to_string(j));
    out.insert(out.end(), {"v_x", "v_z", "pitch_rate"});
    for (int j = 0; j < kActionDim; ++j) out.push_back("qdot" + std::to_string(j));
    for (int i = 1; i <= kExteroDim; ++i) out.push_back("ray" + std::to_string(i));
    return out;
  }();
  return labels;
}

ObsVector observe(const dynamics::RobotState& state, const Task& task,
                  const raysensor::ExteroState& extero) {
  if (static_cast<int>(extero.distances.size()) != kExteroDim) {
    throw ShapeMismatchError("observation expects " + std::to_string(kExteroDim) + " rays");
  }
  ObservationFields f;
  f.d_z = state.z();
  f.sin_pitch = std::sin(state.pitch());
  f.cos_pitch = std::cos(state.pitch());
  f.vbar_x = task.v_ref_x - state.v[0];
  f.q = state.joints();
  f.v_x = state.v[0];
  f.v_z = state.v[1];
  f.pitch_rate = state.v[2];
  f.qdot = state.joint_velocities();
  f.rays = Eigen::Map<const RayVector>(extero.distances.data());
  ObsVector o = pack(f);
  if (!o.allFinite()) {
    throw NonFiniteError("observation is not finite");
  }
  return o;
}

JointVector action_to_target(const JointVector& action, const dynamics::RobotModel& model,
                             double action_scale) {
  const JointVector raw = dynamics::nominal_joint_pose(model) + action_scale * action;
  return raw.cwiseMax(dynamics::joint_lower_limits(model))
      .cwiseMin(dynamics::joint_upper_limits(model));
}

JointVector target_to_action(const JointVector& target, const dynamics::RobotModel& model,
                             double action_scale) {
  return (target - dynamics::nominal_joint_pose(model)) / action_scale;
}

std::string_view to_string(Termination reason) {
  switch (reason) {
    case Termination::None: return "none";
    case Termination::TrunkContact: return "trunk_contact";
    case Termination::Orientation: return "orientation";
    case Termination::Height: return "height";
    case Termination::NonFinite: return "non_finite";
    case Termination::Timeout: return "timeout";
    case Termination::Goal: return "goal";
  }
  return "unknown";
}

void validate(const EnvConfig& cfg) {
  dynamics::validate(cfg.model);
  dynamics::validate(cfg.contact);
  raysensor::validate(cfg.rays);
  validate(cfg.weights);
  if (cfg.rays.n_rays != kExteroDim) {
    throw std::invalid_argument("the observation layout needs exactly 11 rays");
  }
  if (!(cfg.action_scale > 0) || !(cfg.pitch_limit > 0) || !(cfg.min_clearance > 0)) {
    throw std::invalid_argument("action_scale, pitch_limit and min_clearance must be positive");
  }
}

std::string trace_csv(const std::vector<TraceRow>& rows) {
  std::ostringstream out;
  out << "time,x,z,pitch,v_x,v_z,pitch_rate";
  for (int j = 0; j < kActionDim; ++j) out << ",q" << j;
  for (int j = 0; j < kActionDim; ++j) out << ",qdot" << j;
  for (int j = 0; j < kActionDim; ++j) out << ",tau" << j;
  for (int k = 0; k < dynamics::kLegs; ++k) out << ",contact" << k;
  out << ",vbar_x,reward\n";
  out << std::setprecision(10);
  for (const auto& r : rows) {
    out << r.time;
    for (int i = 0; i < 3; ++i) out << ',' << r.q[i];
    for (int i = 0; i < 3; ++i) out << ',' << r.v[i];
    for (int j = 0; j < kActionDim; ++j) out << ',' << r.q[3 + j];
    for (int j = 0; j < kActionDim; ++j) out << ',' << r.v[3 + j];
    for (int j = 0; j < kActionDim; ++j) out << ',' << r.tau[j];
    for (bool c : r.contact) out << ',' << (c ? 1 : 0);
    out << ',' << r.vbar_x << ',' << r.reward << '\n';
  }
  return out.str();
}

namespace {

terrain::HeightField build_field(const Task& task) {
  Rng rng = make_rng(task.terrain_seed);
  return terrain::build_terrain(task.terrain, rng);
}

}  // namespace

Episode::Episode(const EnvConfig& cfg, const Task& task, std::uint64_t seed, double noise_sigma,
                 raysensor::RayMask ablation)
    : cfg_(cfg),
      task_(task),
      field_(build_field(task)),
      noise_rng_(make_rng(seed, 1)),
      noise_sigma_(noise_sigma),
      ablation_(ablation) {
  validate(cfg_);
  validate(task_);
  if (!(noise_sigma >= 0.0)) {
    throw std::invalid_argument("noise_sigma must be non-negative");
  }
  state_ = dynamics::nominal_state(cfg_.model, field_.height_at(0.0));
  start_x_ = state_.x();
  goal_x_ = task_.goal_x.value_or(field_.goal_x());
  const auto extero = raysensor::sense(field_, {state_.x(), state_.z(), state_.pitch()}, cfg_.rays,
                                       noise_sigma_, ablation_, noise_rng_);
  obs_ = observe(state_, task_, extero);
  if (task_.v_ref_x > 0.0 && state_.x() >= goal_x_) {
    reached_goal_ = true;
    success_ = true;
    if (cfg_.terminate_on_goal) {
      done_ = true;
      reason_ = Termination::Goal;
    }
  }
}

void Episode::set_state(const dynamics::RobotState& state) {
  if (done_) {
    throw StepAfterDoneError();
  }
  state_ = state;
  const auto extero = raysensor::sense(field_, {state_.x(), state_.z(), state_.pitch()}, cfg_.rays,
                                       noise_sigma_, ablation_, noise_rng_);
  obs_ = observe(state_, task_, extero);
}

Termination Episode::check_termination() const {
  for (const auto& c : dynamics::trunk_corners(state_.q, cfg_.model)) {
    if (c.y() <= field_.height_at(c.x())) {
      return Termination::TrunkContact;
    }
  }
  if (std::abs(state_.pitch()) > cfg_.pitch_limit) {
    return Termination::Orientation;
  }
  if (state_.z() - field_.height_at(state_.x()) < cfg_.min_clearance) {
    return Termination::Height;
  }
  return Termination::None;
}

StepResult Episode::step(const JointVector& q_target) {
  if (done_) {
    throw StepAfterDoneError();
  }
  StepResult out;
  ++steps_;
  Termination reason = Termination::None;
  try {
    state_ = dynamics::control_step(state_, q_target, field_, cfg_.model, cfg_.contact);
    const auto extero = raysensor::sense(field_, {state_.x(), state_.z(), state_.pitch()},
                                         cfg_.rays, noise_sigma_, ablation_, noise_rng_);
    obs_ = observe(state_, task_, extero);
    reason = check_termination();
  } catch (const NonFiniteError&) {
    reason = Termination::NonFinite;
  }

  if (reason == Termination::NonFinite) {
    out.info.terms = {};
    out.reward = 0.0;
  } else {
    out.info.terms = reward_terms(state_, task_, cfg_.weights);
    out.reward = out.info.terms.total();
  }
  return_ += out.reward;

  if (reason == Termination::None) {
    if (task_.v_ref_x > 0.0 && state_.x() >= goal_x_ && !reached_goal_) {
      reached_goal_ = true;
      success_ = true;
      if (cfg_.terminate_on_goal) {
        reason = Termination::Goal;
      }
    }
    if (reason == Termination::None && steps_ >= task_.episode_limit) {
      reason = Termination::Timeout;
      if (task_.v_ref_x <= 0.0) {
        success_ = true;
      }
    }
  }

  done_ = reason != Termination::None;
  reason_ = reason;
  out.obs = obs_;
  out.done = done_;
  out.info.reason = reason;
  out.info.vbar_x = task_.v_ref_x - state_.v[0];
  out.info.progress = state_.x() - start_x_;
  out.info.reached_goal = reached_goal_;
  out.info.success = success_;

  if (recording_) {
    trace_.push_back({state_.time, state_.q, state_.v, state_.tau, state_.contact,
                      out.info.vbar_x, out.reward});
  }
  return out;
}

StepResult env_step(Episode& episode, const JointVector& q_target) {
  return episode.step(q_target);
}

}  // namespace sparsewalk::env
