#pragma once

#include <array>

#include <Eigen/Dense>

#include "sparsewalk/common.hpp"
#include "sparsewalk/terrain.hpp"

namespace sparsewalk::dynamics {

inline constexpr int kLegs = 4;
inline constexpr int kJoints = 2 * kLegs;
inline constexpr int kDof = 3 + kJoints;  // x, z, pitch, then (hip, knee) per leg

inline constexpr double kPhysicsDt = 1.0 / 400.0;
inline constexpr int kSubstepsPerControl = 4;  // 400 Hz physics / 100 Hz control

using GenVector = Eigen::Matrix<double, kDof, 1>;
using GenMatrix = Eigen::Matrix<double, kDof, kDof>;
using JointVector = Eigen::Matrix<double, kJoints, 1>;
using Vec2 = Eigen::Vector2d;

/// Planar quadruped. Legs 0 and 1 hang from the fore hip, legs 2 and 3 from the hind hip;
/// joint 2k is leg k's hip, 2k+1 its knee. Link angles are measured counter-clockwise from
/// straight down, so a positive hip angle swings the foot forward.
struct RobotModel {
  double trunk_mass = 20.0;
  double trunk_inertia = 0.8333;      // 20 kg box, 0.70 m x 0.10 m
  double trunk_half_length = 0.35;
  double trunk_half_height = 0.06;
  double hip_offset = 0.30;           // hips at +/- hip_offset along the trunk axis
  double thigh_mass = 1.0;
  double thigh_length = 0.28;
  double thigh_inertia = 1.0 * 0.28 * 0.28 / 12.0;
  double shank_mass = 1.0;
  double shank_length = 0.28;
  double shank_inertia = 1.0 * 0.28 * 0.28 / 12.0;
  double hip_min = -1.2;
  double hip_max = 1.6;
  double knee_min = -2.7;
  double knee_max = 0.0;
  double torque_limit = 40.0;
  double kp = 150.0;
  double kd = 3.0;
  double foot_size = 0.055;  // effective foot size for the ray design guide
  double nominal_height = 0.50;

  bool operator==(const RobotModel&) const = default;
};

struct ContactParams {
  double stiffness = 5e4;
  double damping = 5e2;
  double friction = 0.7;
  double tangential_damping = 5e2;
  double tangential_stiffness = 3e4;  // spring to the sticking point

  bool operator==(const ContactParams&) const = default;
};

/// Throws std::invalid_argument when masses, lengths or gains break their invariants.
void validate(const RobotModel& model);
void validate(const ContactParams& params);

struct RobotState {
  GenVector q = GenVector::Zero();
  GenVector v = GenVector::Zero();
  double time = 0.0;
  std::array<bool, kLegs> contact{};
  /// Sticking point of each foot on the surface; meaningful while contact[leg] is set.
  std::array<Vec2, kLegs> anchor{Vec2::Zero(), Vec2::Zero(), Vec2::Zero(), Vec2::Zero()};
  JointVector tau = JointVector::Zero();  // torque applied during the last substep

  double x() const { return q[0]; }
  double z() const { return q[1]; }
  double pitch() const { return q[2]; }
  auto joints() const { return q.tail<kJoints>(); }
  auto joint_velocities() const { return v.tail<kJoints>(); }
};

JointVector nominal_joint_pose(const RobotModel& model);

/// Standing state with feet on the ground below the hips at z = ground + nominal_height.
RobotState nominal_state(const RobotModel& model, double ground_height = 0.0);

JointVector joint_lower_limits(const RobotModel& model);
JointVector joint_upper_limits(const RobotModel& model);

JointVector pd_torque(const JointVector& q_target, const RobotState& state,
                      const RobotModel& model);

struct ContactForce {
  double normal = 0.0;
  double tangential = 0.0;
};

/// Penalty contact: spring-damper normal force and a friction-cone-clamped tangential force.
/// `normal_velocity` is positive when separating. `slip` is the tangential offset of the foot
/// from its sticking point; with slip = 0 the tangential force is purely viscous.
ContactForce contact_force(double penetration, double normal_velocity, double tangential_velocity,
                           const ContactParams& params, double slip = 0.0);

/// Terms of M(q) v' + C(q, v) v = G(q) + S^T tau + J^T f.
struct EquationsOfMotion {
  GenMatrix mass;
  GenVector coriolis;  // C(q, v) v
  GenVector gravity;   // generalized gravity force
  /// (dM/dt - C) v, i.e. the velocity-product part of dL/dq.
  GenVector kinetic_gradient;
};

EquationsOfMotion equations_of_motion(const GenVector& q, const GenVector& v,
                                      const RobotModel& model);

double kinetic_energy(const RobotState& state, const RobotModel& model);
double potential_energy(const RobotState& state, const RobotModel& model);
/// Horizontal linear momentum (sum of m_i * xdot_i).
double horizontal_momentum(const RobotState& state, const RobotModel& model);

std::array<Vec2, kLegs> foot_positions(const GenVector& q, const RobotModel& model);
/// Trunk rectangle corners in world coordinates (front-bottom, hind-bottom, front-top, hind-top).
std::array<Vec2, 4> trunk_corners(const GenVector& q, const RobotModel& model);

/// One physics substep of length `dt`. The PD torque is recomputed against `q_target`.
/// Integration is semi-implicit Euler on generalized momentum: the momentum is advanced
/// with forces at the current state, the position with the updated velocity, and the
/// velocity is then recovered at the new configuration. Throws NonFiniteError.
RobotState step(const RobotState& state, const JointVector& q_target,
                const terrain::HeightField& field, const RobotModel& model,
                const ContactParams& params, double dt = kPhysicsDt);

/// `substeps` physics steps with the target held. Zero substeps returns `state` unchanged.
RobotState advance(const RobotState& state, const JointVector& q_target,
                   const terrain::HeightField& field, const RobotModel& model,
                   const ContactParams& params, int substeps);

/// Four physics substeps with the target held; advances time by 0.01 s.
RobotState control_step(const RobotState& state, const JointVector& q_target,
                        const terrain::HeightField& field, const RobotModel& model,
                        const ContactParams& params);

}  // namespace sparsewalk::dynamics
