#include "sparsewalk/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sparsewalk::dynamics {

namespace {

using Jacobian = Eigen::Matrix<double, 2, kDof>;

inline Vec2 link_dir(double angle) { return {std::sin(angle), -std::cos(angle)}; }
inline Vec2 link_dir_deriv(double angle) { return {std::cos(angle), std::sin(angle)}; }

inline Vec2 rotate(double c, double s, const Vec2& r) {
  return {c * r.x() - s * r.y(), s * r.x() + c * r.y()};
}

inline double hip_sign(int leg) { return leg < 2 ? 1.0 : -1.0; }

// Position, Jacobian and Jacobian time derivative of a point on a leg. `thigh_dist` is
// the distance along the thigh; when `shank_dist` >= 0 the point lies on the shank.
struct PointKinematics {
  Vec2 p;
  Jacobian J;
  Jacobian Jdot;
};

PointKinematics leg_point(const GenVector& q, const GenVector& v, const RobotModel& m, int leg,
                          double thigh_dist, double shank_dist) {
  const double th = q[2];
  const double c = std::cos(th);
  const double s = std::sin(th);
  const int hip = 3 + 2 * leg;
  const int knee = hip + 1;
  const double phi1 = th + q[hip];
  const double phi2 = phi1 + q[knee];
  const double w0 = v[2];
  const double w1 = w0 + v[hip];
  const double w2 = w1 + v[knee];

  const Vec2 r_hip{hip_sign(leg) * m.hip_offset, 0.0};
  const Vec2 R_r = rotate(c, s, r_hip);
  const Vec2 dR_r{-s * r_hip.x() - c * r_hip.y(), c * r_hip.x() - s * r_hip.y()};

  PointKinematics out;
  out.J.setZero();
  out.Jdot.setZero();
  out.J(0, 0) = 1.0;
  out.J(1, 1) = 1.0;

  const bool on_shank = shank_dist >= 0.0;
  const double a = on_shank ? m.thigh_length : thigh_dist;
  const Vec2 u1 = link_dir(phi1);
  const Vec2 du1 = link_dir_deriv(phi1);

  out.p = Vec2(q[0], q[1]) + R_r + a * u1;
  Vec2 col_hip = a * du1;
  Vec2 dcol_hip = -a * w1 * u1;
  if (on_shank) {
    const Vec2 u2 = link_dir(phi2);
    const Vec2 du2 = link_dir_deriv(phi2);
    out.p += shank_dist * u2;
    col_hip += shank_dist * du2;
    dcol_hip += -shank_dist * w2 * u2;
    out.J.col(knee) = shank_dist * du2;
    out.Jdot.col(knee) = -shank_dist * w2 * u2;
  }
  out.J.col(hip) = col_hip;
  out.Jdot.col(hip) = dcol_hip;
  out.J.col(2) = dR_r + col_hip;
  out.Jdot.col(2) = -w0 * R_r + dcol_hip;
  return out;
}

struct Body {
  double mass;
  double inertia;
  PointKinematics kin;
  // Angular velocity Jacobian is a 0/1 row: pitch plus the joints above the body.
  int hip = -1;
  int knee = -1;
};

template <typename F>
void for_each_body(const GenVector& q, const GenVector& v, const RobotModel& m, F&& f) {
  Body trunk{m.trunk_mass, m.trunk_inertia, {}, -1, -1};
  trunk.kin.p = Vec2(q[0], q[1]);
  trunk.kin.J.setZero();
  trunk.kin.Jdot.setZero();
  trunk.kin.J(0, 0) = 1.0;
  trunk.kin.J(1, 1) = 1.0;
  f(trunk);
  for (int leg = 0; leg < kLegs; ++leg) {
    const int hip = 3 + 2 * leg;
    f(Body{m.thigh_mass, m.thigh_inertia, leg_point(q, v, m, leg, 0.5 * m.thigh_length, -1.0),
           hip, -1});
    f(Body{m.shank_mass, m.shank_inertia, leg_point(q, v, m, leg, 0.0, 0.5 * m.shank_length),
           hip, hip + 1});
  }
}

void add_rotational_inertia(GenMatrix& M, const Body& b) {
  int idx[3] = {2, b.hip, b.knee};
  for (int i : idx) {
    if (i < 0) continue;
    for (int j : idx) {
      if (j < 0) continue;
      M(i, j) += b.inertia;
    }
  }
}

GenMatrix mass_matrix(const GenVector& q, const RobotModel& m) {
  GenMatrix M = GenMatrix::Zero();
  const GenVector zero = GenVector::Zero();
  for_each_body(q, zero, m, [&](const Body& b) {
    M.noalias() += b.mass * b.kin.J.transpose() * b.kin.J;
    add_rotational_inertia(M, b);
  });
  return M;
}

bool all_finite(const GenVector& x) { return x.allFinite(); }

}  // namespace

void validate(const RobotModel& m) {
  const bool ok = m.trunk_mass > 0 && m.trunk_inertia > 0 && m.trunk_half_length > 0 &&
                  m.trunk_half_height > 0 && m.hip_offset > 0 && m.thigh_mass > 0 &&
                  m.thigh_length > 0 && m.thigh_inertia > 0 && m.shank_mass > 0 &&
                  m.shank_length > 0 && m.shank_inertia > 0 && m.torque_limit > 0 &&
                  m.kp >= 0 && m.kd >= 0 && m.hip_min < m.hip_max && m.knee_min < m.knee_max &&
                  m.foot_size > 0 && m.nominal_height > 0 &&
                  m.nominal_height < m.thigh_length + m.shank_length;
  if (!ok) {
    throw std::invalid_argument("robot model parameters out of range");
  }
}

void validate(const ContactParams& p) {
  if (!(p.stiffness > 0 && p.friction > 0 && p.damping >= 0 && p.tangential_damping >= 0 &&
        p.tangential_stiffness >= 0)) {
    throw std::invalid_argument("contact parameters out of range");
  }
}

JointVector nominal_joint_pose(const RobotModel& m) {
  const double l1 = m.thigh_length;
  const double l2 = m.shank_length;
  const double h = m.nominal_height;
  const double knee = -std::acos(std::clamp((h * h - l1 * l1 - l2 * l2) / (2 * l1 * l2), -1.0, 1.0));
  const double hip = -std::atan2(l2 * std::sin(knee), l1 + l2 * std::cos(knee));
  JointVector pose;
  for (int leg = 0; leg < kLegs; ++leg) {
    pose[2 * leg] = hip;
    pose[2 * leg + 1] = knee;
  }
  return pose;
}

RobotState nominal_state(const RobotModel& model, double ground_height) {
  RobotState s;
  s.q[1] = ground_height + model.nominal_height;
  s.q.tail<kJoints>() = nominal_joint_pose(model);
  return s;
}

JointVector joint_lower_limits(const RobotModel& m) {
  JointVector lo;
  for (int leg = 0; leg < kLegs; ++leg) {
    lo[2 * leg] = m.hip_min;
    lo[2 * leg + 1] = m.knee_min;
  }
  return lo;
}

JointVector joint_upper_limits(const RobotModel& m) {
  JointVector hi;
  for (int leg = 0; leg < kLegs; ++leg) {
    hi[2 * leg] = m.hip_max;
    hi[2 * leg + 1] = m.knee_max;
  }
  return hi;
}

JointVector pd_torque(const JointVector& q_target, const RobotState& state,
                      const RobotModel& model) {
  const JointVector raw =
      model.kp * (q_target - state.joints()) - model.kd * state.joint_velocities();
  return raw.cwiseMax(-model.torque_limit).cwiseMin(model.torque_limit);
}

ContactForce contact_force(double penetration, double normal_velocity, double tangential_velocity,
                           const ContactParams& params, double slip) {
  if (penetration <= 0.0) {
    return {};
  }
  ContactForce f;
  f.normal = std::max(0.0, params.stiffness * penetration - params.damping * normal_velocity);
  const double limit = params.friction * f.normal;
  const double resist =
      params.tangential_stiffness * slip + params.tangential_damping * tangential_velocity;
  f.tangential = -std::clamp(resist, -limit, limit);
  return f;
}

EquationsOfMotion equations_of_motion(const GenVector& q, const GenVector& v,
                                      const RobotModel& model) {
  EquationsOfMotion eom;
  eom.mass.setZero();
  eom.coriolis.setZero();
  eom.gravity.setZero();
  eom.kinetic_gradient.setZero();
  for_each_body(q, v, model, [&](const Body& b) {
    const auto& J = b.kin.J;
    eom.mass.noalias() += b.mass * J.transpose() * J;
    add_rotational_inertia(eom.mass, b);
    eom.gravity.noalias() += J.transpose() * Vec2(0.0, -b.mass * kGravity);
    const Vec2 bias_acc = b.kin.Jdot * v;
    const Vec2 vel = J * v;
    eom.coriolis.noalias() += b.mass * J.transpose() * bias_acc;
    eom.kinetic_gradient.noalias() += b.mass * b.kin.Jdot.transpose() * vel;
  });
  return eom;
}

double kinetic_energy(const RobotState& state, const RobotModel& model) {
  return 0.5 * state.v.dot(mass_matrix(state.q, model) * state.v);
}

double potential_energy(const RobotState& state, const RobotModel& model) {
  double e = 0.0;
  for_each_body(state.q, state.v, model,
                [&](const Body& b) { e += b.mass * kGravity * b.kin.p.y(); });
  return e;
}

double horizontal_momentum(const RobotState& state, const RobotModel& model) {
  double p = 0.0;
  for_each_body(state.q, state.v, model,
                [&](const Body& b) { p += b.mass * (b.kin.J.row(0) * state.v)(0); });
  return p;
}

std::array<Vec2, kLegs> foot_positions(const GenVector& q, const RobotModel& model) {
  std::array<Vec2, kLegs> feet;
  const GenVector zero = GenVector::Zero();
  for (int leg = 0; leg < kLegs; ++leg) {
    feet[leg] = leg_point(q, zero, model, leg, 0.0, model.shank_length).p;
  }
  return feet;
}

std::array<Vec2, 4> trunk_corners(const GenVector& q, const RobotModel& model) {
  const double c = std::cos(q[2]);
  const double s = std::sin(q[2]);
  const double L = model.trunk_half_length;
  const double H = model.trunk_half_height;
  const Vec2 center(q[0], q[1]);
  return {center + rotate(c, s, Vec2(L, -H)), center + rotate(c, s, Vec2(-L, -H)),
          center + rotate(c, s, Vec2(L, H)), center + rotate(c, s, Vec2(-L, H))};
}

RobotState step(const RobotState& state, const JointVector& q_target,
                const terrain::HeightField& field, const RobotModel& model,
                const ContactParams& params, double dt) {
  const GenVector& q = state.q;
  const GenVector& v = state.v;
  RobotState next = state;
  next.tau = pd_torque(q_target, state, model);

  const EquationsOfMotion eom = equations_of_motion(q, v, model);
  GenVector force = eom.gravity + eom.kinetic_gradient;
  force.tail<kJoints>() += next.tau;

  struct Contact {
    int leg;
    Jacobian J;
    Vec2 normal;
    Vec2 tangent;
    Vec2 surface;
    double penetration;
    double slip;
    enum class Mode { Stick, Slide, Off } mode = Mode::Stick;
    double slide_sign = 0.0;
  };
  std::array<Contact, kLegs> contacts;
  int n_contacts = 0;
  for (int leg = 0; leg < kLegs; ++leg) {
    next.contact[leg] = false;
    const PointKinematics foot = leg_point(q, v, model, leg, 0.0, model.shank_length);
    const double depth = field.height_at(foot.p.x()) - foot.p.y();
    if (!(depth > 1e-12)) {
      continue;
    }
    const terrain::Knot surface = field.closest_surface_point(foot.p.x(), foot.p.y(), depth);
    Vec2 normal(surface.x - foot.p.x(), surface.z - foot.p.y());
    const double penetration = normal.norm();
    if (!(penetration > 1e-12)) {
      continue;
    }
    normal /= penetration;
    Contact& c = contacts[n_contacts++];
    c.leg = leg;
    c.J = foot.J;
    c.normal = normal;
    c.tangent = Vec2(normal.y(), -normal.x());
    c.surface = Vec2(surface.x, surface.z);
    c.penetration = penetration;
    const Vec2 anchor = state.contact[leg] ? state.anchor[leg] : c.surface;
    c.slip = (c.surface - anchor).dot(c.tangent);
  }

  // Contact forces are evaluated at the end of the step, linearized in the new velocity:
  //   f_n = k (pen - dt vn+) - d vn+,  f_t = -k_t (slip + dt vt+) - d_t vt+  (sticking)
  //   f_t = sign * mu * f_n  (sliding).
  // The active set (off / stick / slide) is refined until it agrees with contact_force().
  const double cn = params.damping + dt * params.stiffness;
  const double ct = params.tangential_damping + dt * params.tangential_stiffness;
  GenVector v_half;
  std::array<ContactForce, kLegs> applied{};
  for (int iter = 0; iter < 6; ++iter) {
    GenMatrix A = eom.mass;
    GenVector rhs = eom.mass * v + dt * force;
    for (int i = 0; i < n_contacts; ++i) {
      const Contact& c = contacts[i];
      if (c.mode == Contact::Mode::Off) {
        continue;
      }
      const Eigen::Matrix<double, 1, kDof> Jn = c.normal.transpose() * c.J;
      const Eigen::Matrix<double, 1, kDof> Jt = c.tangent.transpose() * c.J;
      const double fn0 = params.stiffness * c.penetration;
      A.noalias() += dt * cn * Jn.transpose() * Jn;
      rhs.noalias() += dt * fn0 * Jn.transpose();
      if (c.mode == Contact::Mode::Stick) {
        A.noalias() += dt * ct * Jt.transpose() * Jt;
        rhs.noalias() -= dt * params.tangential_stiffness * c.slip * Jt.transpose();
      } else {
        const double mu = c.slide_sign * params.friction;
        A.noalias() += dt * mu * cn * Jt.transpose() * Jn;
        rhs.noalias() += dt * mu * fn0 * Jt.transpose();
      }
    }
    v_half = A.partialPivLu().solve(rhs);

    bool consistent = true;
    for (int i = 0; i < n_contacts; ++i) {
      Contact& c = contacts[i];
      const Vec2 vel = c.J * v_half;
      const double vn = vel.dot(c.normal);
      const double vt = vel.dot(c.tangent);
      const double fn = params.stiffness * (c.penetration - dt * vn) - params.damping * vn;
      const double ft_stick =
          -params.tangential_stiffness * (c.slip + dt * vt) - params.tangential_damping * vt;
      const ContactForce law = contact_force(c.penetration - dt * vn, vn, vt, params, c.slip + dt * vt);
      applied[i] = law;
      if (c.mode == Contact::Mode::Off) {
        if (fn > 0.0) {
          c.mode = Contact::Mode::Stick;
          consistent = false;
        }
        continue;
      }
      if (!(fn > 0.0) || law.normal <= 0.0) {
        c.mode = Contact::Mode::Off;
        consistent = false;
        continue;
      }
      const bool exceeds = std::abs(ft_stick) > params.friction * fn;
      if (c.mode == Contact::Mode::Stick && exceeds) {
        c.mode = Contact::Mode::Slide;
        c.slide_sign = ft_stick > 0.0 ? 1.0 : -1.0;
        consistent = false;
      } else if (c.mode == Contact::Mode::Slide && !exceeds) {
        c.mode = Contact::Mode::Stick;
        consistent = false;
      }
    }
    if (consistent) {
      break;
    }
  }

  for (int i = 0; i < n_contacts; ++i) {
    const Contact& c = contacts[i];
    if (c.mode == Contact::Mode::Off) {
      continue;
    }
    next.contact[c.leg] = true;
    if (c.mode == Contact::Mode::Slide) {
      // Drag the sticking point so the spring carries exactly the sliding force.
      next.anchor[c.leg] = c.surface + (applied[i].tangential / params.tangential_stiffness) * c.tangent;
    } else if (!state.contact[c.leg]) {
      next.anchor[c.leg] = c.surface;
    }
  }

  const GenVector momentum = eom.mass * v_half;
  next.q = q + dt * v_half;
  next.v = Eigen::LDLT<GenMatrix>(mass_matrix(next.q, model)).solve(momentum);

  const JointVector lo = joint_lower_limits(model);
  const JointVector hi = joint_upper_limits(model);
  for (int j = 0; j < kJoints; ++j) {
    double& qj = next.q[3 + j];
    double& vj = next.v[3 + j];
    if (qj < lo[j]) {
      qj = lo[j];
      vj = std::max(vj, 0.0);
    } else if (qj > hi[j]) {
      qj = hi[j];
      vj = std::min(vj, 0.0);
    }
  }
  next.time = state.time + dt;

  if (!all_finite(next.q) || !all_finite(next.v)) {
    throw NonFiniteError("simulation state left the finite range");
  }
  return next;
}

RobotState advance(const RobotState& state, const JointVector& q_target,
                   const terrain::HeightField& field, const RobotModel& model,
                   const ContactParams& params, int substeps) {
  RobotState s = state;
  for (int i = 0; i < substeps; ++i) {
    s = step(s, q_target, field, model, params, kPhysicsDt);
  }
  return s;
}

RobotState control_step(const RobotState& state, const JointVector& q_target,
                        const terrain::HeightField& field, const RobotModel& model,
                        const ContactParams& params) {
  return advance(state, q_target, field, model, params, kSubstepsPerControl);
}

}  // namespace sparsewalk::dynamics
