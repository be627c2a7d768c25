#include "uavrl/vehicle.hpp"

#include <cmath>
#include <stdexcept>

namespace uavrl {

WindField WindField::from_heading(double magnitude, double heading_deg) {
  if (!(magnitude >= 0.0)) throw std::invalid_argument("wind magnitude must be >= 0");
  const double h = heading_deg * M_PI / 180.0;
  WindField w;
  w.force = -magnitude * Eigen::Vector2d(std::cos(h), std::sin(h));
  return w;
}

double WindField::heading_deg() const {
  if (force.norm() == 0.0) return 0.0;
  double deg = std::atan2(-force.y(), -force.x()) * 180.0 / M_PI;
  if (deg < 0.0) deg += 360.0;
  return deg;
}

void validate(const VehicleParams& p) {
  if (!(p.mass > 0.0)) throw std::invalid_argument("mass must be > 0");
  if (!(p.inertia.minCoeff() > 0.0))
    throw std::invalid_argument("inertia diagonal must be > 0");
  if (!(p.thrust_coeff > 0.0) || !(p.torque_coeff > 0.0))
    throw std::invalid_argument("k_f and k_m must be > 0");
  if (!(p.max_rotor_speed > 0.0))
    throw std::invalid_argument("max_rotor_speed must be > 0");
  if (p.rotor_count != 8) throw std::invalid_argument("rotor_count must be 8");
  int spin_sum = 0;
  for (int d : p.spin_directions) {
    if (d != 1 && d != -1) throw std::invalid_argument("spin directions must be +/-1");
    spin_sum += d;
  }
  if (spin_sum != 0) throw std::invalid_argument("spin directions must sum to 0");
}

VehicleParams calibrated_octorotor(double mass, double max_tilt,
                                   double target_lateral_accel,
                                   double thrust_to_weight) {
  VehicleParams p;
  p.mass = mass;
  p.arm_length = 0.635;
  p.rotor_count = 8;
  for (int i = 0; i < 8; ++i) {
    p.rotor_angles[i] = i * (M_PI / 4.0);
    p.spin_directions[i] = (i % 2 == 0) ? 1 : -1;
  }
  // Envelope thrust is what the quoted lateral-force figure refers to;
  // the saturation thrust sits higher so hover never clips.
  p.rated_thrust = mass * target_lateral_accel / std::sin(max_tilt);
  const double max_thrust = thrust_to_weight * mass * p.gravity;
  p.max_rotor_speed = 670.0;
  p.thrust_coeff = max_thrust / (8.0 * p.max_rotor_speed * p.max_rotor_speed);
  p.torque_coeff = 0.016 * p.thrust_coeff;
  // Point masses on arms, 55% of mass at radius arm_length.
  const double m_arms = 0.55 * mass;
  const double r2 = p.arm_length * p.arm_length;
  p.inertia = Eigen::Vector3d(0.5 * m_arms * r2, 0.5 * m_arms * r2, m_arms * r2);
  validate(p);
  return p;
}

double max_lateral_accel(const VehicleParams& p, double max_tilt) {
  if (!(max_tilt > 0.0) || !(max_tilt < M_PI / 2.0))
    throw std::invalid_argument("max_tilt must be in (0, pi/2)");
  return p.rated_thrust * std::sin(max_tilt) / p.mass;
}

Eigen::Matrix<double, 4, 8> mixer_matrix(const VehicleParams& p) {
  Eigen::Matrix<double, 4, 8> m;
  for (int i = 0; i < 8; ++i) {
    const double a = p.rotor_angles[i];
    m(0, i) = p.thrust_coeff;
    m(1, i) = p.thrust_coeff * p.arm_length * std::sin(a);
    m(2, i) = -p.thrust_coeff * p.arm_length * std::cos(a);
    m(3, i) = -p.spin_directions[i] * p.torque_coeff;
  }
  return m;
}

Allocator::Allocator(const VehicleParams& params)
    : mixer_(mixer_matrix(params)), max_speed_(params.max_rotor_speed) {
  Eigen::CompleteOrthogonalDecomposition<Eigen::Matrix<double, 4, 8>> cod(mixer_);
  pinv_ = cod.pseudoInverse();
}

std::array<double, 8> Allocator::allocate(const Wrench& w) const {
  if (!std::isfinite(w.thrust_z) || !w.torque.allFinite())
    throw std::invalid_argument("allocate: non-finite wrench");
  Eigen::Vector4d demand(w.thrust_z, w.torque.x(), w.torque.y(), w.torque.z());
  Eigen::Matrix<double, 8, 1> sq = pinv_ * demand;
  std::array<double, 8> speeds{};
  for (int i = 0; i < 8; ++i) {
    const double s2 = sq(i) > 0.0 ? sq(i) : 0.0;
    double s = std::sqrt(s2);
    if (s > max_speed_) s = max_speed_;
    speeds[i] = s;
  }
  return speeds;
}

std::array<double, 8> allocate(const Wrench& wrench, const VehicleParams& params) {
  return Allocator(params).allocate(wrench);
}

Eigen::Matrix3d rotation_body_to_nav(const Eigen::Vector3d& att) {
  const double cr = std::cos(att.x()), sr = std::sin(att.x());
  const double cp = std::cos(att.y()), sp = std::sin(att.y());
  const double cy = std::cos(att.z()), sy = std::sin(att.z());
  Eigen::Matrix3d r;
  r << cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr,
       sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr,
       -sp,     cp * sr,               cp * cr;
  return r;
}

double wrap_angle(double a) {
  a = std::fmod(a + M_PI, 2.0 * M_PI);
  if (a < 0.0) a += 2.0 * M_PI;
  return a - M_PI;
}

bool all_finite(const KinematicState& s) {
  return s.position.allFinite() && s.velocity.allFinite() &&
         s.attitude.allFinite() && s.angular_rate.allFinite();
}

KinematicState dynamics_step(const KinematicState& state,
                             const std::array<double, 8>& rotor_speeds,
                             const WindField& wind, const VehicleParams& p,
                             double dt) {
  if (!all_finite(state)) throw std::invalid_argument("dynamics_step: non-finite state");
  if (!(dt > 0.0)) throw std::invalid_argument("dynamics_step: dt must be > 0");
  if (!wind.force.allFinite()) throw std::invalid_argument("dynamics_step: non-finite wind");
  for (double s : rotor_speeds) {
    if (!std::isfinite(s) || s < 0.0 || s > p.max_rotor_speed)
      throw std::invalid_argument("dynamics_step: rotor speed outside [0, max]");
  }

  double thrust = 0.0;
  Eigen::Vector3d torque = Eigen::Vector3d::Zero();
  for (int i = 0; i < 8; ++i) {
    const double s2 = rotor_speeds[i] * rotor_speeds[i];
    const double f = p.thrust_coeff * s2;
    thrust += f;
    torque.x() += f * p.arm_length * std::sin(p.rotor_angles[i]);
    torque.y() += -f * p.arm_length * std::cos(p.rotor_angles[i]);
    torque.z() += -p.spin_directions[i] * p.torque_coeff * s2;
  }

  const Eigen::Matrix3d r_bn = rotation_body_to_nav(state.attitude);
  // Gravity enters as an acceleration so the mass never round-trips
  // through a multiply-divide; wind is an applied force at the CoM.
  const Eigen::Vector3d wind_nav(wind.force.x(), wind.force.y(), 0.0);
  Eigen::Vector3d accel_body =
      Eigen::Vector3d(0.0, 0.0, thrust / p.mass) +
      r_bn.transpose() * (wind_nav / p.mass + Eigen::Vector3d(0.0, 0.0, -p.gravity)) -
      state.angular_rate.cross(state.velocity);

  const Eigen::Vector3d omega = state.angular_rate;
  const Eigen::Vector3d i_omega = p.inertia.cwiseProduct(omega);
  const Eigen::Vector3d omega_dot =
      (torque - omega.cross(i_omega)).cwiseQuotient(p.inertia);

  KinematicState next;
  next.velocity = state.velocity + dt * accel_body;
  next.angular_rate = omega + dt * omega_dot;
  next.position = state.position + dt * (r_bn * next.velocity);

  // Euler-angle kinematics from the updated body rates.
  const double cr = std::cos(state.attitude.x()), sr = std::sin(state.attitude.x());
  const double cp = std::cos(state.attitude.y());
  const double tp = std::tan(state.attitude.y());
  const Eigen::Vector3d w = next.angular_rate;
  Eigen::Vector3d euler_dot(w.x() + sr * tp * w.y() + cr * tp * w.z(),
                            cr * w.y() - sr * w.z(),
                            (sr * w.y() + cr * w.z()) / cp);
  next.attitude = state.attitude + dt * euler_dot;
  for (int i = 0; i < 3; ++i) next.attitude(i) = wrap_angle(next.attitude(i));

  if (!all_finite(next)) throw std::invalid_argument("dynamics_step: produced non-finite state");
  return next;
}

}  // namespace uavrl
