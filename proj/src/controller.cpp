#include "uavrl/controller.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace uavrl {

namespace {
double clamp_abs(double v, double limit) {
  return std::clamp(v, -limit, limit);
}
}  // namespace

double sqrt_scale(double error, double k_p, double accel_limit, double dt) {
  if (!(accel_limit > 0.0)) throw std::invalid_argument("sqrt_scale: accel_limit must be > 0");
  if (!(dt > 0.0)) throw std::invalid_argument("sqrt_scale: dt must be > 0");
  if (k_p < 0.0) throw std::invalid_argument("sqrt_scale: k_p must be >= 0");
  const double mag = std::abs(error);
  const double sign = error < 0.0 ? -1.0 : 1.0;
  double out;
  if (k_p == 0.0) {
    out = sign * std::sqrt(2.0 * accel_limit * mag);
  } else {
    const double linear_dist = accel_limit / (k_p * k_p);
    if (mag <= linear_dist) {
      out = k_p * error;
    } else {
      out = sign * std::sqrt(2.0 * accel_limit * (mag - 0.5 * linear_dist));
    }
  }
  // Keeps the correction from overshooting the error in one interval.
  return clamp_abs(out, mag / dt);
}

double leash(double k_p, double accel_limit, double speed) {
  if (!(accel_limit > 0.0)) throw std::invalid_argument("leash: accel_limit must be > 0");
  if (!(k_p > 0.0)) throw std::invalid_argument("leash: k_p must be > 0");
  if (speed < 0.0) throw std::invalid_argument("leash: speed must be >= 0");
  return std::abs(accel_limit / (2.0 * k_p * k_p) + speed * speed / (2.0 * accel_limit));
}

double pid_step(const PidGains& g, PidState& s, double error, double dt,
                bool use_sqrt, double accel_limit) {
  if (!(dt > 0.0)) throw std::invalid_argument("pid_step: dt must be > 0");
  const double p_term =
      use_sqrt ? sqrt_scale(error, g.k_p, accel_limit, dt) : g.k_p * error;
  const double d_term = s.has_prev ? g.k_d * (error - s.prev_error) / dt : 0.0;
  s.integral = clamp_abs(s.integral + error * dt, g.integral_limit);
  double out = p_term + d_term + g.k_i * s.integral;
  out = clamp_abs(out, g.output_limit);
  s.prev_error = error;
  s.has_prev = true;
  s.last_output = out;
  return out;
}

CascadeGains baseline_gains() {
  CascadeGains g;
  g.position = PidGains{1.0, 0.05, 0.0, 0.3, 3.0};
  g.velocity = PidGains{2.0, 1.0, 0.1, 0.25, 2.5};
  g.attitude = PidGains{6.0, 0.0, 0.0, 0.35, 3.5};
  g.rate = PidGains{20.0, 2.0, 0.0, 1.0, 10.0};
  g.rate_max_acc = 10.0;
  g.sqrt_scaling_accel = 2.5;
  return g;
}

Wrench cascade_step(const CascadeGains& g, CascadeState& cs,
                    const Eigen::Vector3d& ref, const KinematicState& m,
                    const VehicleParams& vp, double dt, long tick) {
  const Eigen::Matrix3d r_bn = rotation_body_to_nav(m.attitude);
  const Eigen::Vector3d vel_nav = r_bn * m.velocity;
  const double slow_dt = dt * g.position_period_ticks;

  if (tick % g.position_period_ticks == 0) {
    // Lateral position loop: error leashed by current kinematics, then
    // sqrt-scaled P plus I/D per axis, envelope-clipped to max_velocity.
    Eigen::Vector2d e_pos = (ref - m.position).head<2>();
    if (g.leash_enabled && g.position.k_p > 0.0) {
      // Stopping-distance leash at the speed envelope. Feeding the
      // instantaneous speed instead creates a creep equilibrium at high
      // k_p: from rest the leash collapses to ~accel/(2 k_p^2) and the
      // velocity reference can never grow.
      const double max_err =
          leash(g.position.k_p, g.sqrt_scaling_accel, g.max_velocity);
      const double n = e_pos.norm();
      if (n > max_err) e_pos *= max_err / n;
    }
    Eigen::Vector2d vref(
        pid_step(g.position, cs.pos_x, e_pos.x(), slow_dt, true, g.sqrt_scaling_accel),
        pid_step(g.position, cs.pos_y, e_pos.y(), slow_dt, true, g.sqrt_scaling_accel));
    const double vn = vref.norm();
    if (vn > g.max_velocity) vref *= g.max_velocity / vn;
    cs.velocity_ref = vref;

    // Lateral velocity loop -> desired acceleration -> tilt references.
    const Eigen::Vector2d e_vel = vref - vel_nav.head<2>();
    const Eigen::Vector2d accel(
        pid_step(g.velocity, cs.vel_x, e_vel.x(), slow_dt),
        pid_step(g.velocity, cs.vel_y, e_vel.y(), slow_dt));
    // Rotate the demand into the yaw frame; small-angle tilt mapping
    // (z-up: +pitch accelerates +x, +roll accelerates -y).
    const double cy = std::cos(m.attitude.z()), sy = std::sin(m.attitude.z());
    const double ax = cy * accel.x() + sy * accel.y();
    const double ay = -sy * accel.x() + cy * accel.y();
    cs.attitude_ref.x() = clamp_abs(-ay / vp.gravity, g.max_tilt);  // roll
    cs.attitude_ref.y() = clamp_abs(ax / vp.gravity, g.max_tilt);   // pitch

    // Altitude chain, P-only: z error -> climb-rate ref -> thrust trim.
    cs.climb_rate_ref =
        clamp_abs(g.altitude_velocity_kp * (ref.z() - m.position.z()), g.max_velocity);
    cs.thrust_correction = g.altitude_rate_kp * (cs.climb_rate_ref - vel_nav.z());
  }

  // Attitude loop (every tick): sqrt-scaled P against the angular
  // acceleration limit, producing body-rate references. Yaw is disabled.
  const double p_ref = clamp_abs(
      pid_step(g.attitude, cs.att_roll,
               wrap_angle(cs.attitude_ref.x() - m.attitude.x()), dt, true,
               g.rate_max_acc),
      g.attitude.output_limit);
  const double q_ref = clamp_abs(
      pid_step(g.attitude, cs.att_pitch,
               wrap_angle(cs.attitude_ref.y() - m.attitude.y()), dt, true,
               g.rate_max_acc),
      g.attitude.output_limit);

  // Rate loop -> angular acceleration, clipped, -> torques.
  const double alpha_p = clamp_abs(
      pid_step(g.rate, cs.rate_p, p_ref - m.angular_rate.x(), dt), g.rate_max_acc);
  const double alpha_q = clamp_abs(
      pid_step(g.rate, cs.rate_q, q_ref - m.angular_rate.y(), dt), g.rate_max_acc);

  Wrench w;
  w.torque = Eigen::Vector3d(vp.inertia.x() * alpha_p, vp.inertia.y() * alpha_q, 0.0);
  const double tilt_cos =
      std::max(std::cos(m.attitude.x()) * std::cos(m.attitude.y()), 0.5);
  w.thrust_z = vp.hover_thrust() / tilt_cos + cs.thrust_correction;
  w.thrust_z = std::clamp(w.thrust_z, 0.0, vp.max_total_thrust());
  return w;
}

}  // namespace uavrl
