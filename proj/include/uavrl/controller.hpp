#pragma once

#include <Eigen/Dense>

#include "uavrl/vehicle.hpp"

namespace uavrl {

/// Scalar gains for one loop; the same scalar is applied to both lateral
/// axes. The integral accumulator is clamped to integral_limit and the
/// loop output to output_limit.
struct PidGains {
  double k_p = 0.0;
  double k_i = 0.0;
  double k_d = 0.0;
  double integral_limit = 0.1;
  double output_limit = 1.0;
};

/// Internal state of one scalar PID channel.
struct PidState {
  double integral = 0.0;
  double prev_error = 0.0;
  double last_output = 0.0;
  bool has_prev = false;
};

/// The full cascade: position -> velocity -> attitude -> rate, with the
/// z channel as two P-only loops around the hover feed-forward. Loop
/// outputs are clamped to the flight envelope (max_velocity, max_tilt,
/// rate_max_acc). Position and velocity updates run every
/// position_period_ticks ticks, attitude and rate every tick.
struct CascadeGains {
  PidGains position{0.0, 0.0, 0.0, 0.3, 3.0};
  PidGains velocity{0.0, 0.0, 0.0, 0.25, 2.5};
  PidGains attitude{0.0, 0.0, 0.0, 0.35, 3.5};
  PidGains rate{0.0, 0.0, 0.0, 0.5, 5.0};
  double rate_max_acc = 5.0;        // rad/s^2, torque-side clip
  double sqrt_scaling_accel = 2.5;  // m/s^2, Eq.-style limit for the position loop
  bool leash_enabled = true;
  double altitude_velocity_kp = 1.0;
  double altitude_rate_kp = 10.0;
  double max_velocity = 3.0;        // m/s
  double max_tilt = M_PI / 12.0;    // rad
  int position_period_ticks = 10;   // 10 Hz outer loops at dt = 0.01
};

/// All controller memory: eight PID channels plus the outputs held
/// between slow-loop updates. Value-semantics so a controller can be
/// snapshotted and replayed.
struct CascadeState {
  PidState pos_x, pos_y;
  PidState vel_x, vel_y;
  PidState att_roll, att_pitch;
  PidState rate_p, rate_q;
  // Held between 10 Hz updates.
  Eigen::Vector2d velocity_ref = Eigen::Vector2d::Zero();
  Eigen::Vector2d attitude_ref = Eigen::Vector2d::Zero();  // roll, pitch
  double climb_rate_ref = 0.0;
  double thrust_correction = 0.0;
};

/// Square-root-scaled proportional response: linear k_p*e inside the
/// region |e| <= accel_limit/k_p^2, sqrt(2*accel_limit*(|e| - L/2))
/// beyond it (pure sqrt law when k_p == 0), finally clipped to
/// +-|e|/dt. Odd-symmetric and continuous at the region boundary.
/// Throws std::invalid_argument for accel_limit <= 0, dt <= 0 or k_p < 0.
double sqrt_scale(double error, double k_p, double accel_limit, double dt);

/// Kinematic cap on the position error magnitude fed to the proportional
/// path: accel_limit/(2 k_p^2) + speed^2/(2 accel_limit).
/// Requires accel_limit > 0, k_p > 0, speed >= 0.
double leash(double k_p, double accel_limit, double speed);

/// One PID update. P term is sqrt-scaled when use_sqrt; derivative acts
/// on the error and is zero on the first step; the integral accumulates
/// e*dt and is clamped before k_i multiplies it; the summed output is
/// clamped to output_limit.
double pid_step(const PidGains& gains, PidState& state, double error, double dt,
                bool use_sqrt = false, double accel_limit = 1.0);

/// Runs the four-loop cascade for one physics tick and returns the wrench
/// demand. `tick` must advance by one per call; the position/velocity/
/// altitude loops only recompute on tick % position_period_ticks == 0 and
/// their outputs are held in `state` in between. The yaw channel output
/// is forced to zero.
Wrench cascade_step(const CascadeGains& gains, CascadeState& state,
                    const Eigen::Vector3d& reference_position,
                    const KinematicState& measured, const VehicleParams& vehicle,
                    double dt, long tick);

/// Hand-tuned gains that fly the calibrated octorotor competently in
/// calm air; the starting point for searches and tests.
CascadeGains baseline_gains();

}  // namespace uavrl
