#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>

namespace uavrl {

/// Full 6-DOF kinematic state of the vehicle. Positions are in the fixed
/// navigation frame (z up), velocity and angular rate in the body frame,
/// attitude as ZYX Euler angles (roll, pitch, yaw), wrapped to [-pi, pi].
struct KinematicState {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();      // m, navigation frame
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();      // m/s, body frame
  Eigen::Vector3d attitude = Eigen::Vector3d::Zero();      // rad: roll, pitch, yaw
  Eigen::Vector3d angular_rate = Eigen::Vector3d::Zero();  // rad/s, body frame
};

/// Constant lateral wind, expressed as a force in the navigation frame.
struct WindField {
  Eigen::Vector2d force = Eigen::Vector2d::Zero();  // N

  /// Wind of `magnitude` newtons coming FROM compass heading `heading_deg`
  /// (degrees from +x), i.e. the force points away from that heading.
  static WindField from_heading(double magnitude, double heading_deg);

  double magnitude() const { return force.norm(); }
  /// Heading the wind comes from, degrees in [0, 360).
  double heading_deg() const;
};

/// Thrust-and-torque demand produced by the controller and consumed by
/// control allocation. Thrust acts along body +z.
struct Wrench {
  double thrust_z = 0.0;                              // N
  Eigen::Vector3d torque = Eigen::Vector3d::Zero();   // N m, body frame
};

/// Physical octorotor description. The default geometry is a flat 8-arm
/// layout with arms at 45 degree increments and alternating spin
/// directions; see calibrated_octorotor() for how the coefficients are
/// chosen.
struct VehicleParams {
  double mass = 10.66;  // kg
  Eigen::Vector3d inertia = Eigen::Vector3d(1.0, 1.0, 2.0);  // diagonal, kg m^2
  double arm_length = 0.635;  // m
  int rotor_count = 8;
  std::array<double, 8> rotor_angles{};    // azimuth from +x, rad
  std::array<int, 8> spin_directions{};    // +1 ccw / -1 cw, alternating
  double thrust_coeff = 5.8e-5;   // k_f, N/(rad/s)^2
  double torque_coeff = 9.3e-7;   // k_m, N m/(rad/s)^2
  double max_rotor_speed = 670.0; // rad/s, hard saturation
  double rated_thrust = 100.0;    // N, thrust used for envelope arithmetic
  double gravity = 9.81;          // m/s^2

  /// Saturation thrust with every rotor at max_rotor_speed.
  double max_total_thrust() const {
    return rotor_count * thrust_coeff * max_rotor_speed * max_rotor_speed;
  }
  double hover_thrust() const { return mass * gravity; }
};

/// Validates invariants (positive mass/inertia/coefficients, balanced spin
/// directions); throws std::invalid_argument on violation.
void validate(const VehicleParams& params);

/// Builds an octorotor whose flight envelope matches the reference
/// vehicle: lateral force of mass*target_lateral_accel at max_tilt, i.e.
/// rated_thrust = mass*target_lateral_accel/sin(max_tilt). Rotor
/// saturation is placed at `thrust_to_weight` times hover so the
/// allocator never clips in normal flight; the inertia is a point-mass
/// on-arms approximation of the geometry.
VehicleParams calibrated_octorotor(double mass = 10.66,
                                   double max_tilt = M_PI / 12.0,
                                   double target_lateral_accel = 2.5,
                                   double thrust_to_weight = 2.0);

/// Lateral force available at max_tilt and rated thrust, over mass.
/// Requires 0 < max_tilt < pi/2.
double max_lateral_accel(const VehicleParams& params, double max_tilt);

/// 4x8 mixer mapping squared rotor speeds to (F_z, tau_x, tau_y, tau_z).
Eigen::Matrix<double, 4, 8> mixer_matrix(const VehicleParams& params);

/// Caches the mixer pseudo-inverse so per-tick allocation is a matvec.
class Allocator {
 public:
  explicit Allocator(const VehicleParams& params);

  /// Minimum-norm allocation in squared-speed space. Negative squared
  /// speeds clip to zero before the square root; speeds clip to
  /// [0, max_rotor_speed]. Throws std::invalid_argument on a non-finite
  /// wrench.
  std::array<double, 8> allocate(const Wrench& wrench) const;

  const Eigen::Matrix<double, 4, 8>& mixer() const { return mixer_; }

 private:
  Eigen::Matrix<double, 4, 8> mixer_;
  Eigen::Matrix<double, 8, 4> pinv_;
  double max_speed_;
};

/// One-shot convenience wrapper around Allocator.
std::array<double, 8> allocate(const Wrench& wrench, const VehicleParams& params);

/// Rotation taking body-frame vectors into the navigation frame (ZYX).
Eigen::Matrix3d rotation_body_to_nav(const Eigen::Vector3d& attitude);

/// Wraps an angle into [-pi, pi].
double wrap_angle(double a);

/// Advances the rigid body one step of semi-implicit Euler: body-frame
/// velocity and angular rate first (thrust, gravity, wind, gyroscopic
/// term), then position and Euler angles from the updated rates. Angles
/// wrap to [-pi, pi]. Commanded speeds take effect instantly (no motor
/// transients). Throws std::invalid_argument on non-finite input, dt <= 0
/// or speeds outside [0, max_rotor_speed].
KinematicState dynamics_step(const KinematicState& state,
                             const std::array<double, 8>& rotor_speeds,
                             const WindField& wind,
                             const VehicleParams& params,
                             double dt);

bool all_finite(const KinematicState& state);

}  // namespace uavrl
