#pragma once

#include <string>
#include <vector>

#include "uavrl/env.hpp"
#include "uavrl/ppo.hpp"

namespace uavrl {

/// An ordered list of waypoints in the navigation frame. The first entry
/// is the spawn point; every following entry is one flight segment.
struct Trajectory {
  std::string name;
  std::vector<Eigen::Vector3d> waypoints;
};

/// Inserts intermediate waypoints so consecutive ones are at most
/// bounding_box apart (uniform spacing per leg, ceil division), keeping
/// the original vertices. Zero-length legs are dropped with a warning on
/// stderr. Throws std::invalid_argument on an empty path.
Trajectory decompose(const std::vector<Eigen::Vector3d>& path, double bounding_box);

/// Plain-text waypoint file: one "x,y,z" per line, '#' comments.
Trajectory load_trajectory_file(const std::string& path);

enum class ControlMode { pid_only, rl_supervised };

struct SegmentOutcome {
  TerminationReason reason = TerminationReason::running;
  double reward = 0.0;       // per-decision rewards plus the terminal bonus
  double flight_time = 0.0;  // s
  Eigen::Vector3d waypoint = Eigen::Vector3d::Zero();
  Eigen::Vector3d start_position = Eigen::Vector3d::Zero();
};

struct FlightResult {
  std::vector<SegmentOutcome> segments;
  std::vector<TickRow> log;
  KinematicState final_state;
};

struct FlightOptions {
  /// Segment index (0-based) from which the wind applies; 0 applies it
  /// for the whole flight.
  int wind_onset_segment = 0;
  /// When set, the seed perturbs the spawn position (uniform within
  /// +-bounding_box/8 per axis) and initial velocity (uniform ball of
  /// radius max_velocity/2); otherwise the vehicle spawns exactly on the
  /// first waypoint at rest.
  bool randomize_start = true;
};

/// Flies the trajectory segment by segment (Algorithm-style operating
/// phase): the position observation is re-based onto each waypoint, the
/// supervisor acts every steps_between_actions ticks in rl_supervised
/// mode (pid_only keeps the reference on the waypoint), and vehicle and
/// PID state carry across segment boundaries. Tipping or leaving the box
/// ends the flight early; a timeout moves on to the next waypoint.
/// Throws std::invalid_argument when rl_supervised has no policy or the
/// trajectory has fewer than two waypoints.
FlightResult fly(const Trajectory& trajectory, ControlMode mode,
                 const CascadeGains& gains, const PolicyParameters* policy,
                 const WindField& wind, const EpisodeConfig& config,
                 const VehicleParams& vehicle, std::uint64_t seed,
                 const FlightOptions& options = {});

struct FlightScore {
  double total_reward = 0.0;
  double completion = 0.0;      // reached segments / total segments
  double mean_deviation = 0.0;  // per-tick distance from the active chord
  double max_deviation = 0.0;
};

FlightScore score(const FlightResult& result);

}  // namespace uavrl
