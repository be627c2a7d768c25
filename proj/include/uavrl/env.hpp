#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "uavrl/controller.hpp"
#include "uavrl/vehicle.hpp"

namespace uavrl {

/// Granular navigation episode settings: the bounding box around the
/// waypoint, the supervisory decision period, and the termination rules.
struct EpisodeConfig {
  double bounding_box = 20.0;       // m, cube side; also the obs position scale
  double scaling_factor = 0.25;     // fraction of the box the supervisor may offset
  int steps_between_actions = 10;   // physics ticks per supervisory decision
  double dt = 0.01;                 // s
  double max_time = 20.0;           // s
  double tip_threshold = 30.0 * M_PI / 180.0;  // rad, on roll or pitch
  double arrival_radius = 0.6;      // m, one propeller arm span
  double max_velocity = 3.0;        // m/s
  double omega_bound = 2.0 * M_PI;  // rad/s, observation scale for body rates

  long max_ticks() const { return static_cast<long>(max_time / dt + 0.5); }
};

void validate(const EpisodeConfig& config);

using Observation = std::array<double, 12>;
using SupervisoryAction = std::array<double, 3>;

enum class TerminationReason { running, reached, tipped, out_of_bounds, timed_out };

const char* to_string(TerminationReason r);

struct StepResult {
  Observation observation{};
  double reward = 0.0;
  bool done = false;
  TerminationReason reason = TerminationReason::running;
};

/// Min-max normalization of the kinematic state relative to `waypoint`:
/// positions by bounding_box, velocities by max_velocity, angles by pi,
/// rates by omega_bound; every component clips to [-1, 1].
Observation normalize(const KinematicState& state, const Eigen::Vector3d& waypoint,
                      const EpisodeConfig& config);

/// Inverse of normalize for in-range observations (clipped components do
/// not round-trip).
KinematicState denormalize(const Observation& obs, const Eigen::Vector3d& waypoint,
                           const EpisodeConfig& config);

/// Per-decision reward: -dt - (|psi_1| - |psi_0|) + |dr| - |dr x dhat|,
/// with dhat the unit vector along (r_wp - r_0). Throws
/// std::invalid_argument when r_wp == r_0 (degenerate path).
double reward(const Eigen::Vector3d& r_i, const Eigen::Vector3d& r_ip1,
              double psi_i, double psi_ip1, const Eigen::Vector3d& r_wp,
              const Eigen::Vector3d& r_0, double dt);

/// Terminal bonus/penalty: reached -> +box*20, tipped or out of bounds ->
/// -box*20, timed out -> -distance*10. Throws std::logic_error for
/// reason == running.
double terminal_reward(TerminationReason reason, const Eigen::Vector3d& position,
                       const Eigen::Vector3d& waypoint, double bounding_box);

/// One tick of the per-tick trajectory log (CSV schema below).
struct TickRow {
  double t = 0.0;
  KinematicState state;
  Eigen::Vector3d reference = Eigen::Vector3d::Zero();
  int reward_flag = 0;  // 1 on ticks that close a supervisory decision
  int segment = 0;
};

/// CSV header for tick logs; set with_segment for flight logs.
std::string tick_log_header(bool with_segment);
std::string tick_log_row(const TickRow& row, bool with_segment);

/// Parses a tick-log CSV (either schema); throws std::runtime_error with
/// a line number on malformed rows.
std::vector<TickRow> read_tick_log(const std::string& path);

/// Environment interface the learner collects rollouts from.
class RolloutEnv {
 public:
  virtual ~RolloutEnv() = default;
  virtual Observation reset(std::uint64_t seed) = 0;
  virtual StepResult step(const SupervisoryAction& action) = 0;
};

/// One granular navigation episode: waypoint-relative flight inside the
/// bounding box, supervisory reference offsets every
/// steps_between_actions ticks, per-decision rewards and the terminal
/// bonus. Instances are independent; all randomness flows from the reset
/// seed.
class Episode : public RolloutEnv {
 public:
  Episode(const VehicleParams& vehicle, const CascadeGains& gains,
          const EpisodeConfig& config, const WindField& wind);

  /// Training-phase reset: position uniform in the half-box, velocity
  /// uniform with magnitude <= max_velocity, level attitude, zero rates,
  /// controller state zeroed.
  Observation reset(std::uint64_t seed) override;

  /// Operating-phase entry: carries vehicle and controller state across a
  /// segment boundary; the path origin r_0 becomes the current position.
  Observation start_segment(const KinematicState& state, const CascadeState& cascade,
                            const Eigen::Vector3d& waypoint);

  /// Applies the supervisory offset scaling_factor*bounding_box*action to
  /// the waypoint reference and advances up to steps_between_actions
  /// physics ticks (fewer if the episode terminates mid-block). Throws
  /// std::logic_error if the episode is already finished.
  StepResult step(const SupervisoryAction& action) override;

  bool done() const { return done_; }
  TerminationReason reason() const { return reason_; }
  const KinematicState& state() const { return state_; }
  const CascadeState& cascade_state() const { return cascade_; }
  const Eigen::Vector3d& waypoint() const { return waypoint_; }
  const Eigen::Vector3d& start_position() const { return start_position_; }
  long ticks() const { return tick_; }
  double time() const { return tick_ * config_.dt; }
  double total_reward() const { return total_reward_; }
  const EpisodeConfig& config() const { return config_; }

  /// Optional per-tick log sink; rows are stamped with `segment` and the
  /// tick clock offset by `t0`.
  void set_log(std::vector<TickRow>* sink, double t0 = 0.0, int segment = 0);

 private:
  void check_termination();
  Observation observe() const;

  VehicleParams vehicle_;
  CascadeGains gains_;
  EpisodeConfig config_;
  WindField wind_;
  Allocator allocator_;

  KinematicState state_;
  CascadeState cascade_;
  Eigen::Vector3d waypoint_ = Eigen::Vector3d::Zero();
  Eigen::Vector3d start_position_ = Eigen::Vector3d::Zero();
  long tick_ = 0;
  bool active_ = false;
  bool done_ = false;
  TerminationReason reason_ = TerminationReason::running;
  double total_reward_ = 0.0;

  std::vector<TickRow>* log_ = nullptr;
  double log_t0_ = 0.0;
  int log_segment_ = 0;
};

}  // namespace uavrl
