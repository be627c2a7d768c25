#include "uavrl/env.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "uavrl/rng.hpp"

namespace uavrl {

void validate(const EpisodeConfig& c) {
  if (!(c.bounding_box > 0.0)) throw std::invalid_argument("bounding_box must be > 0");
  if (!(c.scaling_factor > 0.0) || c.scaling_factor > 1.0)
    throw std::invalid_argument("scaling_factor must be in (0, 1]");
  if (c.steps_between_actions < 1)
    throw std::invalid_argument("steps_between_actions must be >= 1");
  if (!(c.dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  if (!(c.max_time > 0.0)) throw std::invalid_argument("max_time must be > 0");
  if (!(c.arrival_radius > 0.0)) throw std::invalid_argument("arrival_radius must be > 0");
  if (!(c.max_velocity > 0.0)) throw std::invalid_argument("max_velocity must be > 0");
  if (!(c.omega_bound > 0.0)) throw std::invalid_argument("omega_bound must be > 0");
}

const char* to_string(TerminationReason r) {
  switch (r) {
    case TerminationReason::running: return "running";
    case TerminationReason::reached: return "reached";
    case TerminationReason::tipped: return "tipped";
    case TerminationReason::out_of_bounds: return "out_of_bounds";
    case TerminationReason::timed_out: return "timed_out";
  }
  return "unknown";
}

namespace {
double clip1(double v) { return std::clamp(v, -1.0, 1.0); }
}  // namespace

Observation normalize(const KinematicState& s, const Eigen::Vector3d& wp,
                      const EpisodeConfig& c) {
  Observation o{};
  for (int i = 0; i < 3; ++i) o[i] = clip1((s.position(i) - wp(i)) / c.bounding_box);
  for (int i = 0; i < 3; ++i) o[3 + i] = clip1(s.velocity(i) / c.max_velocity);
  for (int i = 0; i < 3; ++i) o[6 + i] = clip1(s.attitude(i) / M_PI);
  for (int i = 0; i < 3; ++i) o[9 + i] = clip1(s.angular_rate(i) / c.omega_bound);
  return o;
}

KinematicState denormalize(const Observation& o, const Eigen::Vector3d& wp,
                           const EpisodeConfig& c) {
  KinematicState s;
  for (int i = 0; i < 3; ++i) s.position(i) = o[i] * c.bounding_box + wp(i);
  for (int i = 0; i < 3; ++i) s.velocity(i) = o[3 + i] * c.max_velocity;
  for (int i = 0; i < 3; ++i) s.attitude(i) = o[6 + i] * M_PI;
  for (int i = 0; i < 3; ++i) s.angular_rate(i) = o[9 + i] * c.omega_bound;
  return s;
}

double reward(const Eigen::Vector3d& r_i, const Eigen::Vector3d& r_ip1,
              double psi_i, double psi_ip1, const Eigen::Vector3d& r_wp,
              const Eigen::Vector3d& r_0, double dt) {
  const Eigen::Vector3d chord = r_wp - r_0;
  const double chord_len = chord.norm();
  if (!(chord_len > 0.0))
    throw std::invalid_argument("reward: degenerate path (r_wp == r_0)");
  const Eigen::Vector3d dhat = chord / chord_len;
  const Eigen::Vector3d dr = r_ip1 - r_i;
  return -dt - (std::abs(psi_ip1) - std::abs(psi_i)) + dr.norm() -
         dr.cross(dhat).norm();
}

double terminal_reward(TerminationReason reason, const Eigen::Vector3d& position,
                       const Eigen::Vector3d& waypoint, double bounding_box) {
  switch (reason) {
    case TerminationReason::reached:
      return bounding_box * 20.0;
    case TerminationReason::tipped:
    case TerminationReason::out_of_bounds:
      return -bounding_box * 20.0;
    case TerminationReason::timed_out:
      return -(position - waypoint).norm() * 10.0;
    case TerminationReason::running:
      break;
  }
  throw std::logic_error("terminal_reward: episode still running");
}

std::string tick_log_header(bool with_segment) {
  std::string h =
      "t,x,y,z,vx,vy,vz,phi,theta,psi,wx,wy,wz,ref_x,ref_y,ref_z,reward_flag";
  if (with_segment) h += ",segment";
  return h;
}

std::string tick_log_row(const TickRow& r, bool with_segment) {
  char buf[512];
  int n = std::snprintf(
      buf, sizeof buf,
      "%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,"
      "%.10g,%.10g,%.10g,%.10g,%d",
      r.t, r.state.position.x(), r.state.position.y(), r.state.position.z(),
      r.state.velocity.x(), r.state.velocity.y(), r.state.velocity.z(),
      r.state.attitude.x(), r.state.attitude.y(), r.state.attitude.z(),
      r.state.angular_rate.x(), r.state.angular_rate.y(), r.state.angular_rate.z(),
      r.reference.x(), r.reference.y(), r.reference.z(), r.reward_flag);
  std::string s(buf, n);
  if (with_segment) {
    n = std::snprintf(buf, sizeof buf, ",%d", r.segment);
    s.append(buf, n);
  }
  return s;
}

std::vector<TickRow> read_tick_log(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("log: cannot open " + path);
  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error("log: empty file " + path);
  const bool with_segment = line.find(",segment") != std::string::npos;
  if (line.rfind("t,x,y,z,", 0) != 0)
    throw std::runtime_error("log: unrecognized header in " + path);
  std::vector<TickRow> rows;
  int lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    TickRow r;
    double v[17];
    int seg = 0;
    const int want = with_segment ? 18 : 17;
    const int got = std::sscanf(
        line.c_str(),
        "%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%d",
        &v[0], &v[1], &v[2], &v[3], &v[4], &v[5], &v[6], &v[7], &v[8], &v[9],
        &v[10], &v[11], &v[12], &v[13], &v[14], &v[15], &v[16], &seg);
    if (got != want)
      throw std::runtime_error("log: parse error at " + path + ":" +
                               std::to_string(lineno));
    r.t = v[0];
    r.state.position = Eigen::Vector3d(v[1], v[2], v[3]);
    r.state.velocity = Eigen::Vector3d(v[4], v[5], v[6]);
    r.state.attitude = Eigen::Vector3d(v[7], v[8], v[9]);
    r.state.angular_rate = Eigen::Vector3d(v[10], v[11], v[12]);
    r.reference = Eigen::Vector3d(v[13], v[14], v[15]);
    r.reward_flag = static_cast<int>(v[16]);
    r.segment = seg;
    rows.push_back(r);
  }
  return rows;
}

Episode::Episode(const VehicleParams& vehicle, const CascadeGains& gains,
                 const EpisodeConfig& config, const WindField& wind)
    : vehicle_(vehicle), gains_(gains), config_(config), wind_(wind),
      allocator_(vehicle) {
  uavrl::validate(vehicle_);
  uavrl::validate(config_);
}

Observation Episode::reset(std::uint64_t seed) {
  Rng rng(seed);
  KinematicState s;
  const double half = 0.5 * config_.bounding_box;
  do {
    for (int i = 0; i < 3; ++i) s.position(i) = rng.uniform(-half, half);
  } while (s.position.norm() < config_.arrival_radius);
  // Uniform in the speed ball.
  Eigen::Vector3d v;
  do {
    for (int i = 0; i < 3; ++i) v(i) = rng.uniform(-1.0, 1.0);
  } while (v.squaredNorm() > 1.0);
  s.velocity = v * config_.max_velocity;
  s.attitude.setZero();
  s.angular_rate.setZero();

  cascade_ = CascadeState{};
  state_ = s;
  waypoint_.setZero();
  start_position_ = s.position;
  tick_ = 0;
  active_ = true;
  done_ = false;
  reason_ = TerminationReason::running;
  total_reward_ = 0.0;
  return observe();
}

Observation Episode::start_segment(const KinematicState& state,
                                   const CascadeState& cascade,
                                   const Eigen::Vector3d& waypoint) {
  if ((waypoint - state.position).norm() <= 0.0)
    throw std::invalid_argument("start_segment: degenerate path (already at waypoint)");
  state_ = state;
  cascade_ = cascade;
  waypoint_ = waypoint;
  start_position_ = state.position;
  tick_ = 0;
  active_ = true;
  done_ = false;
  reason_ = TerminationReason::running;
  total_reward_ = 0.0;
  return observe();
}

void Episode::set_log(std::vector<TickRow>* sink, double t0, int segment) {
  log_ = sink;
  log_t0_ = t0;
  log_segment_ = segment;
}

Observation Episode::observe() const { return normalize(state_, waypoint_, config_); }

void Episode::check_termination() {
  const Eigen::Vector3d rel = state_.position - waypoint_;
  if (rel.norm() <= config_.arrival_radius) {
    done_ = true;
    reason_ = TerminationReason::reached;
  } else if (std::abs(state_.attitude.x()) > config_.tip_threshold ||
             std::abs(state_.attitude.y()) > config_.tip_threshold) {
    done_ = true;
    reason_ = TerminationReason::tipped;
  } else if (rel.cwiseAbs().maxCoeff() > 1.25 * config_.bounding_box) {
    // Segments legitimately begin a full box from their waypoint, so the
    // kill bound sits 25% beyond it.
    done_ = true;
    reason_ = TerminationReason::out_of_bounds;
  } else if (tick_ >= config_.max_ticks()) {
    done_ = true;
    reason_ = TerminationReason::timed_out;
  }
}

StepResult Episode::step(const SupervisoryAction& action) {
  if (!active_) throw std::logic_error("env_step: episode was never started");
  if (done_) throw std::logic_error("env_step: episode already finished");

  Eigen::Vector3d offset;
  for (int i = 0; i < 3; ++i) offset(i) = clip1(action[i]);
  const Eigen::Vector3d ref =
      waypoint_ + config_.scaling_factor * config_.bounding_box * offset;

  const Eigen::Vector3d block_pos = state_.position;
  const double block_psi = state_.attitude.z();

  int n = 0;
  while (n < config_.steps_between_actions && !done_) {
    const Wrench w =
        cascade_step(gains_, cascade_, ref, state_, vehicle_, config_.dt, tick_);
    const auto speeds = allocator_.allocate(w);
    state_ = dynamics_step(state_, speeds, wind_, vehicle_, config_.dt);
    ++tick_;
    ++n;
    check_termination();
    if (log_ != nullptr) {
      TickRow row;
      row.t = log_t0_ + tick_ * config_.dt;
      row.state = state_;
      row.reference = ref;
      row.reward_flag = (done_ || n == config_.steps_between_actions) ? 1 : 0;
      row.segment = log_segment_;
      log_->push_back(row);
    }
  }

  StepResult result;
  result.reward = reward(block_pos, state_.position, block_psi, state_.attitude.z(),
                         waypoint_, start_position_, n * config_.dt);
  if (done_) {
    result.reward += terminal_reward(reason_, state_.position, waypoint_,
                                     config_.bounding_box);
  }
  result.done = done_;
  result.reason = done_ ? reason_ : TerminationReason::running;
  result.observation = observe();
  total_reward_ += result.reward;
  return result;
}

}  // namespace uavrl
