#include "uavrl/trajectory.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "uavrl/rng.hpp"

namespace uavrl {

Trajectory decompose(const std::vector<Eigen::Vector3d>& path, double bounding_box) {
  if (path.empty()) throw std::invalid_argument("decompose: empty path");
  if (!(bounding_box > 0.0)) throw std::invalid_argument("decompose: bounding_box must be > 0");
  Trajectory t;
  t.waypoints.push_back(path.front());
  for (std::size_t i = 1; i < path.size(); ++i) {
    const Eigen::Vector3d a = t.waypoints.back();
    const Eigen::Vector3d b = path[i];
    const double dist = (b - a).norm();
    if (dist <= 1e-12) {
      std::fprintf(stderr, "decompose: dropping zero-length leg at vertex %zu\n", i);
      continue;
    }
    const int n = static_cast<int>(std::ceil(dist / bounding_box));
    for (int k = 1; k <= n; ++k)
      t.waypoints.push_back(a + (static_cast<double>(k) / n) * (b - a));
  }
  return t;
}

Trajectory load_trajectory_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("trajectory: cannot open " + path);
  std::vector<Eigen::Vector3d> pts;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    // trim
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);
    double x, y, z;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &x, &y, &z) != 3)
      throw std::runtime_error("trajectory: parse error at " + path + ":" +
                               std::to_string(lineno));
    pts.emplace_back(x, y, z);
  }
  if (pts.empty()) throw std::runtime_error("trajectory: no waypoints in " + path);
  Trajectory t;
  t.name = path;
  const auto slash = t.name.find_last_of('/');
  if (slash != std::string::npos) t.name = t.name.substr(slash + 1);
  const auto dot = t.name.find_last_of('.');
  if (dot != std::string::npos) t.name = t.name.substr(0, dot);
  t.waypoints = std::move(pts);
  return t;
}

FlightResult fly(const Trajectory& trajectory, ControlMode mode,
                 const CascadeGains& gains, const PolicyParameters* policy,
                 const WindField& wind, const EpisodeConfig& config,
                 const VehicleParams& vehicle, std::uint64_t seed,
                 const FlightOptions& options) {
  if (mode == ControlMode::rl_supervised && policy == nullptr)
    throw std::invalid_argument("fly: rl_supervised mode requires a policy");
  if (trajectory.waypoints.size() < 2)
    throw std::invalid_argument("fly: trajectory needs at least two waypoints");

  FlightResult result;
  KinematicState state;
  state.position = trajectory.waypoints.front();
  if (options.randomize_start) {
    Rng rng(derive_seed(seed, 0xF17));
    for (int i = 0; i < 3; ++i)
      state.position(i) += rng.uniform(-config.bounding_box / 8.0,
                                       config.bounding_box / 8.0);
    Eigen::Vector3d v;
    do {
      for (int i = 0; i < 3; ++i) v(i) = rng.uniform(-1.0, 1.0);
    } while (v.squaredNorm() > 1.0);
    state.velocity = 0.5 * config.max_velocity * v;
  }
  CascadeState cascade;

  const WindField calm{};
  double t0 = 0.0;
  for (std::size_t k = 1; k < trajectory.waypoints.size(); ++k) {
    const int segment = static_cast<int>(k) - 1;
    const WindField& seg_wind = (segment >= options.wind_onset_segment) ? wind : calm;
    Episode episode(vehicle, gains, config, seg_wind);
    episode.set_log(&result.log, t0, segment);
    Observation obs = episode.start_segment(state, cascade, trajectory.waypoints[k]);

    SegmentOutcome outcome;
    outcome.waypoint = trajectory.waypoints[k];
    outcome.start_position = state.position;
    while (!episode.done()) {
      SupervisoryAction action{0.0, 0.0, 0.0};
      if (mode == ControlMode::rl_supervised)
        action = policy_action(*policy, obs);
      const StepResult sr = episode.step(action);
      obs = sr.observation;
      outcome.reward += sr.reward;
    }
    outcome.reason = episode.reason();
    outcome.flight_time = episode.time();
    result.segments.push_back(outcome);

    state = episode.state();
    cascade = episode.cascade_state();
    t0 += episode.time();

    if (outcome.reason == TerminationReason::tipped ||
        outcome.reason == TerminationReason::out_of_bounds)
      break;
  }
  result.final_state = state;
  return result;
}

FlightScore score(const FlightResult& result) {
  if (result.segments.empty()) throw std::invalid_argument("score: no segments");
  FlightScore s;
  int reached = 0;
  for (const SegmentOutcome& seg : result.segments) {
    s.total_reward += seg.reward;
    if (seg.reason == TerminationReason::reached) ++reached;
  }
  s.completion = static_cast<double>(reached) / result.segments.size();

  // Per-tick distance to the chord (start position -> waypoint) of the
  // active segment.
  double sum = 0.0;
  long count = 0;
  for (const TickRow& row : result.log) {
    const SegmentOutcome& seg = result.segments[row.segment];
    const Eigen::Vector3d a = seg.start_position;
    const Eigen::Vector3d b = seg.waypoint;
    const Eigen::Vector3d ab = b - a;
    const double len2 = ab.squaredNorm();
    double u = len2 > 0.0 ? (row.state.position - a).dot(ab) / len2 : 0.0;
    u = std::clamp(u, 0.0, 1.0);
    const double d = (row.state.position - (a + u * ab)).norm();
    sum += d;
    if (d > s.max_deviation) s.max_deviation = d;
    ++count;
  }
  if (count > 0) s.mean_deviation = sum / count;
  return s;
}

}  // namespace uavrl
