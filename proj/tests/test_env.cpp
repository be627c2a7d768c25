#include <doctest.h>

#include <cmath>

#include "uavrl/config.hpp"
#include "uavrl/env.hpp"
#include "uavrl/rng.hpp"

using namespace uavrl;

namespace {
EpisodeConfig test_config() {
  EpisodeConfig c;
  c.scaling_factor = 0.25;
  c.steps_between_actions = 10;
  return c;
}
}  // namespace

TEST_SUITE("env") {

TEST_CASE("reward: frozen oracle values") {
  const Eigen::Vector3d wp(10.0, 0.0, 0.0), r0(0.0, 0.0, 0.0);
  // No motion, no yaw change: only the time penalty.
  CHECK(reward(r0, r0, 0.0, 0.0, wp, r0, 0.1) == doctest::Approx(-0.1).epsilon(1e-12));
  // Motion along the chord: -0.1 + 1 - 0.
  CHECK(reward(r0, Eigen::Vector3d(1, 0, 0), 0.0, 0.0, wp, r0, 0.1) ==
        doctest::Approx(0.9).epsilon(1e-12));
  // Perpendicular motion: advance and cross terms cancel.
  CHECK(reward(r0, Eigen::Vector3d(0, 1, 0), 0.0, 0.0, wp, r0, 0.1) ==
        doctest::Approx(-0.1).epsilon(1e-12));
  // Yaw magnitude increase is penalized, decrease rewarded.
  CHECK(reward(r0, r0, 0.0, 0.3, wp, r0, 0.1) == doctest::Approx(-0.4).epsilon(1e-12));
  CHECK(reward(r0, r0, -0.3, 0.0, wp, r0, 0.1) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK_THROWS_AS(reward(r0, r0, 0.0, 0.0, r0, r0, 0.1), std::invalid_argument);
}

TEST_CASE("reward: random inputs against a direct transcription") {
  Rng rng(31);
  for (int i = 0; i < 2000; ++i) {
    Eigen::Vector3d a, b, wp, r0;
    for (int k = 0; k < 3; ++k) {
      a(k) = rng.uniform(-10, 10);
      b(k) = rng.uniform(-10, 10);
      wp(k) = rng.uniform(-10, 10);
      r0(k) = rng.uniform(-10, 10);
    }
    if ((wp - r0).norm() < 1e-6) continue;
    const double p0 = rng.uniform(-3, 3), p1 = rng.uniform(-3, 3);
    const double dt = rng.uniform(0.01, 1.0);
    const Eigen::Vector3d dhat = (wp - r0).normalized();
    const double expect = -dt - (std::abs(p1) - std::abs(p0)) + (b - a).norm() -
                          (b - a).cross(dhat).norm();
    CHECK(reward(a, b, p0, p1, wp, r0, dt) == doctest::Approx(expect).epsilon(1e-9));
  }
}

TEST_CASE("terminal reward: exact values") {
  const Eigen::Vector3d wp(0, 0, 0);
  CHECK(terminal_reward(TerminationReason::reached, wp, wp, 20.0) == 400.0);
  CHECK(terminal_reward(TerminationReason::tipped, wp, wp, 20.0) == -400.0);
  CHECK(terminal_reward(TerminationReason::out_of_bounds, wp, wp, 20.0) == -400.0);
  CHECK(terminal_reward(TerminationReason::timed_out, Eigen::Vector3d(3, 0, 0), wp,
                        20.0) == -30.0);
  CHECK_THROWS_AS(terminal_reward(TerminationReason::running, wp, wp, 20.0),
                  std::logic_error);
}

TEST_CASE("normalize: bounds and zero state") {
  const EpisodeConfig c = test_config();
  KinematicState s;
  s.position = Eigen::Vector3d(20.0, -20.0, 0.0);
  Observation o = normalize(s, Eigen::Vector3d::Zero(), c);
  CHECK(o[0] == 1.0);
  CHECK(o[1] == -1.0);
  CHECK(o[2] == 0.0);
  s.position = Eigen::Vector3d(50.0, 0, 0);  // clips
  o = normalize(s, Eigen::Vector3d::Zero(), c);
  CHECK(o[0] == 1.0);
  const Observation zero = normalize(KinematicState{}, Eigen::Vector3d::Zero(), c);
  for (double v : zero) CHECK(v == 0.0);
}

TEST_CASE("normalize/denormalize: identity for in-range states") {
  const EpisodeConfig c = test_config();
  Rng rng(37);
  const Eigen::Vector3d wp(1.0, 2.0, -1.0);
  for (int i = 0; i < 10000; ++i) {
    KinematicState s;
    for (int k = 0; k < 3; ++k) {
      s.position(k) = wp(k) + rng.uniform(-c.bounding_box, c.bounding_box);
      s.velocity(k) = rng.uniform(-c.max_velocity, c.max_velocity);
      s.attitude(k) = rng.uniform(-M_PI, M_PI);
      s.angular_rate(k) = rng.uniform(-c.omega_bound, c.omega_bound);
    }
    const KinematicState back = denormalize(normalize(s, wp, c), wp, c);
    CHECK((back.position - s.position).cwiseAbs().maxCoeff() < 1e-12 * c.bounding_box);
    CHECK((back.velocity - s.velocity).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((back.attitude - s.attitude).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((back.angular_rate - s.angular_rate).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("reset: deterministic, in-box, capped speed, normalized obs") {
  const VehicleParams vp = calibrated_octorotor();
  const CascadeGains g = baseline_gains();
  const EpisodeConfig c = test_config();
  Episode ep(vp, g, c, WindField{});
  const Observation a = ep.reset(1234);
  Episode ep2(vp, g, c, WindField{});
  const Observation b = ep2.reset(1234);
  CHECK(a == b);

  for (int i = 0; i < 10000; ++i) {
    const Observation o = ep.reset(derive_seed(99, i));
    const KinematicState& s = ep.state();
    CHECK(s.position.cwiseAbs().maxCoeff() <= 0.5 * c.bounding_box);
    CHECK(s.velocity.norm() <= c.max_velocity + 1e-12);
    CHECK(s.attitude.norm() == 0.0);
    CHECK(s.angular_rate.norm() == 0.0);
    for (double v : o) {
      CHECK(v <= 1.0);
      CHECK(v >= -1.0);
    }
  }
}

TEST_CASE("episode: fixed point near the waypoint terminates reached") {
  const VehicleParams vp = calibrated_octorotor();
  const CascadeGains g = baseline_gains();
  const EpisodeConfig c = test_config();
  Episode ep(vp, g, c, WindField{});
  KinematicState s;
  s.position = Eigen::Vector3d(0.3, 0.0, 0.0);
  ep.start_segment(s, CascadeState{}, Eigen::Vector3d::Zero());
  const StepResult r = ep.step({0.0, 0.0, 0.0});
  CHECK(r.done);
  CHECK(r.reason == TerminationReason::reached);
  CHECK((ep.state().position).norm() <= c.arrival_radius);
  CHECK(r.reward > c.bounding_box * 20.0 - 1.0);  // bonus dominates
}

TEST_CASE("episode: excessive roll terminates tipped with the penalty") {
  const VehicleParams vp = calibrated_octorotor();
  const CascadeGains g = baseline_gains();
  const EpisodeConfig c = test_config();
  Episode ep(vp, g, c, WindField{});
  KinematicState s;
  s.position = Eigen::Vector3d(5.0, 0.0, 0.0);
  s.attitude.x() = 35.0 * M_PI / 180.0;
  ep.start_segment(s, CascadeState{}, Eigen::Vector3d::Zero());
  StepResult r;
  while (!ep.done()) r = ep.step({0.0, 0.0, 0.0});
  CHECK(r.reason == TerminationReason::tipped);
  CHECK(r.reward < -c.bounding_box * 20.0 + 50.0);
}

TEST_CASE("episode: stepping a finished episode is a contract violation") {
  const VehicleParams vp = calibrated_octorotor();
  const CascadeGains g = baseline_gains();
  Episode ep(vp, g, test_config(), WindField{});
  KinematicState s;
  s.position = Eigen::Vector3d(0.3, 0.0, 0.0);
  ep.start_segment(s, CascadeState{}, Eigen::Vector3d::Zero());
  ep.step({0.0, 0.0, 0.0});
  CHECK(ep.done());
  CHECK_THROWS_AS(ep.step({0.0, 0.0, 0.0}), std::logic_error);
}

TEST_CASE("episode: rewards replay exactly from recorded motion") {
  const VehicleParams vp = calibrated_octorotor();
  const CascadeGains g = baseline_gains();
  const EpisodeConfig c = test_config();
  Episode ep(vp, g, c, WindField::from_heading(3.0, 45.0));
  Rng rng(41);
  ep.reset(777);
  const Eigen::Vector3d r0 = ep.start_position();
  const Eigen::Vector3d wp = ep.waypoint();
  while (!ep.done()) {
    const Eigen::Vector3d prev_pos = ep.state().position;
    const double prev_psi = ep.state().attitude.z();
    const long prev_tick = ep.ticks();
    SupervisoryAction a{};
    for (double& v : a) v = rng.uniform(-1.0, 1.0);
    const StepResult sr = ep.step(a);
    const double elapsed = (ep.ticks() - prev_tick) * c.dt;
    double expect = reward(prev_pos, ep.state().position, prev_psi,
                           ep.state().attitude.z(), wp, r0, elapsed);
    if (sr.done)
      expect += terminal_reward(sr.reason, ep.state().position, wp, c.bounding_box);
    CHECK(sr.reward == expect);
  }
}

TEST_CASE("episode: decision spacing, length cap, reference cube") {
  const VehicleParams vp = calibrated_octorotor();
  const CascadeGains g = baseline_gains();
  EpisodeConfig c = test_config();
  c.steps_between_actions = 7;
  Episode ep(vp, g, c, WindField{});
  std::vector<TickRow> log;
  ep.set_log(&log);
  ep.reset(4242);
  Rng rng(43);
  long last = 0;
  while (!ep.done()) {
    SupervisoryAction a{};
    for (double& v : a) v = rng.uniform(-1.0, 1.0);
    ep.step(a);
    if (!ep.done()) CHECK(ep.ticks() - last == 7);
    last = ep.ticks();
  }
  CHECK(ep.ticks() <= c.max_ticks());
  const double cube = c.scaling_factor * c.bounding_box;
  for (const TickRow& row : log)
    CHECK((row.reference - ep.waypoint()).cwiseAbs().maxCoeff() <= cube + 1e-12);
}

TEST_CASE("episode: seed and action determinism, bit-identical results") {
  const VehicleParams vp = calibrated_octorotor();
  const CascadeGains g = baseline_gains();
  const EpisodeConfig c = test_config();
  auto run = [&]() {
    Episode ep(vp, g, c, WindField::from_heading(2.0, 10.0));
    std::vector<StepResult> out;
    ep.reset(31337);
    Rng rng(47);
    while (!ep.done()) {
      SupervisoryAction a{};
      for (double& v : a) v = rng.uniform(-1.0, 1.0);
      out.push_back(ep.step(a));
    }
    return out;
  };
  const auto a = run();
  const auto b = run();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].reward == b[i].reward);
    CHECK(a[i].observation == b[i].observation);
    CHECK(a[i].done == b[i].done);
  }
}

TEST_CASE("episode: zero supervisor reaches the origin in calm air") {
  const VehicleParams vp = calibrated_octorotor();
  const CascadeGains g = baseline_gains();
  const EpisodeConfig c = test_config();
  int reached = 0;
  for (int k = 0; k < 20; ++k) {
    Episode ep(vp, g, c, WindField{});
    ep.reset(derive_seed(5, k));
    while (!ep.done()) ep.step({0.0, 0.0, 0.0});
    if (ep.reason() == TerminationReason::reached) ++reached;
  }
  CHECK(reached >= 19);
}

TEST_CASE("tick log row format") {
  CHECK(tick_log_header(false) ==
        "t,x,y,z,vx,vy,vz,phi,theta,psi,wx,wy,wz,ref_x,ref_y,ref_z,reward_flag");
  TickRow r;
  r.t = 0.01;
  r.state.position = Eigen::Vector3d(1.5, -2.0, 0.25);
  r.reward_flag = 1;
  r.segment = 3;
  const std::string flat = tick_log_row(r, false);
  CHECK(flat.substr(0, 5) == "0.01,");
  CHECK(tick_log_row(r, true) == flat + ",3");
}

}  // TEST_SUITE
