#include <doctest.h>

#include <cmath>
#include <vector>

#include "uavrl/controller.hpp"
#include "uavrl/rng.hpp"

using namespace uavrl;

TEST_SUITE("controller") {

TEST_CASE("sqrt_scale: frozen oracle values") {
  CHECK(sqrt_scale(0.0, 3.0, 2.0, 0.1) == 0.0);
  // Inside the linear region (L = 4/4 = 1).
  CHECK(sqrt_scale(0.5, 2.0, 4.0, 0.1) == doctest::Approx(1.0).epsilon(1e-12));
  // Outside: sqrt(2*4*(10 - 0.5)) = sqrt(76).
  CHECK(sqrt_scale(10.0, 2.0, 4.0, 0.1) ==
        doctest::Approx(8.717797887081348).epsilon(1e-12));
  // Pure sqrt law when k_p = 0: sqrt(2*4*2) = 4 (dt small enough that the
  // |e|/dt clip stays inactive).
  CHECK(sqrt_scale(2.0, 0.0, 4.0, 0.1) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(sqrt_scale(-2.0, 0.0, 4.0, 0.1) == doctest::Approx(-4.0).epsilon(1e-12));
}

TEST_CASE("sqrt_scale: outer clip limits the correction to |e|/dt") {
  // Unclipped value would be sqrt(76) ~ 8.72; |e|/dt = 10/10 = 1.
  CHECK(sqrt_scale(10.0, 2.0, 4.0, 10.0) == doctest::Approx(1.0));
  CHECK(sqrt_scale(-10.0, 2.0, 4.0, 10.0) == doctest::Approx(-1.0));
}

TEST_CASE("sqrt_scale: odd symmetry") {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const double e = rng.uniform(-50.0, 50.0);
    const double kp = rng.uniform(0.0, 10.0);
    const double acc = rng.uniform(0.1, 10.0);
    const double dt = rng.uniform(0.01, 1.0);
    CHECK(sqrt_scale(-e, kp, acc, dt) == -sqrt_scale(e, kp, acc, dt));
  }
}

TEST_CASE("sqrt_scale: continuous at the linear/sqrt boundary") {
  const double kp = 2.0, acc = 4.0, dt = 0.001;
  const double L = acc / (kp * kp);
  const double inside = sqrt_scale(L, kp, acc, dt);
  const double outside = sqrt_scale(L * (1.0 + 1e-12), kp, acc, dt);
  CHECK(std::abs(inside - outside) < 1e-9);
}

TEST_CASE("sqrt_scale: invalid configuration") {
  CHECK_THROWS_AS(sqrt_scale(1.0, 2.0, 0.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(sqrt_scale(1.0, 2.0, -1.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(sqrt_scale(1.0, 2.0, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(sqrt_scale(1.0, -2.0, 1.0, 0.1), std::invalid_argument);
}

TEST_CASE("leash: frozen oracle values") {
  CHECK(leash(2.0, 4.0, 0.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(leash(2.0, 4.0, 3.0) == doctest::Approx(1.625).epsilon(1e-12));
}

TEST_CASE("leash: monotone nondecreasing in speed") {
  Rng rng(13);
  for (int i = 0; i < 1000; ++i) {
    const double kp = rng.uniform(0.1, 10.0);
    const double acc = rng.uniform(0.1, 10.0);
    const double s1 = rng.uniform(0.0, 5.0);
    const double s2 = s1 + rng.uniform(0.0, 5.0);
    CHECK(leash(kp, acc, s2) >= leash(kp, acc, s1));
  }
  CHECK_THROWS_AS(leash(0.0, 4.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(leash(2.0, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("pid_step: zero error stays zero") {
  PidGains g{1.0, 1.0, 1.0, 10.0, 10.0};
  PidState s;
  for (int i = 0; i < 100; ++i) CHECK(pid_step(g, s, 0.0, 0.1) == 0.0);
}

TEST_CASE("pid_step: pure proportional") {
  PidGains g{1.0, 0.0, 0.0, 10.0, 10.0};
  PidState s;
  CHECK(pid_step(g, s, 2.0, 0.1) == doctest::Approx(2.0));
}

TEST_CASE("pid_step: integral accumulation") {
  PidGains g{0.0, 1.0, 0.0, 10.0, 10.0};
  PidState s;
  CHECK(pid_step(g, s, 2.0, 0.1) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(pid_step(g, s, 2.0, 0.1) == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("pid_step: derivative is zero on the first step") {
  PidGains g{0.0, 0.0, 5.0, 10.0, 100.0};
  PidState s;
  CHECK(pid_step(g, s, 3.0, 0.1) == 0.0);
  CHECK(pid_step(g, s, 4.0, 0.1) == doctest::Approx(5.0 * (4.0 - 3.0) / 0.1));
}

TEST_CASE("pid_step: integral and output clamps hold for any input") {
  PidGains g{2.0, 3.0, 0.5, 0.4, 1.5};
  PidState s;
  Rng rng(17);
  for (int i = 0; i < 2000; ++i) {
    const double out = pid_step(g, s, rng.uniform(-20.0, 20.0), 0.01);
    CHECK(std::abs(s.integral) <= g.integral_limit);
    CHECK(std::abs(out) <= g.output_limit);
  }
}

TEST_CASE("pid_step: reset then replay reproduces outputs") {
  PidGains g{1.2, 0.7, 0.3, 0.5, 2.0};
  Rng rng(19);
  std::vector<double> errors(500);
  for (double& e : errors) e = rng.uniform(-3.0, 3.0);
  std::vector<double> first;
  PidState s;
  for (double e : errors) first.push_back(pid_step(g, s, e, 0.01, true, 2.5));
  s = PidState{};
  for (std::size_t i = 0; i < errors.size(); ++i)
    CHECK(pid_step(g, s, errors[i], 0.01, true, 2.5) == first[i]);
}

TEST_CASE("cascade: zero error yields the hover wrench") {
  const VehicleParams vp = calibrated_octorotor();
  const CascadeGains g = baseline_gains();
  CascadeState cs;
  KinematicState m;
  const Wrench w = cascade_step(g, cs, Eigen::Vector3d::Zero(), m, vp, 0.01, 0);
  CHECK(w.thrust_z == doctest::Approx(vp.hover_thrust()).epsilon(1e-12));
  CHECK(w.torque.norm() == 0.0);
}

TEST_CASE("cascade: 20 m reference respects the velocity and tilt envelopes") {
  const VehicleParams vp = calibrated_octorotor();
  const CascadeGains g = baseline_gains();
  CascadeState cs;
  KinematicState m;  // level, at rest
  cascade_step(g, cs, Eigen::Vector3d(20.0, 0.0, 0.0), m, vp, 0.01, 0);
  CHECK(cs.velocity_ref.norm() <= g.max_velocity + 1e-12);
  CHECK(cs.velocity_ref.x() > 0.0);
  // Forward (+x) demand pitches the vehicle nose-over: positive pitch here.
  CHECK(cs.attitude_ref.y() > 0.0);
  CHECK(std::abs(cs.attitude_ref.y()) <= g.max_tilt + 1e-12);
  CHECK(std::abs(cs.attitude_ref.x()) <= g.max_tilt + 1e-12);
}

TEST_CASE("cascade: slow-loop outputs change only every 10th tick") {
  const VehicleParams vp = calibrated_octorotor();
  const CascadeGains g = baseline_gains();
  CascadeState cs;
  Rng rng(23);
  KinematicState m;
  Eigen::Vector2d last_vref = Eigen::Vector2d::Zero();
  for (long tick = 0; tick < 40; ++tick) {
    // Wiggle the measurement every tick; the held outputs must not move.
    m.position = Eigen::Vector3d(rng.uniform(-1, 1), rng.uniform(-1, 1), 0.0);
    m.velocity = Eigen::Vector3d(rng.uniform(-1, 1), rng.uniform(-1, 1), 0.0);
    cascade_step(g, cs, Eigen::Vector3d(5.0, 0.0, 0.0), m, vp, 0.01, tick);
    if (tick % 10 == 0) {
      last_vref = cs.velocity_ref;
    } else {
      CHECK(cs.velocity_ref == last_vref);
    }
  }
}

TEST_CASE("cascade: reset contract, replay is identical") {
  const VehicleParams vp = calibrated_octorotor();
  const CascadeGains g = baseline_gains();
  Rng rng(29);
  std::vector<KinematicState> states(200);
  for (auto& s : states) {
    for (int i = 0; i < 3; ++i) {
      s.position(i) = rng.uniform(-5, 5);
      s.velocity(i) = rng.uniform(-2, 2);
      s.attitude(i) = rng.uniform(-0.2, 0.2);
      s.angular_rate(i) = rng.uniform(-0.5, 0.5);
    }
  }
  const Eigen::Vector3d ref(3.0, -2.0, 1.0);
  std::vector<Wrench> first;
  CascadeState cs;
  for (long t = 0; t < 200; ++t)
    first.push_back(cascade_step(g, cs, ref, states[t], vp, 0.01, t));
  cs = CascadeState{};
  for (long t = 0; t < 200; ++t) {
    const Wrench w = cascade_step(g, cs, ref, states[t], vp, 0.01, t);
    CHECK(w.thrust_z == first[t].thrust_z);
    CHECK(w.torque == first[t].torque);
  }
}

TEST_CASE("closed loop: baseline gains reach a 20 m waypoint in calm air") {
  const VehicleParams vp = calibrated_octorotor();
  const CascadeGains g = baseline_gains();
  const Allocator alloc(vp);
  CascadeState cs;
  KinematicState s;
  const Eigen::Vector3d target(20.0, 0.0, 0.0);
  double arrive_time = -1.0;
  for (long tick = 0; tick < 2000; ++tick) {
    const Wrench w = cascade_step(g, cs, target, s, vp, 0.01, tick);
    s = dynamics_step(s, alloc.allocate(w), WindField{}, vp, 0.01);
    CHECK(std::abs(s.attitude.x()) < M_PI / 6.0);
    CHECK(std::abs(s.attitude.y()) < M_PI / 6.0);
    if ((s.position - target).norm() < 0.6) {
      arrive_time = (tick + 1) * 0.01;
      break;
    }
  }
  INFO("arrival time ", arrive_time);
  CHECK(arrive_time > 0.0);
  CHECK(arrive_time < 20.0);
}

}  // TEST_SUITE
