#include <doctest.h>

#include "uavrl/config.hpp"

using namespace uavrl;

TEST_SUITE("config") {

TEST_CASE("ini: parse, comments, sections, values") {
  const std::string text =
      "# gains\n[position]\nk_p = 46.091\nk_i = 3.334\n\n[rate]\nmax_acc = 5.376 # clip\n";
  const IniDoc d = parse_ini(text);
  CHECK(d.get_double("position", "k_p") == doctest::Approx(46.091));
  CHECK(d.get_double("rate", "max_acc") == doctest::Approx(5.376));
  CHECK_FALSE(d.has("position", "k_d"));
  CHECK_THROWS_WITH_AS(d.get("velocity", "k_p"),
                       "config: missing section [velocity]", std::runtime_error);
}

TEST_CASE("ini: parse errors carry line numbers") {
  try {
    parse_ini("[position]\nk_p 46\n");
    FAIL("expected parse error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  try {
    parse_ini("k_p = 1\n");
    FAIL("expected parse error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_ini("[oops\n"), std::runtime_error);
}

TEST_CASE("ini: write/parse round trip is stable") {
  IniDoc d;
  d.set_double("position", "k_p", 46.091);
  d.set("cascade", "leash_enabled", "true");
  d.set_int("episode", "steps_between_actions", 31);
  const std::string text = write_ini(d);
  const IniDoc back = parse_ini(text);
  CHECK(write_ini(back) == text);
}

TEST_CASE("gains: round trip preserves the table-label keys") {
  CascadeGains g = baseline_gains();
  g.position.k_p = 46.091;
  g.rate_max_acc = 5.376;
  const IniDoc d = to_ini(g);
  CHECK(d.has("position", "k_p"));
  CHECK(d.has("velocity", "k_i"));
  CHECK(d.has("attitude", "k_d"));
  CHECK(d.has("rate", "max_acc"));
  const CascadeGains back = gains_from_ini(d);
  CHECK(back.position.k_p == g.position.k_p);
  CHECK(back.rate_max_acc == g.rate_max_acc);
  CHECK(back.leash_enabled == g.leash_enabled);
}

TEST_CASE("vehicle/episode/rl: round trips") {
  const VehicleParams vp = calibrated_octorotor();
  const VehicleParams vp2 = vehicle_from_ini(to_ini(vp));
  CHECK(vp2.mass == vp.mass);
  CHECK(vp2.thrust_coeff == vp.thrust_coeff);
  CHECK(vp2.rotor_angles == vp.rotor_angles);
  CHECK(vp2.spin_directions == vp.spin_directions);

  EpisodeConfig c;
  c.scaling_factor = 0.12;
  c.steps_between_actions = 31;
  const EpisodeConfig c2 = episode_from_ini(to_ini(c));
  CHECK(c2.scaling_factor == c.scaling_factor);
  CHECK(c2.steps_between_actions == 31);
  CHECK(c2.tip_threshold == doctest::Approx(c.tip_threshold));

  RlHyperparams hp;
  hp.learning_rate = 0.003;
  hp.batch_size = 128;
  hp.steps = 826;
  const RlHyperparams hp2 = rl_from_ini(to_ini(hp));
  CHECK(hp2.learning_rate == hp.learning_rate);
  CHECK(hp2.batch_size == 128);
  CHECK(hp2.steps == 826);
}

TEST_CASE("search space file format") {
  IniDoc d;
  d.set("search_space", "position.k_p", "log_uniform 4.6 460.9");
  d.set("search_space", "episode.steps_u", "integer 1 50");
  const SearchSpace s = space_from_ini(d);
  CHECK(s.params.at("position.k_p").kind == RangeKind::log_uniform);
  CHECK(s.params.at("episode.steps_u").kind == RangeKind::integer);
  CHECK(s.params.at("episode.steps_u").hi == 50.0);
  const SearchSpace back = space_from_ini(to_ini(s));
  CHECK(back.params.at("position.k_p").lo == s.params.at("position.k_p").lo);

  IniDoc bad;
  bad.set("search_space", "position.k_p", "log_uniform 4.6");
  CHECK_THROWS_AS(space_from_ini(bad), std::runtime_error);
  IniDoc bad2;
  bad2.set("search_space", "position.k_p", "triangular 1 2");
  CHECK_THROWS_AS(space_from_ini(bad2), std::runtime_error);
}

TEST_CASE("wind spec grammar") {
  const WindField w = parse_wind_spec("5@90");
  CHECK(w.magnitude() == doctest::Approx(5.0));
  CHECK(w.heading_deg() == doctest::Approx(90.0));
  CHECK(parse_wind_spec("0").magnitude() == 0.0);
  CHECK(parse_wind_spec("3.5").magnitude() == doctest::Approx(3.5));
  CHECK_THROWS_AS(parse_wind_spec("5@"), std::runtime_error);
  CHECK_THROWS_AS(parse_wind_spec("@90"), std::runtime_error);
  CHECK_THROWS_AS(parse_wind_spec("-2@0"), std::runtime_error);
  CHECK_THROWS_AS(parse_wind_spec("5@400"), std::runtime_error);
  CHECK_THROWS_AS(parse_wind_spec("breeze"), std::runtime_error);
}

}  // TEST_SUITE
