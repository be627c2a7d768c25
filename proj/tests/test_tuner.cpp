#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "uavrl/config.hpp"
#include "uavrl/rng.hpp"
#include "uavrl/tuner.hpp"

using namespace uavrl;

namespace {

SearchSpace tiny_space() {
  SearchSpace s;
  s.params["position.k_p"] = {RangeKind::log_uniform, 0.3, 3.0};
  s.params["velocity.k_i"] = {RangeKind::uniform, 0.2, 2.0};
  return s;
}

std::vector<TrialRecord> synthetic_records(int n, double (*score)(double kp, Rng&),
                                           std::uint64_t seed) {
  std::vector<TrialRecord> records;
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    TrialRecord r;
    r.id = i;
    r.params["k_p"] = rng.uniform(0.0, 60.0);
    r.params["noise_a"] = rng.uniform(0.0, 1.0);
    r.params["noise_b"] = rng.uniform(-5.0, 5.0);
    r.mean_reward = score(r.params["k_p"], rng);
    r.episode_rewards = {r.mean_reward};
    records.push_back(r);
  }
  return records;
}

std::string temp_path(const char* name) {
  return std::string("/tmp/uavrl_tuner_") + name + ".jsonl";
}

}  // namespace

TEST_SUITE("tuner") {

TEST_CASE("tune: one trial, mean over exactly ten fixed-seed episodes") {
  SearchSpace space;
  space.params["position.k_p"] = {RangeKind::uniform, 1.0, 1.0};  // single point
  TuneOptions opt;
  opt.parallel = false;
  const auto records =
      tune(space, ControlMode::pid_only, WindField{}, 1, 99, baseline_gains(),
           EpisodeConfig{}, RlHyperparams{}, calibrated_octorotor(), opt);
  REQUIRE(records.size() == 1);
  CHECK(records[0].episode_rewards.size() == 10);
  CHECK(records[0].params.at("position.k_p") == 1.0);
  double mean = 0.0;
  for (double r : records[0].episode_rewards) mean += r;
  mean /= 10.0;
  CHECK(records[0].mean_reward == doctest::Approx(mean).epsilon(1e-12));
}

TEST_CASE("tune: same master seed reproduces the identical trial sequence") {
  TuneOptions opt;
  const auto a = tune(tiny_space(), ControlMode::pid_only, WindField{}, 6, 1234,
                      baseline_gains(), EpisodeConfig{}, RlHyperparams{},
                      calibrated_octorotor(), opt);
  const auto b = tune(tiny_space(), ControlMode::pid_only, WindField{}, 6, 1234,
                      baseline_gains(), EpisodeConfig{}, RlHyperparams{},
                      calibrated_octorotor(), opt);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].params == b[i].params);
    CHECK(a[i].mean_reward == b[i].mean_reward);
  }
}

TEST_CASE("tune: trial log persists and resuming skips completed trials") {
  const std::string path = temp_path("resume");
  std::filesystem::remove(path);
  TuneOptions opt;
  opt.log_path = path;
  opt.parallel = false;
  const auto first = tune(tiny_space(), ControlMode::pid_only, WindField{}, 3, 777,
                          baseline_gains(), EpisodeConfig{}, RlHyperparams{},
                          calibrated_octorotor(), opt);
  const auto logged = read_trial_log(path);
  REQUIRE(logged.size() == 3);
  // Re-run with a larger budget: ids 0..2 come back from the log.
  const auto more = tune(tiny_space(), ControlMode::pid_only, WindField{}, 5, 777,
                         baseline_gains(), EpisodeConfig{}, RlHyperparams{},
                         calibrated_octorotor(), opt);
  REQUIRE(more.size() == 5);
  for (int i = 0; i < 3; ++i) {
    CHECK(more[i].mean_reward == first[i].mean_reward);
    CHECK(more[i].params == first[i].params);
  }
  CHECK(read_trial_log(path).size() == 5);
  // A different master seed must refuse the existing log.
  CHECK_THROWS_AS(tune(tiny_space(), ControlMode::pid_only, WindField{}, 5, 778,
                       baseline_gains(), EpisodeConfig{}, RlHyperparams{},
                       calibrated_octorotor(), opt),
                  std::runtime_error);
  std::filesystem::remove(path);
}

TEST_CASE("tune: record means recompute from episode rewards") {
  TuneOptions opt;
  const auto records = tune(tiny_space(), ControlMode::pid_only,
                            WindField::from_heading(3, 45), 4, 5150,
                            baseline_gains(), EpisodeConfig{}, RlHyperparams{},
                            calibrated_octorotor(), opt);
  for (const TrialRecord& r : records) {
    double mean = 0.0;
    for (double v : r.episode_rewards) mean += v;
    mean /= r.episode_rewards.size();
    CHECK(r.mean_reward == doctest::Approx(mean).epsilon(1e-12));
  }
}

TEST_CASE("apply_assignment: routes names and rejects unknowns") {
  CascadeGains g = baseline_gains();
  EpisodeConfig c;
  RlHyperparams hp;
  apply_assignment({{"position.k_p", 2.5},
                    {"rate.max_acc", 7.0},
                    {"rl.learning_rate", 1e-3},
                    {"episode.steps_u", 17.0}},
                   g, c, hp);
  CHECK(g.position.k_p == 2.5);
  CHECK(g.rate_max_acc == 7.0);
  CHECK(hp.learning_rate == 1e-3);
  CHECK(c.steps_between_actions == 17);
  CHECK_THROWS_AS(apply_assignment({{"bogus.k_p", 1.0}}, g, c, hp),
                  std::runtime_error);
}

TEST_CASE("importance: synthetic peak on k_p dominates") {
  const auto records = synthetic_records(
      200, [](double kp, Rng&) { return -std::abs(kp - 30.0); }, 2024);
  const auto imp = importance(records);
  INFO("k_p importance ", imp.at("k_p"));
  CHECK(imp.at("k_p") > 0.8);
  double total = 0.0;
  for (const auto& [k, v] : imp) {
    CHECK(v >= 0.0);
    total += v;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("importance: constant scores fall back to uniform") {
  const auto records =
      synthetic_records(40, [](double, Rng&) { return 3.25; }, 11);
  const auto imp = importance(records);
  for (const auto& [k, v] : imp) CHECK(v == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("importance: deterministic on duplicated input") {
  const auto records = synthetic_records(
      60, [](double kp, Rng& rng) { return -std::abs(kp - 30.0) + rng.uniform(0, 1); },
      33);
  const auto a = importance(records);
  const auto b = importance(records);
  CHECK(a == b);
}

TEST_CASE("importance: refuses fewer than 30 trials") {
  const auto records =
      synthetic_records(29, [](double kp, Rng&) { return kp; }, 44);
  CHECK_THROWS_AS(importance(records), std::runtime_error);
}

TEST_CASE("top_table: identical trials have zero std") {
  std::vector<TrialRecord> records;
  for (int i = 0; i < 12; ++i) {
    TrialRecord r;
    r.id = i;
    r.params["position.k_p"] = 46.091;
    r.mean_reward = 5.0;
    records.push_back(r);
  }
  const auto table = top_table(records, 10);
  CHECK(table.at("position.k_p").mean == doctest::Approx(46.091));
  CHECK(table.at("position.k_p").std_pct == 0.0);
}

TEST_CASE("top_table: change column matches the reference arithmetic") {
  // Means 46.091 -> 21.704 give a -52.911% change.
  auto mk = [](double center, double reward_base) {
    std::vector<TrialRecord> records;
    for (int i = 0; i < 10; ++i) {
      TrialRecord r;
      r.id = i;
      r.params["position.k_p"] = center;
      r.mean_reward = reward_base - i;
      records.push_back(r);
    }
    return records;
  };
  const auto cmp = compare_top(mk(46.091, 100.0), mk(21.704, 50.0), 10);
  CHECK(cmp.at("position.k_p").change_pct == doctest::Approx(-52.911).epsilon(1e-4));
  // Zero stds on both sides: any nonzero change is notable.
  CHECK(cmp.at("position.k_p").notable);
}

TEST_CASE("top_table: notable flag needs the change to beat both stds") {
  Rng rng(7);
  auto mk = [&](double center, double spread) {
    std::vector<TrialRecord> records;
    for (int i = 0; i < 10; ++i) {
      TrialRecord r;
      r.id = i;
      r.params["x"] = center + spread * (i - 4.5) / 4.5;
      r.mean_reward = 10.0 - i;
      records.push_back(r);
    }
    return records;
  };
  // Change ~ +10% with stds ~ 1.5% -> notable.
  auto c1 = compare_top(mk(10.0, 0.2), mk(11.0, 0.2), 10);
  CHECK(c1.at("x").notable);
  // Change ~ +10% with wind-side std ~ 40% -> not notable.
  auto c2 = compare_top(mk(10.0, 0.2), mk(11.0, 6.0), 10);
  CHECK_FALSE(c2.at("x").notable);
}

TEST_CASE("search space validation") {
  SearchSpace bad;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  bad.params["a"] = {RangeKind::log_uniform, 0.0, 1.0};
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
}

}  // TEST_SUITE
