#include "uavrl/tuner.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "uavrl/rng.hpp"

namespace uavrl {

using nlohmann::json;

void validate(const SearchSpace& space) {
  if (space.params.empty()) throw std::invalid_argument("search space is empty");
  for (const auto& [name, r] : space.params) {
    if (!(r.lo <= r.hi))
      throw std::invalid_argument("search range for '" + name + "' is empty");
    if (r.kind == RangeKind::log_uniform && !(r.lo > 0.0))
      throw std::invalid_argument("log-uniform range for '" + name +
                                  "' must be strictly positive");
  }
}

namespace {

double sample_range(const ParamRange& r, Rng& rng) {
  switch (r.kind) {
    case RangeKind::uniform:
      return rng.uniform(r.lo, r.hi);
    case RangeKind::log_uniform:
      return std::exp(rng.uniform(std::log(r.lo), std::log(r.hi)));
    case RangeKind::integer:
      return static_cast<double>(
          rng.uniform_int(static_cast<long>(r.lo), static_cast<long>(r.hi)));
  }
  return r.lo;
}

double run_episode_pid(const VehicleParams& vp, const CascadeGains& g,
                       const EpisodeConfig& c, const WindField& w,
                       std::uint64_t seed) {
  Episode ep(vp, g, c, w);
  ep.reset(seed);
  while (!ep.done()) ep.step({0.0, 0.0, 0.0});
  return ep.total_reward();
}

double run_episode_policy(const PolicyParameters& policy, const VehicleParams& vp,
                          const CascadeGains& g, const EpisodeConfig& c,
                          const WindField& w, std::uint64_t seed) {
  Episode ep(vp, g, c, w);
  Observation obs = ep.reset(seed);
  while (!ep.done()) {
    const StepResult sr = ep.step(policy_action(policy, obs));
    obs = sr.observation;
  }
  return ep.total_reward();
}

constexpr double kDivergedScore = -1e9;

json record_to_json(const TrialRecord& r) {
  json j;
  j["type"] = "trial";
  j["id"] = r.id;
  j["params"] = r.params;
  j["seeds"] = r.seeds;
  j["episode_rewards"] = r.episode_rewards;
  j["mean_reward"] = r.mean_reward;
  return j;
}

TrialRecord record_from_json(const json& j) {
  TrialRecord r;
  r.id = j.at("id").get<int>();
  for (const auto& [k, v] : j.at("params").items()) r.params[k] = v.get<double>();
  r.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  r.episode_rewards = j.at("episode_rewards").get<std::vector<double>>();
  r.mean_reward = j.at("mean_reward").get<double>();
  return r;
}

}  // namespace

void apply_assignment(const std::map<std::string, double>& assignment,
                      CascadeGains& gains, EpisodeConfig& config,
                      RlHyperparams& hp) {
  for (const auto& [name, value] : assignment) {
    const auto dot = name.find('.');
    const std::string group = dot == std::string::npos ? name : name.substr(0, dot);
    const std::string key = dot == std::string::npos ? "" : name.substr(dot + 1);
    PidGains* pg = nullptr;
    if (group == "position") pg = &gains.position;
    else if (group == "velocity") pg = &gains.velocity;
    else if (group == "attitude") pg = &gains.attitude;
    else if (group == "rate") pg = &gains.rate;
    if (pg != nullptr) {
      if (key == "k_p") pg->k_p = value;
      else if (key == "k_i") pg->k_i = value;
      else if (key == "k_d") pg->k_d = value;
      else if (group == "rate" && key == "max_acc") gains.rate_max_acc = value;
      else throw std::runtime_error("unknown search parameter '" + name + "'");
      continue;
    }
    if (group == "rl") {
      if (key == "learning_rate") hp.learning_rate = value;
      else if (key == "batch_size") hp.batch_size = static_cast<int>(std::lround(value));
      else if (key == "epochs") hp.epochs = static_cast<int>(std::lround(value));
      else if (key == "steps") hp.steps = static_cast<int>(std::lround(value));
      else if (key == "entropy_coef") hp.entropy_coef = value;
      else throw std::runtime_error("unknown search parameter '" + name + "'");
      continue;
    }
    if (group == "episode") {
      if (key == "scaling_factor") config.scaling_factor = value;
      else if (key == "steps_u")
        config.steps_between_actions = static_cast<int>(std::lround(value));
      else throw std::runtime_error("unknown search parameter '" + name + "'");
      continue;
    }
    throw std::runtime_error("unknown search parameter '" + name + "'");
  }
  // A sampled batch size larger than the rollout shrinks to fit.
  if (hp.batch_size > hp.steps) hp.batch_size = hp.steps;
}

void write_trial_log_header(const std::string& path, std::uint64_t master_seed,
                            ControlMode mode, const WindField& wind,
                            const SearchSpace& space) {
  json j;
  j["type"] = "header";
  j["schema_version"] = 1;
  j["master_seed"] = master_seed;
  j["mode"] = mode == ControlMode::pid_only ? "pid_only" : "rl_supervised";
  j["wind_magnitude"] = wind.magnitude();
  j["wind_heading_deg"] = wind.heading_deg();
  json sp;
  for (const auto& [name, r] : space.params) {
    sp[name] = {{"kind", r.kind == RangeKind::uniform      ? "uniform"
                         : r.kind == RangeKind::log_uniform ? "log_uniform"
                                                            : "integer"},
                {"lo", r.lo},
                {"hi", r.hi}};
  }
  j["space"] = sp;
  std::ofstream f(path);
  if (!f) throw std::runtime_error("tune: cannot open " + path + " for write");
  f << j.dump() << "\n";
}

void append_trial_log(const std::string& path, const TrialRecord& record) {
  std::ofstream f(path, std::ios::app);
  if (!f) throw std::runtime_error("tune: cannot open " + path + " for append");
  f << record_to_json(record).dump() << "\n";
}

std::vector<TrialRecord> read_trial_log(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("tune: cannot open " + path);
  std::vector<TrialRecord> records;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    if (j.value("type", "") == "trial") records.push_back(record_from_json(j));
  }
  return records;
}

std::vector<TrialRecord> tune(const SearchSpace& space, ControlMode mode,
                              const WindField& wind, int n_trials,
                              std::uint64_t master_seed,
                              const CascadeGains& base_gains,
                              const EpisodeConfig& base_config,
                              const RlHyperparams& base_hp,
                              const VehicleParams& vehicle,
                              const TuneOptions& options) {
  validate(space);
  if (n_trials < 1) throw std::invalid_argument("tune: n_trials must be >= 1");

  // The same evaluation episodes score every trial.
  std::vector<std::uint64_t> eval_seeds(options.eval_episodes);
  for (int i = 0; i < options.eval_episodes; ++i)
    eval_seeds[i] = derive_seed(master_seed, 0xE7A1000 + i);

  std::vector<TrialRecord> records(n_trials);
  std::vector<char> have(n_trials, 0);

  const bool persist = !options.log_path.empty();
  if (persist) {
    std::ifstream probe(options.log_path);
    if (probe.good() && options.resume) {
      std::string first;
      std::getline(probe, first);
      if (!first.empty()) {
        const json h = json::parse(first);
        if (h.value("type", "") != "header" ||
            h.value("master_seed", std::uint64_t{0}) != master_seed)
          throw std::runtime_error(
              "tune: existing trial log does not match this search (delete it "
              "or change --out)");
      }
      probe.close();
      for (TrialRecord& r : read_trial_log(options.log_path)) {
        if (r.id >= 0 && r.id < n_trials) {
          records[r.id] = std::move(r);
          have[r.id] = 1;
        }
      }
    } else {
      write_trial_log_header(options.log_path, master_seed, mode, wind, space);
    }
  }

  auto run_trial = [&](int id) {
    TrialRecord r;
    r.id = id;
    r.seeds = eval_seeds;
    Rng rng(derive_seed(master_seed, 0x791A1 + static_cast<std::uint64_t>(id)));
    for (const auto& [name, range] : space.params)
      r.params[name] = sample_range(range, rng);

    CascadeGains gains = base_gains;
    EpisodeConfig config = base_config;
    RlHyperparams hp = base_hp;
    apply_assignment(r.params, gains, config, hp);

    const double t_start = omp_get_wtime();
    try {
      if (mode == ControlMode::pid_only) {
        for (std::uint64_t seed : eval_seeds)
          r.episode_rewards.push_back(
              run_episode_pid(vehicle, gains, config, wind, seed));
      } else {
        const EnvFactory factory = [&](int) {
          return std::make_unique<Episode>(vehicle, gains, config, wind);
        };
        // Nested parallelism is disabled; trials are the parallel axis.
        const TrainResult tr =
            train(factory, hp, options.rl_train_episodes,
                  derive_seed(master_seed, 0x7EA2 + static_cast<std::uint64_t>(id)),
                  false);
        for (std::uint64_t seed : eval_seeds)
          r.episode_rewards.push_back(
              run_episode_policy(tr.params, vehicle, gains, config, wind, seed));
      }
      r.mean_reward =
          std::accumulate(r.episode_rewards.begin(), r.episode_rewards.end(), 0.0) /
          r.episode_rewards.size();
    } catch (const std::exception&) {
      r.episode_rewards.assign(options.eval_episodes, kDivergedScore);
      r.mean_reward = kDivergedScore;
    }
    r.wall_time_s = omp_get_wtime() - t_start;
    return r;
  };

#pragma omp parallel for ordered schedule(dynamic, 1) if (options.parallel)
  for (int id = 0; id < n_trials; ++id) {
    TrialRecord r;
    if (!have[id]) r = run_trial(id);
#pragma omp ordered
    {
      if (!have[id]) {
        records[id] = std::move(r);
        have[id] = 1;
        if (persist) append_trial_log(options.log_path, records[id]);
      }
    }
  }
  return records;
}

void RegressionTree::fit(const std::vector<std::vector<double>>& x,
                         const std::vector<double>& y, int max_depth, int min_leaf) {
  if (x.empty() || x.size() != y.size())
    throw std::invalid_argument("RegressionTree::fit: bad input");
  nodes_.clear();
  std::vector<int> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  build(idx, 0, static_cast<int>(idx.size()), x, y, 0, max_depth, min_leaf);
}

int RegressionTree::build(std::vector<int>& idx, int begin, int end,
                          const std::vector<std::vector<double>>& x,
                          const std::vector<double>& y, int depth, int max_depth,
                          int min_leaf) {
  const int n = end - begin;
  double sum = 0.0, sum2 = 0.0;
  for (int k = begin; k < end; ++k) {
    sum += y[idx[k]];
    sum2 += y[idx[k]] * y[idx[k]];
  }
  const double mean = sum / n;

  const int node_id = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{-1, 0.0, mean, -1, -1});
  if (depth >= max_depth || n < 2 * min_leaf) return node_id;

  const double total_sse = sum2 - sum * sum / n;
  double best_gain = 1e-12;
  int best_feature = -1;
  double best_threshold = 0.0;

  const int p = static_cast<int>(x[0].size());
  std::vector<int> order(idx.begin() + begin, idx.begin() + end);
  for (int f = 0; f < p; ++f) {
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return x[a][f] < x[b][f] || (x[a][f] == x[b][f] && a < b);
    });
    double left_sum = 0.0, left_sum2 = 0.0;
    for (int k = 0; k < n - 1; ++k) {
      const double yv = y[order[k]];
      left_sum += yv;
      left_sum2 += yv * yv;
      const int nl = k + 1, nr = n - nl;
      if (nl < min_leaf || nr < min_leaf) continue;
      if (x[order[k]][f] == x[order[k + 1]][f]) continue;
      const double right_sum = sum - left_sum;
      const double right_sum2 = sum2 - left_sum2;
      const double sse = (left_sum2 - left_sum * left_sum / nl) +
                         (right_sum2 - right_sum * right_sum / nr);
      const double gain = total_sse - sse;
      if (gain > best_gain) {
        best_gain = gain;
        best_feature = f;
        best_threshold = 0.5 * (x[order[k]][f] + x[order[k + 1]][f]);
      }
    }
  }
  if (best_feature < 0) return node_id;

  const auto mid = std::stable_partition(
      idx.begin() + begin, idx.begin() + end,
      [&](int i) { return x[i][best_feature] <= best_threshold; });
  const int split = static_cast<int>(mid - idx.begin());
  if (split == begin || split == end) return node_id;

  nodes_[node_id].feature = best_feature;
  nodes_[node_id].threshold = best_threshold;
  const int left = build(idx, begin, split, x, y, depth + 1, max_depth, min_leaf);
  nodes_[node_id].left = left;
  const int right = build(idx, split, end, x, y, depth + 1, max_depth, min_leaf);
  nodes_[node_id].right = right;
  return node_id;
}

double RegressionTree::predict(const std::vector<double>& x) const {
  int node = 0;
  while (nodes_[node].feature >= 0) {
    node = x[nodes_[node].feature] <= nodes_[node].threshold ? nodes_[node].left
                                                             : nodes_[node].right;
  }
  return nodes_[node].value;
}

std::map<std::string, double> importance(const std::vector<TrialRecord>& records) {
  if (records.size() < 30)
    throw std::runtime_error("importance: need at least 30 trials, got " +
                             std::to_string(records.size()));
  std::vector<std::string> keys;
  for (const auto& [k, v] : records.front().params) keys.push_back(k);
  const int p = static_cast<int>(keys.size());
  const int n = static_cast<int>(records.size());

  std::vector<std::vector<double>> x(n, std::vector<double>(p));
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) {
    for (int f = 0; f < p; ++f) x[i][f] = records[i].params.at(keys[f]);
    y[i] = records[i].mean_reward;
  }

  std::map<std::string, double> result;
  const bool constant =
      std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; });
  if (constant) {
    for (const auto& k : keys) result[k] = 1.0 / p;
    return result;
  }

  RegressionTree tree;
  tree.fit(x, y);
  auto mse_of = [&](const std::vector<std::vector<double>>& data) {
    double mse = 0.0;
    for (int i = 0; i < n; ++i) {
      const double e = tree.predict(data[i]) - y[i];
      mse += e * e;
    }
    return mse / n;
  };
  const double base_mse = mse_of(x);

  constexpr int kRepeats = 5;
  std::vector<double> raw(p, 0.0);
  for (int f = 0; f < p; ++f) {
    for (int rep = 0; rep < kRepeats; ++rep) {
      Rng rng(derive_seed(0x19CA7, static_cast<std::uint64_t>(f) * 131 + rep));
      std::vector<std::vector<double>> perm = x;
      for (int i = n - 1; i > 0; --i) {
        const long j = rng.uniform_int(0, i);
        std::swap(perm[i][f], perm[j][f]);
      }
      raw[f] += std::max(0.0, mse_of(perm) - base_mse);
    }
    raw[f] /= kRepeats;
  }
  const double total = std::accumulate(raw.begin(), raw.end(), 0.0);
  for (int f = 0; f < p; ++f)
    result[keys[f]] = total > 0.0 ? raw[f] / total : 1.0 / p;
  return result;
}

namespace {
std::vector<const TrialRecord*> top_k(const std::vector<TrialRecord>& records, int k) {
  if (static_cast<int>(records.size()) < k)
    throw std::invalid_argument("top_table: need at least " + std::to_string(k) +
                                " records");
  std::vector<const TrialRecord*> sorted;
  sorted.reserve(records.size());
  for (const TrialRecord& r : records) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(), [](const TrialRecord* a, const TrialRecord* b) {
    if (a->mean_reward != b->mean_reward) return a->mean_reward > b->mean_reward;
    return a->id < b->id;
  });
  sorted.resize(k);
  return sorted;
}

ParamStat stat_of(const std::vector<const TrialRecord*>& top, const std::string& key) {
  ParamStat s;
  const int k = static_cast<int>(top.size());
  for (const TrialRecord* r : top) s.mean += r->params.at(key);
  s.mean /= k;
  if (k > 1) {
    double sq = 0.0;
    for (const TrialRecord* r : top) {
      const double d = r->params.at(key) - s.mean;
      sq += d * d;
    }
    const double sd = std::sqrt(sq / (k - 1));
    s.std_pct = std::abs(s.mean) > 1e-300 ? 100.0 * sd / std::abs(s.mean) : 0.0;
  }
  return s;
}
}  // namespace

std::map<std::string, ParamStat> top_table(const std::vector<TrialRecord>& records,
                                           int k) {
  const auto top = top_k(records, k);
  std::map<std::string, ParamStat> table;
  for (const auto& [key, v] : records.front().params) table[key] = stat_of(top, key);
  return table;
}

std::map<std::string, CompareRow> compare_top(const std::vector<TrialRecord>& nominal,
                                              const std::vector<TrialRecord>& wind,
                                              int k) {
  const auto tn = top_table(nominal, k);
  const auto tw = top_table(wind, k);
  std::map<std::string, CompareRow> out;
  for (const auto& [key, ns] : tn) {
    const auto wit = tw.find(key);
    if (wit == tw.end()) continue;
    CompareRow row;
    row.nominal = ns;
    row.wind = wit->second;
    row.change_pct = std::abs(ns.mean) > 1e-300
                         ? 100.0 * (row.wind.mean - ns.mean) / std::abs(ns.mean)
                         : 0.0;
    row.notable = std::abs(row.change_pct) > row.nominal.std_pct &&
                  std::abs(row.change_pct) > row.wind.std_pct;
    out[key] = row;
  }
  return out;
}

}  // namespace uavrl
