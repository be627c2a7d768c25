#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "uavrl/env.hpp"
#include "uavrl/trajectory.hpp"
#include "uavrl/tuner_types.hpp"

namespace uavrl {

struct TuneOptions {
  int eval_episodes = 10;          // fixed-seed evaluation episodes per trial
  long rl_train_episodes = 150;    // training budget per RL-mode trial
  std::string log_path;            // JSONL trial log; empty disables persistence
  bool parallel = true;
  bool resume = true;              // skip trial ids already in the log
};

/// Random search over the space: each trial samples a parameter
/// assignment (RNG derived from (master_seed, trial id)), optionally
/// trains a supervisor (rl_supervised mode), evaluates mean total reward
/// over the same `eval_episodes` fixed seeds, and appends to the trial
/// log in id order. A diverged trial records a worst-case score instead
/// of aborting the search.
std::vector<TrialRecord> tune(const SearchSpace& space, ControlMode mode,
                              const WindField& wind, int n_trials,
                              std::uint64_t master_seed,
                              const CascadeGains& base_gains,
                              const EpisodeConfig& base_config,
                              const RlHyperparams& base_hp,
                              const VehicleParams& vehicle,
                              const TuneOptions& options = {});

/// Applies a sampled assignment onto copies of the base configs. Unknown
/// names throw std::runtime_error.
void apply_assignment(const std::map<std::string, double>& assignment,
                      CascadeGains& gains, EpisodeConfig& config,
                      RlHyperparams& hp);

/// Permutation importance on a regression-tree surrogate of reward vs
/// parameters, normalized to sum 1; constant scores fall back to uniform.
/// Throws std::runtime_error when fewer than 30 trials are supplied.
std::map<std::string, double> importance(const std::vector<TrialRecord>& records);

struct ParamStat {
  double mean = 0.0;
  double std_pct = 0.0;  // sample std as a percentage of |mean|
};

/// Per-parameter mean and std%, aggregated over the k highest-mean-reward
/// trials.
std::map<std::string, ParamStat> top_table(const std::vector<TrialRecord>& records,
                                           int k = 10);

struct CompareRow {
  ParamStat nominal;
  ParamStat wind;
  double change_pct = 0.0;
  bool notable = false;  // |change| exceeds both stds
};

std::map<std::string, CompareRow> compare_top(const std::vector<TrialRecord>& nominal,
                                              const std::vector<TrialRecord>& wind,
                                              int k = 10);

/// JSONL persistence: a header line with the search metadata, then one
/// record per line.
void append_trial_log(const std::string& path, const TrialRecord& record);
void write_trial_log_header(const std::string& path, std::uint64_t master_seed,
                            ControlMode mode, const WindField& wind,
                            const SearchSpace& space);
std::vector<TrialRecord> read_trial_log(const std::string& path);

/// Exact greedy CART regression tree (variance-reduction splits).
class RegressionTree {
 public:
  void fit(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
           int max_depth = 8, int min_leaf = 4);
  double predict(const std::vector<double>& x) const;

 private:
  struct Node {
    int feature = -1;  // -1: leaf
    double threshold = 0.0;
    double value = 0.0;
    int left = -1, right = -1;
  };
  int build(std::vector<int>& idx, int begin, int end,
            const std::vector<std::vector<double>>& x, const std::vector<double>& y,
            int depth, int max_depth, int min_leaf);
  std::vector<Node> nodes_;
};

}  // namespace uavrl
