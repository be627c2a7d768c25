#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace uavrl {

enum class RangeKind { uniform, log_uniform, integer };

struct ParamRange {
  RangeKind kind = RangeKind::uniform;
  double lo = 0.0;
  double hi = 1.0;
};

/// Parameter name -> sampling range. Names address gain and RL knobs with
/// dotted paths: position.k_p, velocity.k_i, rate.max_acc,
/// rl.learning_rate, rl.batch_size, rl.epochs, rl.steps,
/// episode.scaling_factor, episode.steps_u.
struct SearchSpace {
  std::map<std::string, ParamRange> params;
};

void validate(const SearchSpace& space);

/// One hyperparameter-search sample.
struct TrialRecord {
  int id = 0;
  std::map<std::string, double> params;
  std::vector<std::uint64_t> seeds;
  std::vector<double> episode_rewards;
  double mean_reward = 0.0;
  double wall_time_s = 0.0;  // informational; not persisted
};

}  // namespace uavrl
