#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uavrl/trajectory.hpp"

namespace uavrl {

struct SweepRow {
  std::string controller;  // "pid" or "rl"
  double heading_deg = 0.0;
  double magnitude = 0.0;
  std::uint64_t seed = 0;
  double total_reward = 0.0;
  double completion = 0.0;
};

struct SweepSetup {
  Trajectory trajectory;
  CascadeGains pid_gains;
  CascadeGains rl_gains;          // gains used under the supervisor
  const PolicyParameters* policy = nullptr;
  EpisodeConfig config;
  VehicleParams vehicle;
  int n_seeds = 10;
  std::uint64_t master_seed = 0;
  bool parallel = true;
};

/// Square-trajectory rewards under wind of fixed magnitude coming from
/// the eight 45-degree headings.
std::vector<SweepRow> heading_sweep(const SweepSetup& setup, double magnitude);

/// Rewards while the wind magnitude grows at a fixed heading.
std::vector<SweepRow> magnitude_sweep(const SweepSetup& setup, double heading_deg,
                                      const std::vector<double>& magnitudes);

struct DensityRow {
  std::string controller;
  std::uint64_t seed = 0;
  double episode_reward = 0.0;
};

/// Episodic rewards over n_runs granular navigation episodes per
/// controller under one wind condition.
std::vector<DensityRow> density_study(const CascadeGains& pid_gains,
                                      const CascadeGains& rl_gains,
                                      const PolicyParameters* policy,
                                      const WindField& wind,
                                      const EpisodeConfig& config,
                                      const VehicleParams& vehicle, int n_runs,
                                      std::uint64_t master_seed, bool parallel = true);

/// Density histogram (36 bins of 10 degrees, sums to 1) of the azimuths
/// of deterministic supervisory actions over n_samples random in-range
/// observations.
std::vector<double> action_angle_histogram(const PolicyParameters& policy,
                                           int n_samples = 1000,
                                           std::uint64_t seed = 0x5A5A);

/// Cosine similarity between hist_a rotated by s bins and hist_b, for
/// every shift s; entry 0 of a histogram against itself is exactly 1.
std::vector<double> shifted_cosine_similarity(const std::vector<double>& hist_a,
                                              const std::vector<double>& hist_b);

}  // namespace uavrl
