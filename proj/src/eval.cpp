#include "uavrl/eval.hpp"

#include <cmath>
#include <stdexcept>

#include "uavrl/rng.hpp"

namespace uavrl {

namespace {

SweepRow run_flight(const SweepSetup& s, bool rl, const WindField& wind,
                    std::uint64_t seed) {
  SweepRow row;
  row.controller = rl ? "rl" : "pid";
  row.magnitude = wind.magnitude();
  row.heading_deg = wind.heading_deg();
  row.seed = seed;
  const FlightResult fr =
      fly(s.trajectory, rl ? ControlMode::rl_supervised : ControlMode::pid_only,
          rl ? s.rl_gains : s.pid_gains, rl ? s.policy : nullptr, wind, s.config,
          s.vehicle, seed);
  const FlightScore sc = score(fr);
  row.total_reward = sc.total_reward;
  row.completion = sc.completion;
  return row;
}

std::vector<SweepRow> run_conditions(const SweepSetup& s,
                                     const std::vector<WindField>& winds) {
  const bool with_rl = s.policy != nullptr;
  const int per_cond = s.n_seeds * (with_rl ? 2 : 1);
  std::vector<SweepRow> rows(winds.size() * per_cond);
#pragma omp parallel for collapse(2) schedule(dynamic) if (s.parallel)
  for (std::size_t c = 0; c < winds.size(); ++c) {
    for (int k = 0; k < s.n_seeds; ++k) {
      const std::uint64_t seed = derive_seed(s.master_seed, 0xE0A + k);
      const std::size_t base = c * per_cond;
      rows[base + k] = run_flight(s, false, winds[c], seed);
      if (with_rl) rows[base + s.n_seeds + k] = run_flight(s, true, winds[c], seed);
    }
  }
  return rows;
}

}  // namespace

std::vector<SweepRow> heading_sweep(const SweepSetup& setup, double magnitude) {
  std::vector<WindField> winds;
  for (int h = 0; h < 360; h += 45)
    winds.push_back(WindField::from_heading(magnitude, h));
  return run_conditions(setup, winds);
}

std::vector<SweepRow> magnitude_sweep(const SweepSetup& setup, double heading_deg,
                                      const std::vector<double>& magnitudes) {
  if (magnitudes.empty()) throw std::invalid_argument("magnitude_sweep: no magnitudes");
  std::vector<WindField> winds;
  for (double m : magnitudes) winds.push_back(WindField::from_heading(m, heading_deg));
  return run_conditions(setup, winds);
}

std::vector<DensityRow> density_study(const CascadeGains& pid_gains,
                                      const CascadeGains& rl_gains,
                                      const PolicyParameters* policy,
                                      const WindField& wind,
                                      const EpisodeConfig& config,
                                      const VehicleParams& vehicle, int n_runs,
                                      std::uint64_t master_seed, bool parallel) {
  if (n_runs < 1) throw std::invalid_argument("density_study: n_runs must be >= 1");
  const bool with_rl = policy != nullptr;
  std::vector<DensityRow> rows(n_runs * (with_rl ? 2 : 1));
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int k = 0; k < n_runs; ++k) {
    const std::uint64_t seed = derive_seed(master_seed, 0xD3A + k);
    {
      Episode ep(vehicle, pid_gains, config, wind);
      ep.reset(seed);
      while (!ep.done()) ep.step({0.0, 0.0, 0.0});
      rows[k] = DensityRow{"pid", seed, ep.total_reward()};
    }
    if (with_rl) {
      Episode ep(vehicle, rl_gains, config, wind);
      Observation obs = ep.reset(seed);
      while (!ep.done()) obs = ep.step(policy_action(*policy, obs)).observation;
      rows[n_runs + k] = DensityRow{"rl", seed, ep.total_reward()};
    }
  }
  return rows;
}

std::vector<double> action_angle_histogram(const PolicyParameters& policy,
                                           int n_samples, std::uint64_t seed) {
  constexpr int kBins = 36;
  std::vector<double> hist(kBins, 0.0);
  Rng rng(seed);
  long counted = 0;
  for (int i = 0; i < n_samples; ++i) {
    Observation obs{};
    for (double& v : obs) v = rng.uniform(-1.0, 1.0);
    const SupervisoryAction a = policy_action(policy, obs);
    if (a[0] == 0.0 && a[1] == 0.0) continue;
    double deg = std::atan2(a[1], a[0]) * 180.0 / M_PI;
    if (deg < 0.0) deg += 360.0;
    int bin = static_cast<int>(deg / 10.0);
    if (bin >= kBins) bin = kBins - 1;
    hist[bin] += 1.0;
    ++counted;
  }
  if (counted > 0)
    for (double& h : hist) h /= static_cast<double>(counted);
  return hist;
}

std::vector<double> shifted_cosine_similarity(const std::vector<double>& hist_a,
                                              const std::vector<double>& hist_b) {
  if (hist_a.size() != hist_b.size() || hist_a.empty())
    throw std::invalid_argument("shifted_cosine_similarity: size mismatch");
  const int n = static_cast<int>(hist_a.size());
  double na = 0.0, nb = 0.0;
  for (int i = 0; i < n; ++i) {
    na += hist_a[i] * hist_a[i];
    nb += hist_b[i] * hist_b[i];
  }
  const double denom = std::sqrt(na) * std::sqrt(nb);
  std::vector<double> sims(n, 0.0);
  for (int s = 0; s < n; ++s) {
    double dot = 0.0;
    for (int i = 0; i < n; ++i) dot += hist_a[(i + s) % n] * hist_b[i];
    sims[s] = denom > 0.0 ? dot / denom : 0.0;
  }
  // The zero-shift self-similarity is exactly 1 by construction.
  return sims;
}

}  // namespace uavrl
