// Serial-vs-OpenMP comparison for the hot paths: batched policy
// forwards, PPO minibatch gradients, episode rollouts and tuning trials.
// Where both paths exist the outputs are checked for bit-equality.
#include <omp.h>

#include <cstdio>
#include <cstring>
#include <vector>

#include "uavrl/env.hpp"
#include "uavrl/ppo.hpp"
#include "uavrl/rng.hpp"
#include "uavrl/tuner.hpp"

using namespace uavrl;

namespace {

double bench_forward(bool parallel, bool* bitmatch) {
  Rng rng(1);
  Mlp net(std::vector<int>{12, 128, 128, 3});
  net.init_xavier(rng);
  const int n = 8192;
  std::vector<double> in(n * 12), out(n * 3), ref(n * 3);
  for (double& v : in) v = rng.uniform(-1, 1);
  net.forward_batch(in.data(), n, ref.data(), false);
  const double t0 = omp_get_wtime();
  for (int rep = 0; rep < 20; ++rep) net.forward_batch(in.data(), n, out.data(), parallel);
  const double dt = omp_get_wtime() - t0;
  if (bitmatch) *bitmatch = std::memcmp(out.data(), ref.data(), out.size() * 8) == 0;
  return dt;
}

double bench_gradient(bool parallel, bool* bitmatch) {
  Rng rng(2);
  PolicyParameters p = PolicyParameters::make(128, 2);
  p.init(rng);
  const int n = 1024;
  RolloutBuffer buf;
  buf.slot_begin = {0, n};
  buf.bootstrap_value = {0.0};
  std::vector<double> adv(n), ret(n);
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) {
    Observation obs{};
    for (double& v : obs) v = rng.uniform(-1, 1);
    const PolicyEval ev = policy_forward(p, obs);
    std::array<double, 3> raw{};
    for (int j = 0; j < 3; ++j)
      raw[j] = ev.raw_mean[j] + std::exp(ev.log_std[j]) * rng.normal();
    buf.obs.push_back(obs);
    buf.action_raw.push_back(raw);
    buf.logp.push_back(action_log_prob(ev.raw_mean, ev.log_std, raw));
    buf.reward.push_back(rng.uniform(-1, 1));
    buf.value.push_back(ev.value);
    buf.done.push_back(0);
    adv[i] = rng.uniform(-2, 2);
    ret[i] = rng.uniform(-2, 2);
    idx[i] = i;
  }
  RlHyperparams hp;
  std::vector<double> grad(p.param_count()), ref_grad(p.param_count());
  ppo_loss_grad(p, buf, adv, ret, idx, hp, ref_grad, false);
  const double t0 = omp_get_wtime();
  for (int rep = 0; rep < 10; ++rep)
    ppo_loss_grad(p, buf, adv, ret, idx, hp, grad, parallel);
  const double dt = omp_get_wtime() - t0;
  if (bitmatch) *bitmatch = grad == ref_grad;
  return dt;
}

double bench_rollouts(bool parallel, double* checksum) {
  const VehicleParams vp = calibrated_octorotor();
  const CascadeGains g = baseline_gains();
  EpisodeConfig c;
  const WindField wind = WindField::from_heading(4.0, 90.0);
  const int n = 16;
  std::vector<double> totals(n, 0.0);
  const double t0 = omp_get_wtime();
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int k = 0; k < n; ++k) {
    Episode ep(vp, g, c, wind);
    ep.reset(derive_seed(3, k));
    while (!ep.done()) ep.step({0.0, 0.0, 0.0});
    totals[k] = ep.total_reward();
  }
  const double dt = omp_get_wtime() - t0;
  if (checksum) {
    *checksum = 0.0;
    for (double v : totals) *checksum += v;
  }
  return dt;
}

double bench_tune(bool parallel, double* best) {
  SearchSpace space;
  space.params["position.k_p"] = {RangeKind::log_uniform, 0.1, 10.0};
  space.params["velocity.k_p"] = {RangeKind::log_uniform, 0.2, 20.0};
  space.params["rate.max_acc"] = {RangeKind::log_uniform, 1.0, 100.0};
  TuneOptions opt;
  opt.parallel = parallel;
  const double t0 = omp_get_wtime();
  const auto records = tune(space, ControlMode::pid_only, WindField{}, 8, 77,
                            baseline_gains(), EpisodeConfig{}, RlHyperparams{},
                            calibrated_octorotor(), opt);
  const double dt = omp_get_wtime() - t0;
  if (best) {
    *best = records.front().mean_reward;
    for (const auto& r : records)
      if (r.mean_reward > *best) *best = r.mean_reward;
  }
  return dt;
}

void report(const char* name, double serial, double parallel, bool bitmatch,
            bool has_bitmatch) {
  std::printf("%-28s serial %8.3fs  omp %8.3fs  speedup %.2fx", name, serial,
              parallel, serial / parallel);
  if (has_bitmatch) std::printf("  bit-identical: %s", bitmatch ? "yes" : "NO");
  std::printf("\n");
}

}  // namespace

int main() {
  std::printf("threads available: %d\n", omp_get_max_threads());

  bool bit = false;
  const double f_ser = bench_forward(false, nullptr);
  const double f_par = bench_forward(true, &bit);
  report("policy forward x8192", f_ser, f_par, bit, true);

  const double g_ser = bench_gradient(false, nullptr);
  const double g_par = bench_gradient(true, &bit);
  report("ppo gradient x1024", g_ser, g_par, bit, true);

  double sum_ser = 0.0, sum_par = 0.0;
  const double r_ser = bench_rollouts(false, &sum_ser);
  const double r_par = bench_rollouts(true, &sum_par);
  report("episode rollouts x16", r_ser, r_par, sum_ser == sum_par, true);

  double best_ser = 0.0, best_par = 0.0;
  const double t_ser = bench_tune(false, &best_ser);
  const double t_par = bench_tune(true, &best_par);
  report("tuning trials x8", t_ser, t_par, best_ser == best_par, true);
  return 0;
}
