#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "uavrl/env.hpp"
#include "uavrl/nn.hpp"

namespace uavrl {

/// Actor-critic parameters: a Gaussian policy on the pre-squash action
/// space (tanh applied at sampling time) with state-independent log
/// standard deviations, plus a separate value network.
struct PolicyParameters {
  Mlp actor;                    // obs -> pre-squash action mean
  std::vector<double> log_std;  // one per action dimension
  Mlp critic;                   // obs -> value
  std::uint32_t version = 1;

  static PolicyParameters make(int hidden_width = 128, int hidden_depth = 2);
  void init(Rng& rng);
  int param_count() const;

  /// Copies [actor | log_std | critic] into one flat vector and back.
  std::vector<double> flat() const;
  void set_flat(std::span<const double> theta);
};

struct RlHyperparams {
  double learning_rate = 3e-4;
  int batch_size = 64;
  int epochs = 10;
  int steps = 2048;          // supervisory decisions per rollout collection
  double clip_ratio = 0.2;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double entropy_coef = 0.0;
  double value_coef = 0.5;
  double max_grad_norm = 0.5;
  int n_envs = 8;
  int hidden_width = 128;
  int hidden_depth = 2;
};

void validate(const RlHyperparams& hp);

/// Slot-major rollout storage. Each collection slot (environment
/// instance) owns a contiguous range so advantage estimation and
/// gradient order never depend on thread scheduling.
struct RolloutBuffer {
  std::vector<Observation> obs;
  std::vector<std::array<double, 3>> action_raw;  // pre-squash samples
  std::vector<double> logp;
  std::vector<double> reward;
  std::vector<double> value;
  std::vector<std::uint8_t> done;
  std::vector<int> slot_begin;           // size n_slots + 1
  std::vector<double> bootstrap_value;   // per slot, V of the state after the last step

  int size() const { return static_cast<int>(reward.size()); }
};

struct PolicyEval {
  std::array<double, 3> mean{};     // tanh-squashed
  std::array<double, 3> raw_mean{};
  std::array<double, 3> log_std{};
  double value = 0.0;
};

/// Deterministic forward pass of actor and critic. Throws
/// std::logic_error when the network input dimension is not 12.
PolicyEval policy_forward(const PolicyParameters& params, const Observation& obs);

/// Deterministic action (the squashed mean).
SupervisoryAction policy_action(const PolicyParameters& params, const Observation& obs);

struct ActionSample {
  std::array<double, 3> raw{};
  SupervisoryAction squashed{};
  double logp = 0.0;
};

ActionSample sample_action(const PolicyParameters& params, const Observation& obs,
                           Rng& rng);

/// Log-probability of a stored pre-squash sample under (raw_mean,
/// log_std), including the tanh change-of-variables correction.
double action_log_prob(const std::array<double, 3>& raw_mean,
                       const std::array<double, 3>& log_std,
                       const std::array<double, 3>& raw_action);

/// Generalized advantage estimation over one trajectory stream.
/// `last_value` bootstraps the value after the final step (ignored when
/// that step terminated). Returns (advantages, returns).
std::pair<std::vector<double>, std::vector<double>> gae(
    const std::vector<double>& rewards, const std::vector<double>& values,
    const std::vector<std::uint8_t>& dones, double gamma, double lambda,
    double last_value = 0.0);

struct UpdateStats {
  double surrogate = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double grad_norm = 0.0;
  int minibatches = 0;
  bool aborted = false;
};

/// Zero mean, unit variance, in place (the per-update normalization).
void normalize_advantages(std::vector<double>& advantages);

struct LossTerms {
  double total = 0.0;      // -surrogate + value_coef*value_loss - entropy_coef*entropy
  double surrogate = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
};

/// Mean PPO loss over the given sample indices, and, when `grad` is
/// non-empty, its gradient in the flat [actor | log_std | critic]
/// layout. No optimizer step; exposed so the analytic gradients can be
/// checked against finite differences. Gradients are accumulated over a
/// fixed set of reduction slots so the result is bit-identical for any
/// thread count, including the serial path.
LossTerms ppo_loss_grad(const PolicyParameters& params, const RolloutBuffer& buffer,
                        const std::vector<double>& advantages,
                        const std::vector<double>& returns,
                        const std::vector<int>& indices, const RlHyperparams& hp,
                        std::span<double> grad, bool parallel = true);

/// One PPO update over the buffer: `epochs` passes of shuffled
/// minibatches maximizing the clipped surrogate minus value loss plus
/// entropy bonus; Adam with global gradient-norm clipping. Advantages
/// are normalized to zero mean / unit variance once per update. A
/// non-finite loss aborts the update (stats.aborted) without applying
/// the offending minibatch.
UpdateStats ppo_update(PolicyParameters& params, const RolloutBuffer& buffer,
                       const RlHyperparams& hp, AdamState& opt, Rng& rng,
                       bool parallel = true);

using EnvFactory = std::function<std::unique_ptr<RolloutEnv>(int slot)>;

struct CurvePoint {
  int update = 0;
  double mean_episode_reward = 0.0;
  double surrogate = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
};

struct TrainResult {
  PolicyParameters params;
  std::vector<CurvePoint> curve;
  long episodes = 0;
  long steps = 0;
};

/// Algorithm: alternate rollout collection over n_envs independent
/// environments (Gaussian actions, tanh-squashed) with PPO updates until
/// at least `episode_budget` episodes have completed. Fully reproducible
/// given the seed, independent of thread count.
TrainResult train(const EnvFactory& make_env, const RlHyperparams& hp,
                  long episode_budget, std::uint64_t seed, bool parallel = true);

/// Versioned binary checkpoint: magic, version tag, layer shapes, flat
/// parameter arrays. Round trips are bit-exact.
std::vector<std::uint8_t> save_checkpoint(const PolicyParameters& params);
PolicyParameters load_checkpoint(const std::vector<std::uint8_t>& bytes);
void save_checkpoint_file(const PolicyParameters& params, const std::string& path);
PolicyParameters load_checkpoint_file(const std::string& path);

/// Throws std::runtime_error naming the offending layer when the loaded
/// shapes do not match the expected architecture.
void require_shapes(const PolicyParameters& params, const std::vector<int>& actor_dims,
                    const std::vector<int>& critic_dims);

}  // namespace uavrl
