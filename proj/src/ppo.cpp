#include "uavrl/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace uavrl {

namespace {
constexpr int kObsDim = 12;
constexpr int kActDim = 3;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2*pi))
constexpr int kGradSlots = 32;  // fixed reduction fan-in, independent of threads
}  // namespace

PolicyParameters PolicyParameters::make(int hidden_width, int hidden_depth) {
  if (hidden_width < 1 || hidden_depth < 1)
    throw std::invalid_argument("policy: hidden width/depth must be >= 1");
  std::vector<int> adims{kObsDim};
  for (int i = 0; i < hidden_depth; ++i) adims.push_back(hidden_width);
  adims.push_back(kActDim);
  std::vector<int> cdims{kObsDim};
  for (int i = 0; i < hidden_depth; ++i) cdims.push_back(hidden_width);
  cdims.push_back(1);
  PolicyParameters p;
  p.actor = Mlp(adims);
  p.critic = Mlp(cdims);
  p.log_std.assign(kActDim, 0.0);
  return p;
}

void PolicyParameters::init(Rng& rng) {
  actor.init_xavier(rng, 0.01);
  critic.init_xavier(rng, 1.0);
  std::fill(log_std.begin(), log_std.end(), 0.0);
}

int PolicyParameters::param_count() const {
  return actor.param_count() + static_cast<int>(log_std.size()) + critic.param_count();
}

std::vector<double> PolicyParameters::flat() const {
  std::vector<double> theta;
  theta.reserve(param_count());
  theta.insert(theta.end(), actor.params().begin(), actor.params().end());
  theta.insert(theta.end(), log_std.begin(), log_std.end());
  theta.insert(theta.end(), critic.params().begin(), critic.params().end());
  return theta;
}

void PolicyParameters::set_flat(std::span<const double> theta) {
  if (static_cast<int>(theta.size()) != param_count())
    throw std::logic_error("PolicyParameters::set_flat: size mismatch");
  std::size_t k = 0;
  for (double& v : actor.params()) v = theta[k++];
  for (double& v : log_std) v = theta[k++];
  for (double& v : critic.params()) v = theta[k++];
}

void validate(const RlHyperparams& hp) {
  if (!(hp.gamma > 0.0) || hp.gamma > 1.0)
    throw std::invalid_argument("gamma must be in (0, 1]");
  if (!(hp.clip_ratio > 0.0)) throw std::invalid_argument("clip_ratio must be > 0");
  if (!(hp.learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
  if (hp.batch_size < 1 || hp.epochs < 1 || hp.steps < 1 || hp.n_envs < 1)
    throw std::invalid_argument("batch_size, epochs, steps, n_envs must be >= 1");
  if (hp.batch_size > hp.steps)
    throw std::invalid_argument("batch_size must be <= steps");
  if (hp.gae_lambda < 0.0 || hp.gae_lambda > 1.0)
    throw std::invalid_argument("gae_lambda must be in [0, 1]");
}

PolicyEval policy_forward(const PolicyParameters& p, const Observation& obs) {
  if (p.actor.input_dim() != kObsDim || p.actor.output_dim() != kActDim ||
      p.critic.input_dim() != kObsDim || p.critic.output_dim() != 1)
    throw std::logic_error("policy_forward: network shape mismatch");
  PolicyEval e;
  p.actor.forward(std::span<const double>(obs.data(), kObsDim),
                  std::span<double>(e.raw_mean.data(), kActDim));
  double v = 0.0;
  p.critic.forward(std::span<const double>(obs.data(), kObsDim),
                   std::span<double>(&v, 1));
  e.value = v;
  for (int i = 0; i < kActDim; ++i) {
    e.mean[i] = std::tanh(e.raw_mean[i]);
    e.log_std[i] = p.log_std[i];
  }
  return e;
}

SupervisoryAction policy_action(const PolicyParameters& p, const Observation& obs) {
  const PolicyEval e = policy_forward(p, obs);
  return {e.mean[0], e.mean[1], e.mean[2]};
}

double action_log_prob(const std::array<double, 3>& raw_mean,
                       const std::array<double, 3>& log_std,
                       const std::array<double, 3>& raw_action) {
  double lp = 0.0;
  for (int i = 0; i < kActDim; ++i) {
    const double sigma = std::exp(log_std[i]);
    const double z = (raw_action[i] - raw_mean[i]) / sigma;
    lp += -0.5 * z * z - log_std[i] - kLogSqrt2Pi;
    const double th = std::tanh(raw_action[i]);
    lp -= std::log(1.0 - th * th + 1e-6);
  }
  return lp;
}

ActionSample sample_action(const PolicyParameters& p, const Observation& obs,
                           Rng& rng) {
  const PolicyEval e = policy_forward(p, obs);
  ActionSample s;
  for (int i = 0; i < kActDim; ++i) {
    const double sigma = std::exp(e.log_std[i]);
    s.raw[i] = e.raw_mean[i] + sigma * rng.normal();
    s.squashed[i] = std::tanh(s.raw[i]);
  }
  s.logp = action_log_prob(e.raw_mean, e.log_std, s.raw);
  return s;
}

std::pair<std::vector<double>, std::vector<double>> gae(
    const std::vector<double>& rewards, const std::vector<double>& values,
    const std::vector<std::uint8_t>& dones, double gamma, double lambda,
    double last_value) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n)
    throw std::invalid_argument("gae: sequences must have equal length");
  std::vector<double> adv(n, 0.0), ret(n, 0.0);
  double running = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    const double not_done = dones[k] ? 0.0 : 1.0;
    const double next_v = (k + 1 < n) ? values[k + 1] : last_value;
    const double delta = rewards[k] + gamma * next_v * not_done - values[k];
    running = delta + gamma * lambda * not_done * running;
    adv[k] = running;
    ret[k] = adv[k] + values[k];
  }
  return {adv, ret};
}

void normalize_advantages(std::vector<double>& advantages) {
  const std::size_t n = advantages.size();
  if (n == 0) return;
  double mean = 0.0;
  for (double a : advantages) mean += a;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double a : advantages) var += (a - mean) * (a - mean);
  var /= static_cast<double>(n);
  const double inv_std = 1.0 / (std::sqrt(var) + 1e-8);
  for (double& a : advantages) a = (a - mean) * inv_std;
}

LossTerms ppo_loss_grad(const PolicyParameters& params, const RolloutBuffer& buffer,
                        const std::vector<double>& advantages,
                        const std::vector<double>& returns,
                        const std::vector<int>& indices, const RlHyperparams& hp,
                        std::span<double> grad, bool parallel) {
  const int bn = static_cast<int>(indices.size());
  if (bn == 0) throw std::invalid_argument("ppo_loss_grad: no samples");
  const bool want_grad = !grad.empty();
  const int n_params = params.param_count();
  if (want_grad && static_cast<int>(grad.size()) != n_params)
    throw std::logic_error("ppo_loss_grad: grad size mismatch");
  const int actor_n = params.actor.param_count();
  const int critic_n = params.critic.param_count();
  const double ent_const = kActDim * 0.5 * std::log(2.0 * M_PI * M_E);

  struct Terms {
    double surrogate = 0.0, value_loss = 0.0, entropy = 0.0, approx_kl = 0.0;
  };
  std::vector<std::vector<double>> slot_grad(
      want_grad ? kGradSlots : 0, std::vector<double>(want_grad ? n_params : 0, 0.0));
  std::vector<Terms> slot_terms(kGradSlots);

  // Each reduction slot handles samples k, k+S, k+2S ... in order, so the
  // sums are identical for any thread count (and for the serial path).
#pragma omp parallel for schedule(static) if (parallel)
  for (int slot = 0; slot < kGradSlots; ++slot) {
    Mlp::Cache actor_cache, critic_cache;
    Terms& terms = slot_terms[slot];
    std::span<double> g_actor, g_logstd, g_critic;
    if (want_grad) {
      std::vector<double>& g = slot_grad[slot];
      g_actor = std::span<double>(g.data(), actor_n);
      g_logstd = std::span<double>(g.data() + actor_n, kActDim);
      g_critic = std::span<double>(g.data() + actor_n + kActDim, critic_n);
    }
    for (int k = slot; k < bn; k += kGradSlots) {
      const int i = indices[k];
      std::array<double, 3> raw_mean{};
      params.actor.forward(std::span<const double>(buffer.obs[i].data(), kObsDim),
                           std::span<double>(raw_mean.data(), kActDim),
                           want_grad ? &actor_cache : nullptr);
      double v = 0.0;
      params.critic.forward(std::span<const double>(buffer.obs[i].data(), kObsDim),
                            std::span<double>(&v, 1),
                            want_grad ? &critic_cache : nullptr);

      const std::array<double, 3> ls{params.log_std[0], params.log_std[1],
                                     params.log_std[2]};
      const double logp_new = action_log_prob(raw_mean, ls, buffer.action_raw[i]);
      const double ratio = std::exp(logp_new - buffer.logp[i]);
      const double adv = advantages[i];
      const double unclipped = ratio * adv;
      const double clipped =
          std::clamp(ratio, 1.0 - hp.clip_ratio, 1.0 + hp.clip_ratio) * adv;
      const double surr = std::min(unclipped, clipped);
      const double verr = v - returns[i];
      double ent = ent_const;
      for (int j = 0; j < kActDim; ++j) ent += ls[j];

      terms.surrogate += surr;
      terms.value_loss += verr * verr;
      terms.entropy += ent;
      terms.approx_kl += buffer.logp[i] - logp_new;

      if (!want_grad) continue;
      // Gradient of the selected branch w.r.t. logp_new; the clipped
      // branch is flat whenever it is strictly smaller.
      const double dsurr_dlogp = (unclipped <= clipped) ? unclipped : 0.0;
      const double dloss_dlogp = -dsurr_dlogp;
      std::array<double, 3> dmu{};
      for (int j = 0; j < kActDim; ++j) {
        const double sigma = std::exp(ls[j]);
        const double z = (buffer.action_raw[i][j] - raw_mean[j]) / sigma;
        dmu[j] = dloss_dlogp * (z / sigma);
        g_logstd[j] += dloss_dlogp * (z * z - 1.0) - hp.entropy_coef;
      }
      params.actor.backward(actor_cache, std::span<const double>(dmu.data(), kActDim),
                            g_actor);
      const double dv = 2.0 * hp.value_coef * verr;
      params.critic.backward(critic_cache, std::span<const double>(&dv, 1), g_critic);
    }
  }

  Terms total;
  if (want_grad) std::fill(grad.begin(), grad.end(), 0.0);
  for (int slot = 0; slot < kGradSlots; ++slot) {
    if (want_grad) {
      const std::vector<double>& g = slot_grad[slot];
      for (int j = 0; j < n_params; ++j) grad[j] += g[j];
    }
    total.surrogate += slot_terms[slot].surrogate;
    total.value_loss += slot_terms[slot].value_loss;
    total.entropy += slot_terms[slot].entropy;
    total.approx_kl += slot_terms[slot].approx_kl;
  }
  const double inv_bn = 1.0 / bn;
  if (want_grad)
    for (double& gj : grad) gj *= inv_bn;

  LossTerms out;
  out.surrogate = total.surrogate * inv_bn;
  out.value_loss = total.value_loss * inv_bn;
  out.entropy = total.entropy * inv_bn;
  out.approx_kl = total.approx_kl * inv_bn;
  out.total = -out.surrogate + hp.value_coef * out.value_loss -
              hp.entropy_coef * out.entropy;
  return out;
}

UpdateStats ppo_update(PolicyParameters& params, const RolloutBuffer& buffer,
                       const RlHyperparams& hp, AdamState& opt, Rng& rng,
                       bool parallel) {
  validate(hp);
  const int n = buffer.size();
  if (n <= 0) throw std::invalid_argument("ppo_update: empty buffer");

  // Advantages and returns per slot stream, then one normalization pass.
  std::vector<double> advantages(n, 0.0), returns(n, 0.0);
  const int n_slots = static_cast<int>(buffer.slot_begin.size()) - 1;
  for (int s = 0; s < n_slots; ++s) {
    const int b = buffer.slot_begin[s], e = buffer.slot_begin[s + 1];
    if (e <= b) continue;
    std::vector<double> r(buffer.reward.begin() + b, buffer.reward.begin() + e);
    std::vector<double> v(buffer.value.begin() + b, buffer.value.begin() + e);
    std::vector<std::uint8_t> d(buffer.done.begin() + b, buffer.done.begin() + e);
    auto [adv, ret] = gae(r, v, d, hp.gamma, hp.gae_lambda, buffer.bootstrap_value[s]);
    std::copy(adv.begin(), adv.end(), advantages.begin() + b);
    std::copy(ret.begin(), ret.end(), returns.begin() + b);
  }
  normalize_advantages(advantages);

  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::vector<double> grad(params.param_count(), 0.0);
  std::vector<int> batch;

  UpdateStats stats;
  double sum_surr = 0.0, sum_vloss = 0.0, sum_ent = 0.0, sum_kl = 0.0,
         sum_gnorm = 0.0;

  for (int epoch = 0; epoch < hp.epochs && !stats.aborted; ++epoch) {
    // Fisher-Yates shuffle from the update stream.
    for (int i = n - 1; i > 0; --i) {
      const long j = rng.uniform_int(0, i);
      std::swap(order[i], order[j]);
    }
    for (int start = 0; start < n && !stats.aborted; start += hp.batch_size) {
      const int bn = std::min(hp.batch_size, n - start);
      batch.assign(order.begin() + start, order.begin() + start + bn);
      const LossTerms terms =
          ppo_loss_grad(params, buffer, advantages, returns, batch, hp, grad, parallel);

      bool finite = std::isfinite(terms.total);
      for (double gj : grad)
        if (!std::isfinite(gj)) {
          finite = false;
          break;
        }
      if (!finite) {
        stats.aborted = true;
        break;
      }

      const double gnorm = clip_grad_norm(grad, hp.max_grad_norm);
      std::vector<double> theta = params.flat();
      opt.step(theta, grad, hp.learning_rate);
      params.set_flat(theta);

      sum_surr += terms.surrogate;
      sum_vloss += terms.value_loss;
      sum_ent += terms.entropy;
      sum_kl += terms.approx_kl;
      sum_gnorm += gnorm;
      ++stats.minibatches;
    }
  }

  if (stats.minibatches > 0) {
    stats.surrogate = sum_surr / stats.minibatches;
    stats.value_loss = sum_vloss / stats.minibatches;
    stats.entropy = sum_ent / stats.minibatches;
    stats.approx_kl = sum_kl / stats.minibatches;
    stats.grad_norm = sum_gnorm / stats.minibatches;
  }
  return stats;
}

TrainResult train(const EnvFactory& make_env, const RlHyperparams& hp,
                  long episode_budget, std::uint64_t seed, bool parallel) {
  validate(hp);
  TrainResult result;
  result.params = PolicyParameters::make(hp.hidden_width, hp.hidden_depth);
  Rng init_rng(derive_seed(seed, 0xA110C));
  result.params.init(init_rng);
  if (episode_budget <= 0) return result;

  AdamState opt;
  opt.resize(result.params.param_count());
  Rng update_rng(derive_seed(seed, 0x0BDA7E));

  struct Slot {
    std::unique_ptr<RolloutEnv> env;
    Rng action_rng;
    Observation obs{};
    bool needs_reset = true;
    double episode_return = 0.0;
    long next_episode = 0;
    std::vector<double> completed;  // per-rollout episode returns
  };
  std::vector<Slot> slots;
  slots.reserve(hp.n_envs);
  for (int s = 0; s < hp.n_envs; ++s) {
    slots.push_back(Slot{make_env(s), Rng(derive_seed(seed, 0x5100 + s)), {}, true,
                         0.0, 0, {}});
  }

  RolloutBuffer buffer;
  buffer.slot_begin.assign(hp.n_envs + 1, 0);
  const int base = hp.steps / hp.n_envs;
  const int rem = hp.steps % hp.n_envs;
  for (int s = 0; s < hp.n_envs; ++s)
    buffer.slot_begin[s + 1] = buffer.slot_begin[s] + base + (s < rem ? 1 : 0);
  const int total = buffer.slot_begin.back();
  buffer.obs.resize(total);
  buffer.action_raw.resize(total);
  buffer.logp.resize(total);
  buffer.reward.resize(total);
  buffer.value.resize(total);
  buffer.done.resize(total);
  buffer.bootstrap_value.assign(hp.n_envs, 0.0);

  double last_mean = 0.0;
  int update = 0;
  while (result.episodes < episode_budget) {
    const PolicyParameters& frozen = result.params;
#pragma omp parallel for schedule(static) if (parallel)
    for (int s = 0; s < hp.n_envs; ++s) {
      Slot& slot = slots[s];
      slot.completed.clear();
      const int b = buffer.slot_begin[s], e = buffer.slot_begin[s + 1];
      for (int i = b; i < e; ++i) {
        if (slot.needs_reset) {
          const std::uint64_t ep_seed =
              derive_seed(seed, 0xE0000 + 1000003ull * s + slot.next_episode);
          slot.obs = slot.env->reset(ep_seed);
          ++slot.next_episode;
          slot.episode_return = 0.0;
          slot.needs_reset = false;
        }
        const PolicyEval ev = policy_forward(frozen, slot.obs);
        ActionSample as;
        for (int j = 0; j < kActDim; ++j) {
          const double sigma = std::exp(ev.log_std[j]);
          as.raw[j] = ev.raw_mean[j] + sigma * slot.action_rng.normal();
          as.squashed[j] = std::tanh(as.raw[j]);
        }
        as.logp = action_log_prob(ev.raw_mean, ev.log_std, as.raw);

        const StepResult sr = slot.env->step(as.squashed);
        buffer.obs[i] = slot.obs;
        buffer.action_raw[i] = as.raw;
        buffer.logp[i] = as.logp;
        buffer.reward[i] = sr.reward;
        buffer.value[i] = ev.value;
        buffer.done[i] = sr.done ? 1 : 0;
        slot.episode_return += sr.reward;
        if (sr.done) {
          slot.completed.push_back(slot.episode_return);
          slot.needs_reset = true;
        } else {
          slot.obs = sr.observation;
        }
      }
      buffer.bootstrap_value[s] =
          slot.needs_reset ? 0.0 : policy_forward(frozen, slot.obs).value;
    }

    long n_completed = 0;
    double sum_returns = 0.0;
    for (const Slot& slot : slots) {
      n_completed += static_cast<long>(slot.completed.size());
      for (double r : slot.completed) sum_returns += r;
    }
    result.episodes += n_completed;
    result.steps += total;
    if (n_completed > 0) last_mean = sum_returns / n_completed;

    const UpdateStats us =
        ppo_update(result.params, buffer, hp, opt, update_rng, parallel);
    ++update;
    result.curve.push_back({update, last_mean, us.surrogate, us.value_loss,
                            us.entropy});
  }
  return result;
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

struct Reader {
  const std::vector<std::uint8_t>& b;
  std::size_t pos = 0;
  std::uint32_t u32() {
    if (pos + 4 > b.size()) throw std::runtime_error("checkpoint: truncated file");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[pos++]) << (8 * i);
    return v;
  }
  double f64() {
    if (pos + 8 > b.size()) throw std::runtime_error("checkpoint: truncated file");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[pos++]) << (8 * i);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
};

constexpr char kMagic[8] = {'U', 'A', 'V', 'R', 'L', 'C', 'K', '1'};

}  // namespace

std::vector<std::uint8_t> save_checkpoint(const PolicyParameters& p) {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), kMagic, kMagic + 8);
  put_u32(out, p.version);
  put_u32(out, static_cast<std::uint32_t>(p.actor.dims().size()));
  for (int d : p.actor.dims()) put_u32(out, static_cast<std::uint32_t>(d));
  put_u32(out, static_cast<std::uint32_t>(p.critic.dims().size()));
  for (int d : p.critic.dims()) put_u32(out, static_cast<std::uint32_t>(d));
  put_u32(out, static_cast<std::uint32_t>(p.log_std.size()));
  for (double v : p.actor.params()) put_f64(out, v);
  for (double v : p.log_std) put_f64(out, v);
  for (double v : p.critic.params()) put_f64(out, v);
  return out;
}

PolicyParameters load_checkpoint(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 8) != 0)
    throw std::runtime_error("checkpoint: bad magic");
  Reader r{bytes, 8};
  PolicyParameters p;
  p.version = r.u32();
  if (p.version != 1) throw std::runtime_error("checkpoint: unsupported version");
  const std::uint32_t na = r.u32();
  if (na < 2 || na > 64) throw std::runtime_error("checkpoint: bad actor shape");
  std::vector<int> adims(na);
  for (auto& d : adims) d = static_cast<int>(r.u32());
  const std::uint32_t nc = r.u32();
  if (nc < 2 || nc > 64) throw std::runtime_error("checkpoint: bad critic shape");
  std::vector<int> cdims(nc);
  for (auto& d : cdims) d = static_cast<int>(r.u32());
  const std::uint32_t nls = r.u32();
  p.actor = Mlp(adims);
  p.critic = Mlp(cdims);
  p.log_std.assign(nls, 0.0);
  for (double& v : p.actor.params()) v = r.f64();
  for (double& v : p.log_std) v = r.f64();
  for (double& v : p.critic.params()) v = r.f64();
  if (r.pos != bytes.size())
    throw std::runtime_error("checkpoint: trailing bytes");
  return p;
}

void save_checkpoint_file(const PolicyParameters& p, const std::string& path) {
  const auto bytes = save_checkpoint(p);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("checkpoint: cannot open " + path + " for write");
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("checkpoint: write failed for " + path);
}

PolicyParameters load_checkpoint_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("checkpoint: cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  return load_checkpoint(bytes);
}

void require_shapes(const PolicyParameters& p, const std::vector<int>& actor_dims,
                    const std::vector<int>& critic_dims) {
  auto check = [](const char* net, const std::vector<int>& got,
                  const std::vector<int>& want) {
    if (got.size() != want.size())
      throw std::runtime_error(std::string("checkpoint: ") + net + " depth mismatch: expected " +
                               std::to_string(want.size() - 1) + " layers, found " +
                               std::to_string(got.size() - 1));
    for (std::size_t l = 0; l + 1 < want.size(); ++l) {
      if (got[l] != want[l] || got[l + 1] != want[l + 1]) {
        throw std::runtime_error(std::string("checkpoint: ") + net + " layer " +
                                 std::to_string(l) + ": expected " +
                                 std::to_string(want[l + 1]) + "x" + std::to_string(want[l]) +
                                 ", found " + std::to_string(got[l + 1]) + "x" +
                                 std::to_string(got[l]));
      }
    }
  };
  check("actor", p.actor.dims(), actor_dims);
  check("critic", p.critic.dims(), critic_dims);
}

}  // namespace uavrl
