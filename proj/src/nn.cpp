#include "uavrl/nn.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace uavrl {

Mlp::Mlp(std::vector<int> dims) : dims_(std::move(dims)) {
  if (dims_.size() < 2) throw std::invalid_argument("Mlp: need at least two dims");
  for (int d : dims_)
    if (d <= 0) throw std::invalid_argument("Mlp: dims must be positive");
  std::size_t total = 0;
  for (int l = 0; l + 1 < static_cast<int>(dims_.size()); ++l) {
    w_off_.push_back(total);
    total += static_cast<std::size_t>(dims_[l + 1]) * dims_[l];
    b_off_.push_back(total);
    total += dims_[l + 1];
  }
  params_.assign(total, 0.0);
}

std::span<double> Mlp::weights(int layer) {
  return {params_.data() + w_off_[layer],
          static_cast<std::size_t>(dims_[layer + 1]) * dims_[layer]};
}
std::span<const double> Mlp::weights(int layer) const {
  return {params_.data() + w_off_[layer],
          static_cast<std::size_t>(dims_[layer + 1]) * dims_[layer]};
}
std::span<double> Mlp::biases(int layer) {
  return {params_.data() + b_off_[layer], static_cast<std::size_t>(dims_[layer + 1])};
}
std::span<const double> Mlp::biases(int layer) const {
  return {params_.data() + b_off_[layer], static_cast<std::size_t>(dims_[layer + 1])};
}

void Mlp::init_xavier(Rng& rng, double output_scale) {
  for (int l = 0; l < layer_count(); ++l) {
    const double bound = std::sqrt(6.0 / (dims_[l] + dims_[l + 1]));
    const double scale = (l == layer_count() - 1) ? output_scale : 1.0;
    for (double& w : weights(l)) w = scale * rng.uniform(-bound, bound);
    for (double& b : biases(l)) b = 0.0;
  }
}

void Mlp::forward(std::span<const double> in, std::span<double> out,
                  Cache* cache) const {
  if (static_cast<int>(in.size()) != input_dim() ||
      static_cast<int>(out.size()) != output_dim())
    throw std::logic_error("Mlp::forward: shape mismatch");
  if (cache != nullptr) {
    cache->acts.resize(dims_.size());
    cache->acts[0].assign(in.begin(), in.end());
  }
  std::vector<double> cur(in.begin(), in.end());
  std::vector<double> next;
  for (int l = 0; l < layer_count(); ++l) {
    const int nin = dims_[l], nout = dims_[l + 1];
    const double* w = params_.data() + w_off_[l];
    const double* b = params_.data() + b_off_[l];
    next.assign(nout, 0.0);
    for (int o = 0; o < nout; ++o) {
      double acc = b[o];
      const double* wr = w + static_cast<std::size_t>(o) * nin;
      for (int i = 0; i < nin; ++i) acc += wr[i] * cur[i];
      next[o] = (l == layer_count() - 1) ? acc : std::tanh(acc);
    }
    cur.swap(next);
    if (cache != nullptr) cache->acts[l + 1] = cur;
  }
  std::memcpy(out.data(), cur.data(), sizeof(double) * cur.size());
}

void Mlp::backward(const Cache& cache, std::span<const double> dout,
                   std::span<double> grad, std::span<double> din) const {
  if (cache.acts.size() != dims_.size())
    throw std::logic_error("Mlp::backward: cache does not match network");
  if (static_cast<int>(dout.size()) != output_dim() ||
      static_cast<int>(grad.size()) != param_count())
    throw std::logic_error("Mlp::backward: shape mismatch");

  std::vector<double> delta(dout.begin(), dout.end());
  std::vector<double> prev;
  for (int l = layer_count() - 1; l >= 0; --l) {
    const int nin = dims_[l], nout = dims_[l + 1];
    const double* w = params_.data() + w_off_[l];
    const std::vector<double>& act_in = cache.acts[l];
    double* gw = grad.data() + w_off_[l];
    double* gb = grad.data() + b_off_[l];
    prev.assign(nin, 0.0);
    for (int o = 0; o < nout; ++o) {
      const double d = delta[o];
      gb[o] += d;
      double* gwr = gw + static_cast<std::size_t>(o) * nin;
      const double* wr = w + static_cast<std::size_t>(o) * nin;
      for (int i = 0; i < nin; ++i) {
        gwr[i] += d * act_in[i];
        prev[i] += d * wr[i];
      }
    }
    if (l > 0) {
      // act_in holds tanh outputs of layer l-1.
      for (int i = 0; i < nin; ++i) prev[i] *= 1.0 - act_in[i] * act_in[i];
    }
    delta.swap(prev);
  }
  if (!din.empty()) {
    if (static_cast<int>(din.size()) != input_dim())
      throw std::logic_error("Mlp::backward: din shape mismatch");
    std::memcpy(din.data(), delta.data(), sizeof(double) * delta.size());
  }
}

void Mlp::forward_batch(const double* in, int n, double* out, bool parallel) const {
  const int din = input_dim(), dout = output_dim();
#pragma omp parallel for schedule(static) if (parallel)
  for (int r = 0; r < n; ++r) {
    forward(std::span<const double>(in + static_cast<std::size_t>(r) * din, din),
            std::span<double>(out + static_cast<std::size_t>(r) * dout, dout));
  }
}

void AdamState::resize(std::size_t n) {
  m.assign(n, 0.0);
  v.assign(n, 0.0);
  t = 0;
}

void AdamState::step(std::span<double> params, std::span<const double> grad,
                     double lr) {
  if (params.size() != m.size() || grad.size() != m.size())
    throw std::logic_error("AdamState::step: size mismatch");
  ++t;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
    params[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
  }
}

double clip_grad_norm(std::span<double> grad, double max_norm) {
  double sq = 0.0;
  for (double g : grad) sq += g * g;
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (double& g : grad) g *= scale;
  }
  return norm;
}

}  // namespace uavrl
