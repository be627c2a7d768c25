#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "uavrl/rng.hpp"

namespace uavrl {

/// Dense multilayer perceptron with tanh hidden activations and a linear
/// output layer. Parameters live in one flat buffer (layer-major: W0 row
/// major, b0, W1, b1, ...) so the optimizer and checkpoints can treat the
/// network as a single vector.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<int> dims);

  const std::vector<int>& dims() const { return dims_; }
  int input_dim() const { return dims_.front(); }
  int output_dim() const { return dims_.back(); }
  int layer_count() const { return static_cast<int>(dims_.size()) - 1; }
  int param_count() const { return static_cast<int>(params_.size()); }

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  std::span<double> weights(int layer);
  std::span<const double> weights(int layer) const;
  std::span<double> biases(int layer);
  std::span<const double> biases(int layer) const;

  /// Xavier-uniform init; the output layer is additionally scaled by
  /// output_scale (small values make the initial policy near-zero).
  void init_xavier(Rng& rng, double output_scale = 1.0);

  /// Post-activation values per layer; acts[0] is the input copy.
  struct Cache {
    std::vector<std::vector<double>> acts;
  };

  void forward(std::span<const double> in, std::span<double> out,
               Cache* cache = nullptr) const;

  /// Accumulates dL/dparams for one sample into `grad` (same layout as
  /// params()); optionally also writes dL/dinput.
  void backward(const Cache& cache, std::span<const double> dout,
                std::span<double> grad, std::span<double> din = {}) const;

  /// Row-parallel batched forward. Each output row is computed by exactly
  /// one thread with the same inner-loop order as the serial path, so
  /// parallel and serial results are bit-identical.
  void forward_batch(const double* in, int n, double* out, bool parallel) const;

 private:
  std::vector<int> dims_;
  std::vector<double> params_;
  std::vector<std::size_t> w_off_, b_off_;
};

/// Adam with bias correction over a flat parameter vector.
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long t = 0;
  std::vector<double> m, v;

  void resize(std::size_t n);
  void step(std::span<double> params, std::span<const double> grad, double lr);
};

/// Scales `grad` so its global L2 norm is at most max_norm; returns the
/// pre-clip norm.
double clip_grad_norm(std::span<double> grad, double max_norm);

}  // namespace uavrl
