// Minibatch MSE training loop: seeded per-epoch shuffle, short final batch
// kept, learning rate dropped by a fixed factor on a fixed epoch period.
#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "penet/errors.hpp"
#include "penet/mlp.hpp"
#include "penet/rng.hpp"

namespace penet {

struct TrainConfig {
  std::size_t minibatch = 5;
  double initial_lr = 0.005;
  double lr_decay = 0.9;
  std::size_t lr_drop_period = 20;  // epochs between multiplicative drops
  std::size_t epochs = 200;
  std::uint64_t seed = 0;

  void validate() const {
    if (minibatch < 1) throw std::invalid_argument("TrainConfig: minibatch >= 1");
    if (!(initial_lr > 0.0))
      throw std::invalid_argument("TrainConfig: initial_lr > 0");
    if (!(lr_decay > 0.0 && lr_decay <= 1.0))
      throw std::invalid_argument("TrainConfig: lr_decay in (0, 1]");
    if (lr_drop_period < 1)
      throw std::invalid_argument("TrainConfig: lr_drop_period >= 1");
  }

  double lr_at(std::size_t epoch) const {
    return initial_lr *
           std::pow(lr_decay, static_cast<double>(epoch / lr_drop_period));
  }
};

inline double mse(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size())
    throw std::invalid_argument("mse: length mismatch");
  if (pred.empty()) throw std::invalid_argument("mse: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    double d = pred[i] - target[i];
    acc += d * d;
  }
  return acc / static_cast<double>(pred.size());
}

struct FitResult {
  std::vector<double> epoch_mse;  // mean training MSE per epoch
};

// Trains `mlp` in place on (X, Y) with the squared-error loss. Returns the
// per-epoch mean training MSE. Throws divergence_error (carrying the epoch)
// if the loss stops being finite.
inline FitResult fit(Mlp& mlp, const std::vector<std::vector<double>>& X,
                     const std::vector<std::vector<double>>& Y,
                     const TrainConfig& cfg) {
  cfg.validate();
  if (X.empty() || X.size() != Y.size())
    throw std::invalid_argument("fit: need non-empty X and matching Y");
  for (const auto& row : X)
    if (row.size() != mlp.input_dim()) throw schema_error("fit: X width mismatch");
  for (const auto& row : Y)
    if (row.size() != mlp.output_dim()) throw schema_error("fit: Y width mismatch");

  const std::size_t n = X.size();
  const double out_dim = static_cast<double>(mlp.output_dim());
  AdamState state = AdamState::for_mlp(mlp);
  Rng shuffle_rng(derive_seed(cfg.seed, 0x5BF1));
  FitResult result;
  std::vector<std::size_t> order(n);
  ForwardCache cache;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    shuffle_rng.shuffle(order);
    double lr = cfg.lr_at(epoch);
    double epoch_sse = 0.0;

    for (std::size_t start = 0; start < n; start += cfg.minibatch) {
      std::size_t stop = std::min(start + cfg.minibatch, n);
      double batch = static_cast<double>(stop - start);
      Gradients grads = Gradients::zeros_like(mlp);
      for (std::size_t k = start; k < stop; ++k) {
        const auto& x = X[order[k]];
        const auto& t = Y[order[k]];
        auto y = forward_cached(mlp, x, cache);
        std::vector<double> upstream(y.size());
        for (std::size_t c = 0; c < y.size(); ++c) {
          double d = y[c] - t[c];
          upstream[c] = 2.0 * d / (batch * out_dim);
          epoch_sse += d * d / out_dim;
        }
        backward(mlp, cache, upstream, grads);
      }
      adam_step(mlp, grads, state, lr);
    }

    double epoch_mse = epoch_sse / static_cast<double>(n);
    if (!std::isfinite(epoch_mse))
      throw divergence_error("fit: non-finite training loss", epoch);
    result.epoch_mse.push_back(epoch_mse);
  }
  return result;
}

}  // namespace penet
