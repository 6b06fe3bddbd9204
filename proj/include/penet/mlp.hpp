// Minimal dense network: affine layers with a configurable hidden activation
// and a linear output, exact reverse-mode gradients (parameters and inputs),
// and bias-corrected Adam. Input gradients are what allow two networks to be
// stacked and trained end to end.
#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "penet/errors.hpp"
#include "penet/rng.hpp"

namespace penet {

enum class Activation { Tanh, Sigmoid, Relu };

inline std::string to_string(Activation a) {
  switch (a) {
    case Activation::Tanh: return "tanh";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Relu: return "relu";
  }
  throw std::invalid_argument("unknown activation");
}

inline Activation activation_from_string(const std::string& s) {
  if (s == "tanh") return Activation::Tanh;
  if (s == "sigmoid") return Activation::Sigmoid;
  if (s == "relu") return Activation::Relu;
  throw std::invalid_argument("unknown activation: " + s);
}

inline double activate(Activation a, double z) {
  switch (a) {
    case Activation::Tanh: return std::tanh(z);
    case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-z));
    case Activation::Relu: return z > 0.0 ? z : 0.0;
  }
  return 0.0;
}

// Derivative as a function of the pre-activation z.
inline double activate_deriv(Activation a, double z) {
  switch (a) {
    case Activation::Tanh: {
      double t = std::tanh(z);
      return 1.0 - t * t;
    }
    case Activation::Sigmoid: {
      double s = 1.0 / (1.0 + std::exp(-z));
      return s * (1.0 - s);
    }
    case Activation::Relu: return z > 0.0 ? 1.0 : 0.0;
  }
  return 0.0;
}

struct Mlp {
  struct Layer {
    std::vector<double> W;  // row-major, out x in
    std::vector<double> b;  // out
  };

  std::vector<std::size_t> layer_dims;  // input, hidden..., output
  Activation hidden_activation = Activation::Tanh;
  std::vector<Layer> layers;

  std::size_t input_dim() const { return layer_dims.front(); }
  std::size_t output_dim() const { return layer_dims.back(); }

  // Glorot-uniform weights, zero biases, deterministic per seed.
  static Mlp init(std::vector<std::size_t> dims,
                  Activation act = Activation::Tanh, std::uint64_t seed = 0) {
    if (dims.size() < 2)
      throw std::invalid_argument("Mlp::init: need at least input and output dims");
    for (std::size_t d : dims)
      if (d == 0) throw std::invalid_argument("Mlp::init: zero layer width");
    Mlp mlp;
    mlp.layer_dims = std::move(dims);
    mlp.hidden_activation = act;
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < mlp.layer_dims.size(); ++l) {
      std::size_t fan_in = mlp.layer_dims[l];
      std::size_t fan_out = mlp.layer_dims[l + 1];
      double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
      Layer layer;
      layer.W.resize(fan_out * fan_in);
      for (double& w : layer.W) w = rng.uniform(-limit, limit);
      layer.b.assign(fan_out, 0.0);
      mlp.layers.push_back(std::move(layer));
    }
    return mlp;
  }

  std::vector<double> forward(std::span<const double> x) const {
    if (x.size() != input_dim())
      throw schema_error("Mlp::forward: input dimension mismatch");
    std::vector<double> a(x.begin(), x.end());
    for (std::size_t l = 0; l < layers.size(); ++l) {
      std::size_t out = layer_dims[l + 1];
      std::size_t in = layer_dims[l];
      std::vector<double> z(out);
      for (std::size_t i = 0; i < out; ++i) {
        double acc = layers[l].b[i];
        const double* w = layers[l].W.data() + i * in;
        for (std::size_t j = 0; j < in; ++j) acc += w[j] * a[j];
        z[i] = (l + 1 == layers.size()) ? acc : activate(hidden_activation, acc);
      }
      a = std::move(z);
    }
    return a;
  }
};

// Per-layer pre-activations and activations captured for the backward pass;
// act[0] is the input, act[l+1] the output of layer l.
struct ForwardCache {
  std::vector<std::vector<double>> pre;
  std::vector<std::vector<double>> act;
};

inline std::vector<double> forward_cached(const Mlp& mlp,
                                          std::span<const double> x,
                                          ForwardCache& cache) {
  if (x.size() != mlp.input_dim())
    throw schema_error("forward_cached: input dimension mismatch");
  cache.pre.assign(mlp.layers.size(), {});
  cache.act.assign(mlp.layers.size() + 1, {});
  cache.act[0].assign(x.begin(), x.end());
  for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
    std::size_t out = mlp.layer_dims[l + 1];
    std::size_t in = mlp.layer_dims[l];
    auto& z = cache.pre[l];
    auto& a = cache.act[l + 1];
    z.resize(out);
    a.resize(out);
    for (std::size_t i = 0; i < out; ++i) {
      double acc = mlp.layers[l].b[i];
      const double* w = mlp.layers[l].W.data() + i * in;
      for (std::size_t j = 0; j < in; ++j) acc += w[j] * cache.act[l][j];
      z[i] = acc;
      a[i] = (l + 1 == mlp.layers.size()) ? acc
                                          : activate(mlp.hidden_activation, acc);
    }
  }
  return cache.act.back();
}

struct Gradients {
  std::vector<Mlp::Layer> layers;

  static Gradients zeros_like(const Mlp& mlp) {
    Gradients g;
    for (const auto& layer : mlp.layers)
      g.layers.push_back({std::vector<double>(layer.W.size(), 0.0),
                          std::vector<double>(layer.b.size(), 0.0)});
    return g;
  }

  void scale(double s) {
    for (auto& layer : layers) {
      for (double& w : layer.W) w *= s;
      for (double& b : layer.b) b *= s;
    }
  }
};

// Reverse-mode gradients of a scalar loss given dL/dy. Accumulates into
// `grads`; when `input_grad` is non-null it receives dL/dx.
inline void backward(const Mlp& mlp, const ForwardCache& cache,
                     std::span<const double> upstream, Gradients& grads,
                     std::vector<double>* input_grad = nullptr) {
  if (upstream.size() != mlp.output_dim())
    throw schema_error("backward: upstream dimension mismatch");
  if (grads.layers.size() != mlp.layers.size())
    throw schema_error("backward: gradient shape mismatch");

  std::vector<double> delta(upstream.begin(), upstream.end());  // dL/dz at layer l
  for (std::size_t l = mlp.layers.size(); l-- > 0;) {
    std::size_t out = mlp.layer_dims[l + 1];
    std::size_t in = mlp.layer_dims[l];
    const auto& a_in = cache.act[l];
    for (std::size_t i = 0; i < out; ++i) {
      grads.layers[l].b[i] += delta[i];
      double* gw = grads.layers[l].W.data() + i * in;
      for (std::size_t j = 0; j < in; ++j) gw[j] += delta[i] * a_in[j];
    }
    std::vector<double> prev(in, 0.0);  // dL/d(act input of layer l)
    for (std::size_t j = 0; j < in; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < out; ++i)
        acc += mlp.layers[l].W[i * in + j] * delta[i];
      prev[j] = acc;
    }
    if (l == 0) {
      if (input_grad) *input_grad = std::move(prev);
      return;
    }
    for (std::size_t j = 0; j < in; ++j)
      prev[j] *= activate_deriv(mlp.hidden_activation, cache.pre[l - 1][j]);
    delta = std::move(prev);
  }
}

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<Mlp::Layer> m;
  std::vector<Mlp::Layer> v;
  long step = 0;
  AdamConfig cfg;

  static AdamState for_mlp(const Mlp& mlp, AdamConfig cfg = {}) {
    AdamState s;
    s.cfg = cfg;
    for (const auto& layer : mlp.layers) {
      s.m.push_back({std::vector<double>(layer.W.size(), 0.0),
                     std::vector<double>(layer.b.size(), 0.0)});
      s.v.push_back({std::vector<double>(layer.W.size(), 0.0),
                     std::vector<double>(layer.b.size(), 0.0)});
    }
    return s;
  }
};

// Bias-corrected Adam update in place.
inline void adam_step(Mlp& mlp, const Gradients& grads, AdamState& state,
                      double lr) {
  if (grads.layers.size() != mlp.layers.size() ||
      state.m.size() != mlp.layers.size())
    throw schema_error("adam_step: shape mismatch");
  for (const auto& layer : grads.layers) {
    for (double g : layer.W)
      if (!std::isfinite(g))
        throw divergence_error("adam_step: non-finite gradient", 0);
    for (double g : layer.b)
      if (!std::isfinite(g))
        throw divergence_error("adam_step: non-finite gradient", 0);
  }
  state.step += 1;
  double c1 = 1.0 - std::pow(state.cfg.beta1, static_cast<double>(state.step));
  double c2 = 1.0 - std::pow(state.cfg.beta2, static_cast<double>(state.step));
  auto update = [&](std::vector<double>& p, const std::vector<double>& g,
                    std::vector<double>& m, std::vector<double>& v) {
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = state.cfg.beta1 * m[k] + (1.0 - state.cfg.beta1) * g[k];
      v[k] = state.cfg.beta2 * v[k] + (1.0 - state.cfg.beta2) * g[k] * g[k];
      double mhat = m[k] / c1;
      double vhat = v[k] / c2;
      p[k] -= lr * mhat / (std::sqrt(vhat) + state.cfg.eps);
    }
  };
  for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
    update(mlp.layers[l].W, grads.layers[l].W, state.m[l].W, state.v[l].W);
    update(mlp.layers[l].b, grads.layers[l].b, state.m[l].b, state.v[l].b);
  }
}

}  // namespace penet
