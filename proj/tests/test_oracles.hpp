// Independent reference computations used by the tests. Everything here is
// deliberately brute force and shares no code path with the library
// implementations it checks.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "penet/bending.hpp"
#include "penet/mlp.hpp"

namespace testing_oracles {

// 1-D strip integration of the bending moment: M = integral over y of
// sigma(kappa*y) * y * w(y), where w(y) is the chord width of the annulus at
// height y. Midpoint strips, independent of the polar-grid implementation.
inline double strip_moment(double kappa,
                           std::span<const penet::AnnularLayer> layers,
                           std::size_t n_strips = 1u << 20) {
  double total = 0.0;
  for (const auto& layer : layers) {
    double ro = layer.r_out;
    double ri = layer.r_in;
    double h = 2.0 * ro / static_cast<double>(n_strips);
    double acc = 0.0;
    for (std::size_t i = 0; i < n_strips; ++i) {
      double y = -ro + (static_cast<double>(i) + 0.5) * h;
      double outer = ro * ro - y * y;
      if (outer <= 0.0) continue;
      double inner = ri * ri - y * y;
      double w = 2.0 * (std::sqrt(outer) - (inner > 0.0 ? std::sqrt(inner) : 0.0));
      acc += layer.material.stress(kappa * y) * y * w;
    }
    total += acc * h;
  }
  return total;
}

// Plastic section modulus of an annulus by the same strip scheme.
inline double strip_plastic_modulus(double ri, double ro,
                                    std::size_t n_strips = 1u << 20) {
  double h = 2.0 * ro / static_cast<double>(n_strips);
  double acc = 0.0;
  for (std::size_t i = 0; i < n_strips; ++i) {
    double y = -ro + (static_cast<double>(i) + 0.5) * h;
    double outer = ro * ro - y * y;
    if (outer <= 0.0) continue;
    double inner = ri * ri - y * y;
    double w = 2.0 * (std::sqrt(outer) - (inner > 0.0 ? std::sqrt(inner) : 0.0));
    acc += std::abs(y) * w;
  }
  return acc * h;
}

// Centroid of the width-scaled two-strip micro-element (material 1 on
// [0, t1] at width 1, material 2 on [-t2, 0] at width lambda2) from the
// junction, by strip sums.
inline double strip_centroid(double t1, double t2, double lambda2,
                             std::size_t n_strips = 200000) {
  double area = 0.0;
  double first = 0.0;
  if (t1 > 0.0) {
    double h = t1 / static_cast<double>(n_strips);
    for (std::size_t i = 0; i < n_strips; ++i) {
      double y = (static_cast<double>(i) + 0.5) * h;
      area += h;
      first += y * h;
    }
  }
  if (t2 > 0.0) {
    double h = t2 / static_cast<double>(n_strips);
    for (std::size_t i = 0; i < n_strips; ++i) {
      double y = -(static_cast<double>(i) + 0.5) * h;
      area += lambda2 * h;
      first += lambda2 * y * h;
    }
  }
  return first / area;
}

// First moment of the micro-element about an axis at `offset` from the
// junction.
inline double strip_first_moment(double t1, double t2, double lambda2,
                                 double offset, std::size_t n_strips = 200000) {
  double acc = 0.0;
  if (t1 > 0.0) {
    double h = t1 / static_cast<double>(n_strips);
    for (std::size_t i = 0; i < n_strips; ++i)
      acc += ((static_cast<double>(i) + 0.5) * h - offset) * h;
  }
  if (t2 > 0.0) {
    double h = t2 / static_cast<double>(n_strips);
    for (std::size_t i = 0; i < n_strips; ++i)
      acc += lambda2 * (-(static_cast<double>(i) + 0.5) * h - offset) * h;
  }
  return acc;
}

// Plain interval-halving root of f on [lo, hi], assuming a sign change.
inline double bisect_root(const std::function<double(double)>& f, double lo,
                          double hi, int iterations = 200) {
  double flo = f(lo);
  for (int i = 0; i < iterations; ++i) {
    double mid = 0.5 * (lo + hi);
    double fmid = f(mid);
    if ((flo <= 0.0) == (fmid <= 0.0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Straight-line re-implementation of the dense forward pass.
inline std::vector<double> naive_forward(const penet::Mlp& mlp,
                                         std::span<const double> x) {
  std::vector<double> a(x.begin(), x.end());
  for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
    std::size_t in = mlp.layer_dims[l];
    std::size_t out = mlp.layer_dims[l + 1];
    std::vector<double> next(out, 0.0);
    for (std::size_t i = 0; i < out; ++i) {
      double z = mlp.layers[l].b[i];
      for (std::size_t j = 0; j < in; ++j) z += mlp.layers[l].W[i * in + j] * a[j];
      next[i] = (l + 1 == mlp.layers.size())
                    ? z
                    : penet::activate(mlp.hidden_activation, z);
    }
    a = next;
  }
  return a;
}

// Mass of N(0,1) on [-d, d] by Simpson quadrature of the density.
inline double normal_interval_mass(double d, std::size_t n = 20000) {
  if (d <= 0.0) return 0.0;
  auto pdf = [](double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  };
  double h = 2.0 * d / static_cast<double>(n);
  double acc = pdf(-d) + pdf(d);
  for (std::size_t i = 1; i < n; ++i)
    acc += pdf(-d + static_cast<double>(i) * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

// Access every trainable parameter of a network for finite differencing.
inline std::vector<double*> parameter_pointers(penet::Mlp& mlp) {
  std::vector<double*> out;
  for (auto& layer : mlp.layers) {
    for (double& w : layer.W) out.push_back(&w);
    for (double& b : layer.b) out.push_back(&b);
  }
  return out;
}

inline std::vector<double> flatten(const penet::Gradients& grads) {
  std::vector<double> out;
  for (const auto& layer : grads.layers) {
    out.insert(out.end(), layer.W.begin(), layer.W.end());
    out.insert(out.end(), layer.b.begin(), layer.b.end());
  }
  return out;
}

// Relative agreement with an absolute floor for near-zero components.
inline bool grad_close(double analytic, double numeric, double rel_tol = 1e-5,
                       double abs_floor = 1e-8) {
  double diff = std::abs(analytic - numeric);
  if (diff <= abs_floor) return true;
  return diff <= rel_tol * std::max(std::abs(analytic), std::abs(numeric));
}

// Independent quartiles: sort + linear interpolation between closest ranks.
struct BoxStats {
  double min, q1, median, q3, max;
};

inline BoxStats recompute_box(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  auto q = [&](double p) {
    double pos = p * static_cast<double>(v.size() - 1);
    auto i = static_cast<std::size_t>(pos);
    double frac = pos - static_cast<double>(i);
    if (i + 1 >= v.size()) return v.back();
    return v[i] + frac * (v[i + 1] - v[i]);
  };
  return {v.front(), q(0.25), q(0.5), q(0.75), v.back()};
}

}  // namespace testing_oracles
