// Elastic-plastic pure bending of concentric annular layers with linear
// hardening, and the elastic-unloading springback model built on it.
//
// Plane sections: strain at fiber height y is kappa*y. Stress follows the
// bilinear law sigma = E*eps up to the yield strain, then
// sign(eps)*(sigma_y + Et*(|eps| - sigma_y/E)). The bending moment is
// integrated on a polar grid: midpoint cells in the angular direction,
// 2-point Gauss in the radial direction (exact for the cubic elastic
// integrand, so a purely elastic bend recovers M = E*I*kappa to roundoff).
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "penet/errors.hpp"
#include "penet/rng.hpp"
#include "penet/section.hpp"

namespace penet {

struct MaterialSpec {
  double E;        // elastic modulus (MPa)
  double sigma_y;  // yield stress (MPa)
  double Et;       // tangent modulus in the plastic branch (MPa)

  void validate() const {
    if (!(E > 0.0)) throw std::invalid_argument("MaterialSpec: E must be > 0");
    if (!(sigma_y > 0.0))
      throw std::invalid_argument("MaterialSpec: sigma_y must be > 0");
    if (Et < 0.0 || Et >= E)
      throw std::invalid_argument("MaterialSpec: need 0 <= Et < E");
  }

  double yield_strain() const { return sigma_y / E; }

  // Bilinear stress-strain law.
  double stress(double strain) const {
    double a = std::abs(strain);
    double ey = sigma_y / E;
    double s = (a <= ey) ? E * a : sigma_y + Et * (a - ey);
    return strain < 0.0 ? -s : s;
  }
};

// Rotary-draw-bending process factors fed to the predictor and the label
// generator. Optional fields are carried through datasets when configured
// but have no effect on the surrogate.
struct ProcessParams {
  double RB;      // bending-die radius (mm)
  double alphaB;  // bend angle (degrees)
  double vB = 0.0;      // boost velocity (mm/s)
  double omegaB = 0.0;  // processing angular velocity (rad/s)
  std::optional<double> Lp_die;    // initial pressure-die location (mm)
  std::optional<double> gap;      // mold gap (mm)
  std::optional<double> friction;  // friction coefficient

  void validate() const {
    if (!(RB > 0.0)) throw std::invalid_argument("ProcessParams: RB must be > 0");
    if (!(alphaB > 0.0))
      throw std::invalid_argument("ProcessParams: alphaB must be > 0");
    for (const auto& opt : {Lp_die, gap, friction})
      if (opt && *opt < 0.0)
        throw std::invalid_argument("ProcessParams: optional fields must be >= 0");
  }
};

struct AnnularLayer {
  double r_in;
  double r_out;
  MaterialSpec material;
};

struct BendingGrid {
  int radial = 64;    // radial cells per layer
  int angular = 256;  // angular cells over the full circle
};

// Mild deterministic process factor multiplying the pure-bending springback:
// g = 1 + cv*tanh((vB - v_mid)/v_mid) + cw*tanh((omegaB - w_mid)/w_mid).
// Zero coefficients give g == 1.
struct ProcessEffect {
  double v_coeff = 0.02;
  double omega_coeff = 0.01;
  double v_mid = 12.5;
  double omega_mid = 0.6;

  double factor(const ProcessParams& p) const {
    double g = 1.0;
    if (v_coeff != 0.0) g += v_coeff * std::tanh((p.vB - v_mid) / v_mid);
    if (omega_coeff != 0.0)
      g += omega_coeff * std::tanh((p.omegaB - omega_mid) / omega_mid);
    return g;
  }

  static ProcessEffect none() { return {0.0, 0.0, 1.0, 1.0}; }
};

namespace detail {

// Integral of sigma(kappa*rho*s) * rho^2 over [a, b] by 2-point Gauss.
// Within one elastic or plastic branch the integrand is cubic in rho, which
// Gauss-2 integrates exactly.
inline double radial_piece(const MaterialSpec& mat, double kappa, double s,
                           double a, double b) {
  constexpr double kGauss = 0.5773502691896258;  // 1/sqrt(3)
  double mid = 0.5 * (a + b);
  double half = 0.5 * (b - a);
  double acc = 0.0;
  for (double off : {-kGauss * half, kGauss * half}) {
    double rho = mid + off;
    acc += mat.stress(kappa * rho * s) * rho * rho;
  }
  return acc * half;
}

}  // namespace detail

namespace detail {

// Exact radial integral of sigma(kappa*rho*s) * rho^2 over one layer at a
// fixed angle: cells split at the yield radius keep every Gauss piece within
// one cubic branch of the bilinear law.
inline double radial_column(const AnnularLayer& layer, double kappa, double s,
                            int n_radial) {
  const double h = (layer.r_out - layer.r_in) / n_radial;
  const double rho_yield = layer.material.yield_strain() / (kappa * std::abs(s));
  double column = 0.0;
  for (int i = 0; i < n_radial; ++i) {
    double a = layer.r_in + i * h;
    double b = (i + 1 == n_radial) ? layer.r_out : a + h;
    if (rho_yield > a && rho_yield < b) {
      column += radial_piece(layer.material, kappa, s, a, rho_yield);
      column += radial_piece(layer.material, kappa, s, rho_yield, b);
    } else {
      column += radial_piece(layer.material, kappa, s, a, b);
    }
  }
  return column;
}

}  // namespace detail

// Bending moment at curvature kappa, integrated over all layers on a polar
// grid with two Gauss nodes per cell in each direction. Cells are split at
// the material kinks, which are known analytically: radially at the yield
// radius, angularly at the angles where the yield circle crosses a layer
// boundary (the elastic-plastic transition near the neutral axis is a
// boundary layer far narrower than any practical uniform grid).
inline double loading_moment(double kappa, std::span<const AnnularLayer> layers,
                             const BendingGrid& grid = {}) {
  if (kappa < 0.0)
    throw std::invalid_argument("loading_moment: kappa must be >= 0");
  if (grid.radial < 1 || grid.angular < 4)
    throw std::invalid_argument("loading_moment: grid too coarse");
  for (const auto& l : layers) {
    l.material.validate();
    if (!(l.r_in >= 0.0) || !(l.r_out > l.r_in))
      throw geometry_error("loading_moment: layer radii must satisfy 0 <= r_in < r_out");
  }
  // Disjointness of concentric annuli.
  for (std::size_t i = 0; i < layers.size(); ++i)
    for (std::size_t j = i + 1; j < layers.size(); ++j) {
      const auto& a = layers[i];
      const auto& b = layers[j];
      if (a.r_in < b.r_out && b.r_in < a.r_out)
        throw geometry_error("loading_moment: layers overlap");
    }
  if (kappa == 0.0) return 0.0;

  constexpr double kGauss = 0.5773502691896258;  // 1/sqrt(3)
  const double dtheta = 2.0 * std::numbers::pi / grid.angular;
  double total = 0.0;
  for (const auto& layer : layers) {
    // Angles where the yield circle |y| = eps_y/kappa meets the layer radii.
    std::vector<double> breaks;
    breaks.reserve(static_cast<std::size_t>(grid.angular) + 9);
    for (int j = 0; j <= grid.angular; ++j) breaks.push_back(j * dtheta);
    const double eps_y = layer.material.yield_strain();
    for (double radius : {layer.r_out, layer.r_in}) {
      if (radius <= 0.0) continue;
      double sc = eps_y / (kappa * radius);
      if (sc >= 1.0) continue;
      double base = std::asin(sc);
      for (double theta : {base, std::numbers::pi - base, std::numbers::pi + base,
                           2.0 * std::numbers::pi - base})
        breaks.push_back(theta);
    }
    std::sort(breaks.begin(), breaks.end());

    double layer_sum = 0.0;
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
      double a = breaks[k];
      double b = breaks[k + 1];
      double half = 0.5 * (b - a);
      if (!(half > 1e-14)) continue;
      double mid = 0.5 * (a + b);
      for (double off : {-kGauss * half, kGauss * half}) {
        double s = std::sin(mid + off);
        if (s == 0.0) continue;  // sigma(0) = 0 along the neutral axis
        layer_sum += detail::radial_column(layer, kappa, s, grid.radial) * s * half;
      }
    }
    total += layer_sum;
  }
  return total;
}

// Elastic bending stiffness sum(E_k * I_k) over the layers.
inline double elastic_stiffness(std::span<const AnnularLayer> layers) {
  double ei = 0.0;
  for (const auto& l : layers)
    ei += l.material.E * annulus_inertia(l.r_in, l.r_out);
  return ei;
}

// Largest fiber strain magnitude at curvature kappa.
inline double max_fiber_strain(double kappa, std::span<const AnnularLayer> layers) {
  double r_max = 0.0;
  for (const auto& l : layers) r_max = std::max(r_max, l.r_out);
  return kappa * r_max;
}

inline std::array<AnnularLayer, 1> single_tube_layers(double Do, double T,
                                                      const MaterialSpec& mat) {
  if (!(Do > 0.0) || !(T > 0.0) || !(T < Do / 2.0))
    throw geometry_error("single_tube_layers: need 0 < T < Do/2");
  return {AnnularLayer{Do / 2.0 - T, Do / 2.0, mat}};
}

inline std::array<AnnularLayer, 2> bmt_layers(const BmtShape& shape,
                                              const MaterialSpec& outer,
                                              const MaterialSpec& inner,
                                              bool tr_is_inner = false) {
  shape.validate();
  auto [t1, t2] = detail::layer_thicknesses(shape, tr_is_inner);
  double r = shape.Do / 2.0 - t1;
  return {AnnularLayer{r, shape.Do / 2.0, outer},
          AnnularLayer{r - t2, r, inner}};
}

// Springback angle in degrees. Elastic unloading: the recovered curvature is
// delta_kappa = M / sum(E_k I_k), so the pure-bending recovery is
// alphaB * RB * M(1/RB) / sum(E_k I_k). The process factor g and seeded
// Gaussian noise model the residual process influence of the replaced
// simulation pipeline.
inline double springback_angle(std::span<const AnnularLayer> layers,
                               const ProcessParams& process,
                               const BendingGrid& grid = {},
                               const ProcessEffect& effect = ProcessEffect::none(),
                               double noise_sigma = 0.0,
                               std::uint64_t rng_seed = 0) {
  process.validate();
  double kappa = 1.0 / process.RB;
  double moment = loading_moment(kappa, layers, grid);
  double pure = process.alphaB * process.RB * moment / elastic_stiffness(layers);
  double value = pure * effect.factor(process);
  if (noise_sigma > 0.0) value += noise_sigma * Rng(rng_seed).normal();
  return value;
}

}  // namespace penet
