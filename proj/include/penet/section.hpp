// Transformed-section equivalence for bi-layer tubes.
//
// A two-layer annular cross-section (outer layer = reference material 1,
// inner layer = material 2) is replaced by a single-material tube of
// mid-surface radius R and thickness t0 that preserves the elastic bending
// stiffness E1*IZ0. The inner layer's contribution is scaled by the modulus
// ratio lambda2 = E2/E1; the micro-element centroid offset e fixes R, and t0
// is the positive root of the cubic t0^3 + 4 R^2 t0 - K = 0 obtained by
// equating the equivalent annulus inertia to IZ0.
#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

#include "penet/errors.hpp"

namespace penet {

struct LayeredSection {
  double r;   // junction radius between the layers (mm)
  double t1;  // outer-layer thickness (mm), material 1 (reference)
  double t2;  // inner-layer thickness (mm), material 2
  double E1;  // outer elastic modulus (MPa), the reference modulus
  double E2;  // inner elastic modulus (MPa)

  void validate() const {
    if (!(r > 0.0)) throw std::invalid_argument("LayeredSection: r must be > 0");
    if (t1 < 0.0 || t2 < 0.0)
      throw std::invalid_argument("LayeredSection: layer thicknesses must be >= 0");
    if (!(t1 + t2 > 0.0))
      throw std::invalid_argument("LayeredSection: t1 + t2 must be > 0");
    if (!(t2 < r))
      throw std::invalid_argument("LayeredSection: inner radius r - t2 must be > 0");
    if (!(E1 > 0.0) || !(E2 > 0.0))
      throw std::invalid_argument("LayeredSection: moduli must be > 0");
  }
};

// Bi-layer tube shape as sampled: outer diameter, total wall thickness and
// the outer-layer thickness fraction Tr = t1 / T.
struct BmtShape {
  double Do;  // outer diameter (mm)
  double T;   // total wall thickness (mm)
  double Tr;  // outer-layer thickness fraction, dimensionless

  void validate() const {
    if (!(Do > 0.0)) throw std::invalid_argument("BmtShape: Do must be > 0");
    if (!(T > 0.0 && T < Do / 2.0))
      throw std::invalid_argument("BmtShape: need 0 < T < Do/2");
    if (Tr < 0.0 || Tr > 1.0)
      throw std::invalid_argument("BmtShape: need 0 <= Tr <= 1");
  }
};

// Equivalent single-material tube, mid-surface radius and thickness.
struct EquivalentTube {
  double R;   // mid-surface radius (mm)
  double t0;  // wall thickness (mm)
};

// Equivalent tube in outer-diameter form: Do_eq = 2R + t0, T_eq = t0.
struct SingleShape {
  double Do_eq;
  double T_eq;
};

struct SectionProperties {
  double lambda2;  // E2 / E1
  double IZ0;      // transformed moment of inertia (mm^4)
  double SZ0;      // transformed first moment about the centroidal axis (mm^3)
};

inline double modulus_ratio(double E_i, double E_m) {
  if (!(E_i > 0.0) || !(E_m > 0.0))
    throw std::invalid_argument("modulus_ratio: moduli must be > 0");
  return E_i / E_m;
}

// Centroid offset of the width-scaled two-strip micro-element measured from
// the junction, positive outward. Material 1 strip spans [0, t1] at unit
// width, material 2 spans [-t2, 0] at width lambda2.
inline double centroid_offset(double t1, double t2, double lambda2) {
  double denom = t1 + lambda2 * t2;
  if (!(denom > 0.0))
    throw std::invalid_argument("centroid_offset: t1 + lambda2*t2 must be > 0");
  return (t1 * t1 - lambda2 * t2 * t2) / (2.0 * denom);
}

// Exact annulus moment of inertia about its own axis.
inline double annulus_inertia(double r_in, double r_out) {
  auto p4 = [](double x) { return (x * x) * (x * x); };
  return std::numbers::pi / 4.0 * (p4(r_out) - p4(r_in));
}

// Inertia of the equivalent tube (mid radius R, thickness t0) about its axis.
// Algebraically pi/4 * ((R + t0/2)^4 - (R - t0/2)^4) = pi/4 * R*(t0^3 + 4R^2 t0).
inline double equivalent_tube_inertia(double R, double t0) {
  return std::numbers::pi / 4.0 * R * (t0 * t0 * t0 + 4.0 * R * R * t0);
}

namespace detail {

// Transformed inertia from raw geometry; tolerates empty layers so the
// t1 = t2 = 0 limit evaluates to 0.
inline double composite_inertia_raw(double r, double t1, double t2, double lambda2) {
  if (!(r > 0.0)) throw std::invalid_argument("composite_inertia: r must be > 0");
  if (t1 < 0.0 || t2 < 0.0 || t2 > r)
    throw std::invalid_argument("composite_inertia: invalid layer thicknesses");
  if (!(lambda2 > 0.0))
    throw std::invalid_argument("composite_inertia: lambda2 must be > 0");
  return annulus_inertia(r, r + t1) + lambda2 * annulus_inertia(r - t2, r);
}

// Positive root of g(t) = t^3 + 4 R^2 t = K. g is strictly increasing on
// t > 0, so the root is unique; bisection brackets it and Newton polishes.
inline double solve_equivalent_thickness_raw(double R, double r, double t1,
                                             double t2, double lambda2) {
  if (!(R > 0.0))
    throw std::invalid_argument("solve_equivalent_thickness: R must be > 0");
  auto p4 = [](double x) { return (x * x) * (x * x); };
  double bracket = p4(r + t1) - (1.0 - lambda2) * p4(r) - lambda2 * p4(r - t2);
  double K = bracket / R;
  if (!(K > 0.0))
    throw no_physical_solution(
        "solve_equivalent_thickness: bracket term K <= 0 (no positive root)");

  auto g = [R](double t) { return t * t * t + 4.0 * R * R * t; };
  if (g(2.0 * R) <= K)
    throw geometry_error(
        "solve_equivalent_thickness: root would give t0 >= 2R");

  double hi = std::min(2.0 * R, std::cbrt(K) + K / (4.0 * R * R));
  double lo = 0.0;
  double t = std::min(std::cbrt(K), K / (4.0 * R * R));  // inside the bracket
  for (int iter = 0; iter < 200; ++iter) {
    double val = g(t) - K;
    if (val > 0.0) hi = t; else lo = t;
    double deriv = 3.0 * t * t + 4.0 * R * R;
    double step = val / deriv;
    double next = t - step;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);  // safeguard
    if (std::abs(next - t) <= 1e-16 * t) { t = next; break; }
    t = next;
  }
  if (!(std::abs(g(t) - K) < 1e-10 * K))
    throw std::runtime_error("solve_equivalent_thickness: residual too large");
  return t;
}

// (t1, t2) from a BmtShape; tr_is_inner flips which layer Tr refers to.
inline std::pair<double, double> layer_thicknesses(const BmtShape& s,
                                                   bool tr_is_inner = false) {
  double frac = tr_is_inner ? 1.0 - s.Tr : s.Tr;
  return {frac * s.T, (1.0 - frac) * s.T};
}

}  // namespace detail

inline double composite_inertia(const LayeredSection& s) {
  if (!(s.E1 > 0.0) || !(s.E2 > 0.0))
    throw std::invalid_argument("composite_inertia: moduli must be > 0");
  return detail::composite_inertia_raw(s.r, s.t1, s.t2, s.E2 / s.E1);
}

inline double solve_equivalent_thickness(double R, const LayeredSection& s,
                                         double lambda2) {
  s.validate();
  if (!(lambda2 > 0.0))
    throw std::invalid_argument("solve_equivalent_thickness: lambda2 must be > 0");
  return detail::solve_equivalent_thickness_raw(R, s.r, s.t1, s.t2, lambda2);
}

// Bending stress at fiber distance y from the neutral axis, Eq.-of-state of
// the transformed section: sigma = lambda_i * M * y / IZ0. Tension-positive
// for y > 0 under positive M.
inline double bending_stress(double M, double y, double lambda_i, double IZ0) {
  if (IZ0 == 0.0) throw std::invalid_argument("bending_stress: IZ0 must be nonzero");
  return lambda_i * M * y / IZ0;
}

inline SectionProperties section_properties(const LayeredSection& s) {
  s.validate();
  double lambda2 = s.E2 / s.E1;
  // First moments of concentric annuli about the tube axis vanish by
  // symmetry, so the transformed SZ0 about the centroidal axis is exactly 0.
  return {lambda2, detail::composite_inertia_raw(s.r, s.t1, s.t2, lambda2), 0.0};
}

// The analytic equivalence map: BMT shape -> equivalent single tube
// (mid-radius form). This is the theory target the shape subnet regresses.
inline EquivalentTube equivalent_section(const BmtShape& shape, double lambda2,
                                         bool tr_is_inner = false) {
  shape.validate();
  if (!(lambda2 > 0.0))
    throw std::invalid_argument("equivalent_section: lambda2 must be > 0");
  auto [t1, t2] = detail::layer_thicknesses(shape, tr_is_inner);
  double r = shape.Do / 2.0 - t1;
  if (!(r > 0.0) || !(r - t2 > 0.0))
    throw geometry_error("equivalent_section: layer radii are not positive");
  double e = centroid_offset(t1, t2, lambda2);
  double R = r + e;
  double t0 = detail::solve_equivalent_thickness_raw(R, r, t1, t2, lambda2);
  return {R, t0};
}

inline SingleShape equivalent_tube(const BmtShape& shape, double lambda2,
                                   bool tr_is_inner = false) {
  EquivalentTube eq = equivalent_section(shape, lambda2, tr_is_inner);
  return {2.0 * eq.R + eq.t0, eq.t0};
}

}  // namespace penet
