#pragma once

// Separated solutions of the flat Dirac equation near the singular locus.
//
// For angular index k and link eigenvalue a the radial pair U = (U+, U-)
// obeys
//
//   dU/dr = [[(k - 1/2)/r, -a], [-a, -(k + 1/2)/r]] U.
//
// Two independent solutions built from J_{p,a}:
//
//   first  (u+ block):  ( J_{k-1/2},      -a J_{k+1/2} )
//   second (u- block):  ( -a J_{1/2-k},    J_{-1/2-k}  )
//
// and the unique decaying combination ( K_{k-1/2}(a r), K_{k+1/2}(a r) ).

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "z2index/bessel.hpp"
#include "z2index/errors.hpp"
#include "z2index/mode_lattice.hpp"

namespace z2index {

enum class Growth { Growing, Decaying, Polynomial };

inline std::string to_string(Growth g) {
  switch (g) {
    case Growth::Growing: return "growing";
    case Growth::Decaying: return "decaying";
    case Growth::Polynomial: return "polynomial";
  }
  return "growing";
}

enum class Regularity { Neither, L2, L2_1 };

struct RegularityClass {
  Regularity tag = Regularity::Neither;
  double leading_exponent = 0.0;
};

/// dU/dr of the separated equation.
inline std::array<double, 2> radial_rhs(int k, double a, std::array<double, 2> u, double r) {
  if (!(r > 0.0)) throw DomainError("radial_rhs: r must be positive");
  return {(k - 0.5) / r * u[0] - a * u[1], -a * u[0] - (k + 0.5) / r * u[1]};
}

inline std::array<cplx, 2> radial_rhs(int k, double a, std::array<cplx, 2> u, double r) {
  if (!(r > 0.0)) throw DomainError("radial_rhs: r must be positive");
  return {(k - 0.5) / r * u[0] - a * u[1], -a * u[0] - (k + 0.5) / r * u[1]};
}

namespace detail {

// sin((k - 1/2) pi), exactly +-1.
inline double sin_order_pi(int k) { return (k % 2 == 0) ? -1.0 : 1.0; }

// I-basis coefficients of (K_{k-1/2}(ar), K_{k+1/2}(ar)).
inline std::array<double, 2> decaying_direction(int k, double a) {
  const double p = k - 0.5;
  const double c = 0.5 * std::numbers::pi / sin_order_pi(k);
  return {-c * std::pow(a, p), -c * std::pow(a, -p - 1.0)};
}

}  // namespace detail

/// One separated mode: coefficients in the (first, second) solution basis.
/// Decaying modes are evaluated from the closed-form K combination, scaled so
/// that its basis coefficients are (u_plus, u_minus).
struct RadialMode {
  int k = 0;
  double a = 0.0;
  cplx u_plus{1.0, 0.0};
  cplx u_minus{0.0, 0.0};
  Growth growth = Growth::Polynomial;

  /// Multiplier of (K_{k-1/2}, K_{k+1/2}) for decaying modes.
  cplx decay_scale() const {
    const auto dir = detail::decaying_direction(k, a);
    return u_plus / dir[0];
  }

  /// (U+, U-)(r).
  std::array<cplx, 2> operator()(double r) const {
    if (!(r > 0.0)) throw DomainError("RadialMode: r must be positive");
    if (growth == Growth::Decaying) {
      const cplx s = decay_scale();
      return {s * bessel_k_half(k - 0.5, a * r), s * bessel_k_half(k + 0.5, a * r)};
    }
    std::array<cplx, 2> out{u_plus * bessel_series(k - 0.5, a, r), cplx{}};
    out[1] = u_minus * bessel_series(-0.5 - k, a, r);
    if (a != 0.0) {
      out[0] -= a * u_minus * bessel_series(0.5 - k, a, r);
      out[1] -= a * u_plus * bessel_series(k + 0.5, a, r);
    }
    return out;
  }

  /// d/dr (U+, U-)(r) from the Bessel recurrences (independent of radial_rhs).
  std::array<cplx, 2> derivative(double r) const {
    if (!(r > 0.0)) throw DomainError("RadialMode: r must be positive");
    if (growth == Growth::Decaying) {
      const cplx s = decay_scale();
      return {s * a * bessel_k_half_derivative(k - 0.5, a * r),
              s * a * bessel_k_half_derivative(k + 0.5, a * r)};
    }
    std::array<cplx, 2> out{u_plus * bessel_series_derivative(k - 0.5, a, r), cplx{}};
    out[1] = u_minus * bessel_series_derivative(-0.5 - k, a, r);
    if (a != 0.0) {
      out[0] -= a * u_minus * bessel_series_derivative(0.5 - k, a, r);
      out[1] -= a * u_plus * bessel_series_derivative(k + 0.5, a, r);
    }
    return out;
  }
};

inline void check_radial_args(int /*k*/, double a) {
  if (!(a >= 0.0) || !std::isfinite(a)) throw DomainError("radial mode: a must be a finite nonnegative value");
}

/// Combination u+ * first + u- * second; tagged decaying when (u+, u-) is
/// proportional to the decaying direction.
inline RadialMode assemble_solution(int k, double a, cplx u_plus, cplx u_minus) {
  check_radial_args(k, a);
  if (u_plus == cplx{} && u_minus == cplx{})
    throw DomainError("assemble_solution: coefficients (u+, u-) must not both vanish");
  RadialMode md{k, a, u_plus, u_minus, Growth::Polynomial};
  if (a == 0.0) return md;
  const auto dir = detail::decaying_direction(k, a);
  const double cross = std::abs(u_plus * dir[1] - u_minus * dir[0]);
  const double scale = std::abs(u_plus) * std::abs(dir[1]) + std::abs(u_minus) * std::abs(dir[0]);
  md.growth = cross <= 1e-12 * scale ? Growth::Decaying : Growth::Growing;
  return md;
}

/// scale * (K_{k-1/2}(a r), K_{k+1/2}(a r)); requires a > 0.
inline RadialMode decaying_solution(int k, double a, cplx scale = 1.0) {
  check_radial_args(k, a);
  if (a == 0.0) throw DomainError("decaying_solution: a must be positive");
  const auto dir = detail::decaying_direction(k, a);
  return RadialMode{k, a, scale * dir[0], scale * dir[1], Growth::Decaying};
}

/// Power of r of the dominant small-r term.
inline double leading_exponent(const RadialMode& md) {
  if (md.growth == Growth::Decaying) return -(std::abs(md.k) + 0.5);
  double e = INFINITY;
  const bool first = md.u_plus != cplx{};
  const bool second = md.u_minus != cplx{};
  if (first) e = std::min(e, md.k - 0.5);
  if (second) e = std::min(e, -0.5 - md.k);
  if (md.a != 0.0) {
    if (first) e = std::min(e, md.k + 0.5);
    if (second) e = std::min(e, 0.5 - md.k);
  }
  return e;
}

inline RegularityClass classify_regularity(const RadialMode& md) {
  const double e = leading_exponent(md);
  Regularity tag = Regularity::Neither;
  if (e >= 0.5) tag = Regularity::L2_1;
  else if (e >= -0.5) tag = Regularity::L2;
  return {tag, e};
}

/// Coefficients of r^{-1/2} in (U+, U-): the boundary trace read by B. Only
/// defined for L^2 modes; it vanishes unless k = 0.
inline std::array<cplx, 2> radial_trace(const RadialMode& md) {
  if (classify_regularity(md).tag == Regularity::Neither)
    throw DomainError("radial_trace: mode is not L^2 near r = 0");
  if (md.k != 0) return {cplx{}, cplx{}};
  if (md.growth == Growth::Decaying) {
    const cplx c = md.decay_scale() * std::sqrt(std::numbers::pi / (2.0 * md.a));
    return {c, c};
  }
  const double kappa = bessel_series_leading(-0.5, md.a);
  return {md.u_plus * kappa, md.u_minus * kappa};
}

/// Boundary coefficient pair of the exponentially decaying model solution at
/// a nonzero link mode, normalized to first component 1: (1, +i sign(l, m)).
inline std::array<cplx, 2> decaying_trace(Mode md) {
  const cplx s = generalized_sign(md);
  return {cplx{1.0, 0.0}, cplx{0.0, 1.0} * s};
}

}  // namespace z2index
