#pragma once

// Half-integer-order modified Bessel functions in the normalization used by
// the separated Dirac equation:
//
//   J_{p,a}(r) = a^{-p} sum_n (a r / 2)^{2n+p} / (n! Gamma(n+p+1)),   J_{p,0}(r) := r^p.
//
// Note that J_{p,0} is *not* the a -> 0 limit of the series, which is
// (r/2)^p / Gamma(p+1). The r^p convention is kept as is.

#include <cmath>
#include <numbers>
#include <sstream>

#include "z2index/errors.hpp"

namespace z2index {

namespace detail {

inline bool is_half_odd(double p) {
  const double twice = 2.0 * p;
  return twice == std::round(twice) && std::fmod(std::abs(twice), 2.0) == 1.0;
}

}  // namespace detail

inline constexpr int kBesselMaxTerms = 10000;
inline constexpr double kBesselRelTol = 1e-16;
inline constexpr double kBesselAbsFloor = 1e-300;

/// Series value of J_{p,a}(r) for half-integer p.
inline double bessel_series(double p, double a, double r) {
  if (!(r > 0.0)) throw DomainError("bessel_series: r must be positive");
  if (!(a >= 0.0)) throw DomainError("bessel_series: a must be nonnegative");
  if (!detail::is_half_odd(p)) throw DomainError("bessel_series: order must be a half-integer");
  if (a == 0.0) return std::pow(r, p);

  // a^{-p} (a r/2)^p = (r/2)^p, so the prefactor is a-independent.
  const double q = 0.25 * (a * r) * (a * r);
  double term = 1.0;
  double sum = 1.0;
  for (int n = 0; n < kBesselMaxTerms; ++n) {
    term *= q / ((n + 1.0) * (n + p + 1.0));
    sum += term;
    if (std::abs(term) < kBesselRelTol * std::abs(sum) || std::abs(term) < kBesselAbsFloor)
      return std::pow(0.5 * r, p) / std::tgamma(p + 1.0) * sum;
  }
  std::ostringstream msg;
  msg << "bessel_series: no convergence within " << kBesselMaxTerms << " terms (p=" << p
      << ", a*r=" << a * r << ")";
  throw NumericError(msg.str());
}

/// d/dr J_{p,a}(r) = a^2 J_{p+1,a}(r) + (p / r) J_{p,a}(r); also exact for a = 0.
inline double bessel_series_derivative(double p, double a, double r) {
  const double base = p / r * bessel_series(p, a, r);
  if (a == 0.0) return base;
  return a * a * bessel_series(p + 1.0, a, r) + base;
}

/// Coefficient of r^p in J_{p,a}(r) as r -> 0.
inline double bessel_series_leading(double p, double a) {
  if (a == 0.0) return 1.0;
  return std::pow(0.5, p) / std::tgamma(p + 1.0);
}

/// K_nu(x) for half-integer nu from the terminating asymptotic expansion
///   K_{n+1/2}(x) = sqrt(pi / (2x)) e^{-x} sum_{j<=n} (n+j)! / (j! (n-j)!) (2x)^{-j}.
inline double bessel_k_half(double nu, double x) {
  if (!(x > 0.0)) throw DomainError("bessel_k_half: x must be positive");
  if (!detail::is_half_odd(nu)) throw DomainError("bessel_k_half: order must be a half-integer");
  const int n = static_cast<int>(std::abs(nu) - 0.5 + 0.25);
  double c = 1.0;
  double sum = 1.0;
  double pw = 1.0;
  for (int j = 0; j < n; ++j) {
    c *= static_cast<double>(n - j) * (n + j + 1.0) / (j + 1.0);
    pw /= 2.0 * x;
    sum += c * pw;
  }
  return std::sqrt(std::numbers::pi / (2.0 * x)) * std::exp(-x) * sum;
}

/// K_nu'(x) = -K_{nu-1}(x) - (nu / x) K_nu(x).
inline double bessel_k_half_derivative(double nu, double x) {
  return -bessel_k_half(nu - 1.0, x) - nu / x * bessel_k_half(nu, x);
}

}  // namespace z2index
