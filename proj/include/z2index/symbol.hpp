#pragma once

// Trigonometric-polynomial symbols (d+, d-) on the link, grid evaluation, the
// nondegeneracy check and a seeded random generator.

#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <vector>

#include "z2index/errors.hpp"
#include "z2index/mode_lattice.hpp"

namespace z2index {

/// Finite Fourier sum over integer modes (Mode with even doubled coordinates).
struct TrigPoly {
  int dim_link = 1;
  std::map<Mode, cplx> coeffs;

  static TrigPoly constant(int dim_link, cplx c) {
    TrigPoly p{dim_link, {}};
    p.coeffs[Mode{}] = c;
    return p;
  }

  void set(int l, int m, cplx c) {
    if (dim_link == 1 && m != 0) throw DomainError("TrigPoly: circle symbol with m != 0");
    coeffs[Mode{2 * l, 2 * m}] = c;
  }

  cplx at(Mode md) const {
    auto it = coeffs.find(md);
    return it == coeffs.end() ? cplx{} : it->second;
  }

  /// max(|l|, |m|) over nonzero coefficients.
  int bandwidth() const {
    int w = 0;
    for (const auto& [md, c] : coeffs)
      if (c != cplx{}) w = std::max(w, md.max_abs2() / 2);
    return w;
  }

  cplx operator()(double t, double s = 0.0) const {
    cplx v{};
    for (const auto& [md, c] : coeffs) v += c * std::polar(1.0, md.l() * t + md.m() * s);
    return v;
  }

  /// Pointwise complex conjugate: coefficient at -k is conj(c_k).
  TrigPoly conjugate() const {
    TrigPoly p{dim_link, {}};
    for (const auto& [md, c] : coeffs) p.coeffs[-md] = std::conj(c);
    return p;
  }

  void validate() const {
    if (dim_link != 1 && dim_link != 2) throw ConfigError("TrigPoly: dim_link must be 1 or 2");
    for (const auto& [md, c] : coeffs) {
      if (md.l2 % 2 != 0 || md.m2 % 2 != 0) throw DomainError("TrigPoly: symbol modes must be integers");
      if (dim_link == 1 && md.m2 != 0) throw DomainError("TrigPoly: circle symbol with m != 0");
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
        throw DomainError("TrigPoly: non-finite coefficient");
    }
  }
};

struct SymbolData {
  TrigPoly d_plus;
  TrigPoly d_minus;

  int dim_link() const { return d_plus.dim_link; }
  int bandwidth() const { return std::max(d_plus.bandwidth(), d_minus.bandwidth()); }

  void validate() const {
    d_plus.validate();
    d_minus.validate();
    if (d_plus.dim_link != d_minus.dim_link) throw DomainError("SymbolData: d+ and d- live on different links");
  }
};

inline constexpr int kNondegeneracyGrid = 1024;

/// Values on the uniform grid t_j = 2 pi j / n (and s_k likewise), row-major
/// in (t, s). Half-integer modes are allowed; they are evaluated on [0, 2 pi).
inline std::vector<cplx> evaluate_on_grid(int dim_link, const std::map<Mode, cplx>& coeffs, int n) {
  const double h = 2.0 * std::numbers::pi / n;
  if (dim_link == 1) {
    std::vector<cplx> out(n);
    for (int j = 0; j < n; ++j) {
      cplx v{};
      for (const auto& [md, c] : coeffs) v += c * std::polar(1.0, md.l() * h * j);
      out[j] = v;
    }
    return out;
  }
  // separable: g_l(s) = sum_m c_lm e^{ims}, then sum_l e^{ilt} g_l(s)
  std::map<int, std::vector<cplx>> rows;
  for (const auto& [md, c] : coeffs) {
    auto& g = rows[md.l2];
    if (g.empty()) g.assign(n, cplx{});
    for (int k = 0; k < n; ++k) g[k] += c * std::polar(1.0, md.m() * h * k);
  }
  std::vector<cplx> out(static_cast<std::size_t>(n) * n);
  for (const auto& [l2, g] : rows) {
    for (int j = 0; j < n; ++j) {
      const cplx e = std::polar(1.0, 0.5 * l2 * h * j);
      cplx* row = out.data() + static_cast<std::size_t>(j) * n;
      for (int k = 0; k < n; ++k) row[k] += e * g[k];
    }
  }
  return out;
}

inline std::vector<cplx> evaluate_on_grid(const TrigPoly& p, int n) {
  return evaluate_on_grid(p.dim_link, p.coeffs, n);
}

struct NondegeneracyResult {
  bool ok = true;
  double min_value = 0.0;  // min of |d+|^2 + |d-|^2 on the grid
  double t = 0.0;
  double s = 0.0;
};

inline constexpr double kNondegeneracyRelFloor = 1e-12;

/// Default floor: 1e-12 (sum of |coefficients|)^2, the scale below which a
/// grid value is indistinguishable from an exact zero of the symbol.
inline double default_nondegeneracy_floor(const SymbolData& sym) {
  double l1 = 0.0;
  for (const auto& [md, c] : sym.d_plus.coeffs) l1 += std::abs(c);
  for (const auto& [md, c] : sym.d_minus.coeffs) l1 += std::abs(c);
  return kNondegeneracyRelFloor * l1 * l1;
}

/// Grid minimum of |d+|^2 + |d-|^2; ok iff it exceeds floor (negative: default).
inline NondegeneracyResult check_nondegeneracy(const SymbolData& sym, double floor = -1.0,
                                               int n = kNondegeneracyGrid) {
  sym.validate();
  if (floor < 0.0) floor = default_nondegeneracy_floor(sym);
  const auto dp = evaluate_on_grid(sym.d_plus, n);
  const auto dm = evaluate_on_grid(sym.d_minus, n);
  NondegeneracyResult r;
  r.min_value = INFINITY;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < dp.size(); ++i) {
    const double v = std::norm(dp[i]) + std::norm(dm[i]);
    if (v < r.min_value) {
      r.min_value = v;
      arg = i;
    }
  }
  const double h = 2.0 * std::numbers::pi / n;
  if (sym.dim_link() == 1) {
    r.t = h * static_cast<double>(arg);
  } else {
    r.t = h * static_cast<double>(arg / n);
    r.s = h * static_cast<double>(arg % n);
  }
  r.ok = r.min_value > floor;
  return r;
}

/// Throws DomainError naming the failing sample point.
inline void require_nondegenerate(const SymbolData& sym, double floor = -1.0) {
  const auto r = check_nondegeneracy(sym, floor);
  if (r.ok) return;
  std::ostringstream msg;
  msg << "symbol violates nondegeneracy: |d+|^2 + |d-|^2 = " << r.min_value << " at t=" << r.t;
  if (sym.dim_link() == 2) msg << ", s=" << r.s;
  throw DomainError(msg.str());
}

/// Winding number of p around 0 along t in [0, 2 pi) on an n-point grid;
/// empty when p comes within floor of 0 on the grid. Circle symbols only.
inline std::optional<int> winding_number(const TrigPoly& p, double floor = 1e-6, int n = kNondegeneracyGrid) {
  p.validate();
  if (p.dim_link != 1) throw DomainError("winding_number: defined for circle symbols only");
  const auto v = evaluate_on_grid(p, n);
  double turn = 0.0;
  for (int j = 0; j < n; ++j) {
    if (std::abs(v[j]) <= floor) return std::nullopt;
    turn += std::arg(v[(j + 1) % n] / v[j]);
  }
  return static_cast<int>(std::lround(turn / (2.0 * std::numbers::pi)));
}

/// Uniform sample of the closed complex unit disc.
inline cplx random_unit_disc(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double rad = std::sqrt(u(rng));
  const double ang = 2.0 * std::numbers::pi * u(rng);
  return std::polar(rad, ang);
}

/// Every mode of bandwidth <= W gets a unit-disc coefficient.
inline TrigPoly random_trig_poly(int dim_link, int W, std::mt19937_64& rng) {
  TrigPoly p{dim_link, {}};
  for (int l = -W; l <= W; ++l) {
    if (dim_link == 1) {
      p.set(l, 0, random_unit_disc(rng));
      continue;
    }
    for (int m = -W; m <= W; ++m) p.set(l, m, random_unit_disc(rng));
  }
  return p;
}

inline constexpr double kRandomSymbolFloor = 1e-2;

/// Random nondegenerate symbol, rejection-sampled until the grid minimum of
/// |d+|^2 + |d-|^2 exceeds floor.
inline SymbolData random_symbol(int dim_link, int W, std::mt19937_64& rng, double floor = kRandomSymbolFloor,
                                int max_attempts = 1000) {
  for (int i = 0; i < max_attempts; ++i) {
    SymbolData sym{random_trig_poly(dim_link, W, rng), random_trig_poly(dim_link, W, rng)};
    if (check_nondegeneracy(sym, floor).ok) return sym;
  }
  throw NumericError("random_symbol: no nondegenerate sample within the attempt budget");
}

}  // namespace z2index
