#pragma once

// Fourier lattices of the link manifold (S^1 for the 3D model, T^2 for the
// 4D model), generalized signs and link Dirac eigensections.

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "z2index/errors.hpp"

namespace z2index {

using cplx = std::complex<double>;

/// A lattice point. Coordinates are stored doubled so that half-integers are
/// exact: l = l2 / 2, m = m2 / 2. For the circle lattice m2 is always 0.
struct Mode {
  int l2 = 0;
  int m2 = 0;

  static constexpr Mode from_halves(int l2, int m2 = 0) { return Mode{l2, m2}; }

  constexpr double l() const { return 0.5 * l2; }
  constexpr double m() const { return 0.5 * m2; }
  constexpr bool is_zero() const { return l2 == 0 && m2 == 0; }

  constexpr Mode operator-() const { return Mode{-l2, -m2}; }
  constexpr Mode operator+(Mode o) const { return Mode{l2 + o.l2, m2 + o.m2}; }
  constexpr Mode operator-(Mode o) const { return Mode{l2 - o.l2, m2 - o.m2}; }

  // lexicographic in (l, m)
  constexpr auto operator<=>(const Mode&) const = default;

  /// Max coordinate magnitude, doubled.
  constexpr int max_abs2() const { return std::max(std::abs(l2), std::abs(m2)); }

  std::int64_t key() const {
    return (static_cast<std::int64_t>(l2) << 32) ^ static_cast<std::uint32_t>(m2);
  }
};

/// How the l = 0 mode of the circle lattice is split. The 4D lattice always
/// uses Separate (the zero modes are exactly ker(D_Sigma)).
enum class ZeroModePolicy { Separate, AssignPlus, AssignMinus };

inline std::string to_string(ZeroModePolicy p) {
  switch (p) {
    case ZeroModePolicy::Separate: return "separate";
    case ZeroModePolicy::AssignPlus: return "assign-plus";
    case ZeroModePolicy::AssignMinus: return "assign-minus";
  }
  return "separate";
}

inline ZeroModePolicy zero_mode_policy_from_string(const std::string& s) {
  if (s == "separate") return ZeroModePolicy::Separate;
  if (s == "assign-plus") return ZeroModePolicy::AssignPlus;
  if (s == "assign-minus") return ZeroModePolicy::AssignMinus;
  throw ConfigError("unknown zero_mode_policy '" + s + "'");
}

/// Fourier lattice Z + offset (per link direction) truncated to |coord| <= cutoff.
struct ModeLattice {
  int dim_link = 1;
  bool half_t = false;
  bool half_s = false;
  int cutoff = 1;
  ZeroModePolicy zero_mode_policy = ZeroModePolicy::Separate;

  /// Validating constructor; offsets must be 0 or 0.5.
  static ModeLattice make(int dim_link, double offset_t, double offset_s, int cutoff,
                          ZeroModePolicy policy = ZeroModePolicy::Separate) {
    if (dim_link != 1 && dim_link != 2)
      throw ConfigError("dim_link must be 1 or 2");
    auto half = [](double off, const char* name) {
      if (off == 0.0) return false;
      if (off == 0.5) return true;
      throw ConfigError(std::string(name) + " must be 0 or 0.5");
    };
    ModeLattice lat;
    lat.dim_link = dim_link;
    lat.half_t = half(offset_t, "offset_t");
    lat.half_s = dim_link == 2 ? half(offset_s, "offset_s") : false;
    if (cutoff < 1) throw ConfigError("cutoff must be >= 1");
    lat.cutoff = cutoff;
    if (dim_link == 2 && policy != ZeroModePolicy::Separate)
      throw ConfigError("the torus lattice requires zero_mode_policy 'separate'");
    lat.zero_mode_policy = policy;
    return lat;
  }

  double offset_t() const { return half_t ? 0.5 : 0.0; }
  double offset_s() const { return half_s ? 0.5 : 0.0; }

  ModeLattice with_cutoff(int n) const {
    ModeLattice c = *this;
    c.cutoff = n;
    return c;
  }

  bool contains_zero_mode() const { return !half_t && !(dim_link == 2 && half_s); }

  /// Parity of the coordinates matches the offsets (ignores the cutoff).
  bool on_lattice(Mode md) const {
    if (std::abs(md.l2 % 2) != (half_t ? 1 : 0)) return false;
    if (dim_link == 1) return md.m2 == 0;
    return std::abs(md.m2 % 2) == (half_s ? 1 : 0);
  }

  bool contains(Mode md, int n) const { return on_lattice(md) && md.max_abs2() <= 2 * n; }
  bool contains(Mode md) const { return contains(md, cutoff); }

  bool operator==(const ModeLattice&) const = default;
};

/// All lattice modes with max(|l|, |m|) <= n, sorted lexicographically by (l, m).
inline std::vector<Mode> enumerate_modes(const ModeLattice& lat, int n) {
  std::vector<Mode> out;
  const int pt = lat.half_t ? 1 : 0;
  const int ps = lat.half_s ? 1 : 0;
  auto first = [n](int parity) {
    int v = -2 * n;
    if (std::abs(v % 2) != parity) ++v;
    return v;
  };
  for (int l2 = first(pt); l2 <= 2 * n; l2 += 2) {
    if (lat.dim_link == 1) {
      out.push_back(Mode{l2, 0});
      continue;
    }
    for (int m2 = first(ps); m2 <= 2 * n; m2 += 2) out.push_back(Mode{l2, m2});
  }
  return out;
}

inline std::vector<Mode> enumerate_modes(const ModeLattice& lat) {
  return enumerate_modes(lat, lat.cutoff);
}

/// Link Dirac eigenvalue a = sqrt(l^2 + m^2).
inline double eigenvalue(Mode md) { return std::hypot(md.l(), md.m()); }

/// sign(l, m) = (l + i m) / sqrt(l^2 + m^2). Zero modes have no sign and must
/// be routed through ker(D_Sigma).
inline cplx generalized_sign(Mode md) {
  if (md.is_zero())
    throw DomainError("generalized_sign: zero mode has no sign (belongs to ker(D_Sigma))");
  const double a = eigenvalue(md);
  return {md.l() / a, md.m() / a};
}

/// Sign used by the splittings; for the circle lattice the zero mode gets +-1
/// under the assign-* policies and no sign otherwise.
inline std::optional<cplx> splitting_sign(const ModeLattice& lat, Mode md) {
  if (!md.is_zero()) return generalized_sign(md);
  if (lat.dim_link == 1) {
    if (lat.zero_mode_policy == ZeroModePolicy::AssignPlus) return cplx{1.0, 0.0};
    if (lat.zero_mode_policy == ZeroModePolicy::AssignMinus) return cplx{-1.0, 0.0};
  }
  return std::nullopt;
}

/// Weights of v_{l,m} relative to the scalar mode e^{ilt}e^{ims}: (1, -i sign).
inline std::array<cplx, 2> dirac_eigensection(Mode md) {
  const cplx s = generalized_sign(md);
  return {cplx{1.0, 0.0}, cplx{0.0, -1.0} * s};
}

/// Complex dimension of ker(D_Sigma) on the torus: the constant sections of
/// S^+ and S^-, present only for the trivial spin structure.
inline int ker_dsigma_dimension(const ModeLattice& lat) {
  if (lat.dim_link != 2)
    throw DomainError("ker_dsigma_dimension: only defined for the torus lattice; "
                      "circle zero modes follow zero_mode_policy");
  return lat.contains_zero_mode() ? 2 : 0;
}

/// Dense position lookup for a fixed, ordered mode list.
class ModeIndex {
 public:
  ModeIndex() = default;
  explicit ModeIndex(std::vector<Mode> modes) : modes_(std::move(modes)) {
    pos_.reserve(modes_.size());
    for (std::size_t i = 0; i < modes_.size(); ++i) pos_.emplace(modes_[i].key(), static_cast<int>(i));
  }

  const std::vector<Mode>& modes() const { return modes_; }
  std::size_t size() const { return modes_.size(); }

  /// -1 when absent.
  int find(Mode md) const {
    auto it = pos_.find(md.key());
    return it == pos_.end() ? -1 : it->second;
  }

 private:
  std::vector<Mode> modes_;
  std::unordered_map<std::int64_t, int> pos_;
};

}  // namespace z2index
