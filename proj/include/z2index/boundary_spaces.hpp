#pragma once

// Truncated fields on the link, the Hardy-type splittings Exp^+-, Eexp^+- and
// ker(D_Sigma), the Clifford action e_0, the boundary pairings, and a
// quadrature check of Green's formula on separated mode solutions.
//
// Inner products are normalized coefficient sums, i.e. integrals over the
// link divided by its volume (2 pi per circle factor).

#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "z2index/errors.hpp"
#include "z2index/mode_lattice.hpp"
#include "z2index/quadrature.hpp"
#include "z2index/radial_modes.hpp"

namespace z2index {

using Spinor = std::array<cplx, 2>;

/// Subspaces of L^2(link; C^2). Full is the whole space (basis c1, c2 per mode).
enum class SubspaceTag { ExpPlus, ExpMinus, EexpPlus, EexpMinus, KerDSigma, ExpPlusZero, EexpMinusZero, Full };

inline std::string to_string(SubspaceTag t) {
  switch (t) {
    case SubspaceTag::ExpPlus: return "ExpPlus";
    case SubspaceTag::ExpMinus: return "ExpMinus";
    case SubspaceTag::EexpPlus: return "EexpPlus";
    case SubspaceTag::EexpMinus: return "EexpMinus";
    case SubspaceTag::KerDSigma: return "KerDSigma";
    case SubspaceTag::ExpPlusZero: return "ExpPlusZero";
    case SubspaceTag::EexpMinusZero: return "EexpMinusZero";
    case SubspaceTag::Full: return "Full";
  }
  return "Full";
}

inline SubspaceTag subspace_tag_from_string(const std::string& s) {
  for (auto t : {SubspaceTag::ExpPlus, SubspaceTag::ExpMinus, SubspaceTag::EexpPlus, SubspaceTag::EexpMinus,
                 SubspaceTag::KerDSigma, SubspaceTag::ExpPlusZero, SubspaceTag::EexpMinusZero, SubspaceTag::Full})
    if (to_string(t) == s) return t;
  throw ConfigError("unknown subspace tag '" + s + "'");
}

inline bool tag_includes_zero_modes(SubspaceTag t) {
  return t == SubspaceTag::KerDSigma || t == SubspaceTag::ExpPlusZero || t == SubspaceTag::EexpMinusZero ||
         t == SubspaceTag::Full;
}

/// Zero modes are split off as ker(D_Sigma) (lattice has them and they are not
/// assigned a sign by the circle policy).
inline bool has_separate_zero_mode(const ModeLattice& lat) {
  return lat.contains_zero_mode() && !splitting_sign(lat, Mode{}).has_value();
}

inline void check_tag(const ModeLattice& lat, SubspaceTag t) {
  if (t == SubspaceTag::Full) return;
  if ((t == SubspaceTag::KerDSigma || t == SubspaceTag::ExpPlusZero || t == SubspaceTag::EexpMinusZero) &&
      !has_separate_zero_mode(lat))
    throw DomainError("subspace " + to_string(t) + " requires a lattice with a separated zero mode");
}

/// Second-component weight w of the pattern (1, w) spanning the tag's slice at
/// a mode with sign s. Exp^+- : -+i s.  Eexp^+- : +-i conj(s).
inline cplx pattern_weight(SubspaceTag t, cplx s) {
  const cplx i{0.0, 1.0};
  switch (t) {
    case SubspaceTag::ExpPlus:
    case SubspaceTag::ExpPlusZero: return -i * s;
    case SubspaceTag::ExpMinus: return i * s;
    case SubspaceTag::EexpPlus: return i * std::conj(s);
    case SubspaceTag::EexpMinus:
    case SubspaceTag::EexpMinusZero: return -i * std::conj(s);
    default: break;
  }
  throw DomainError("pattern_weight: tag " + to_string(t) + " has no rank-1 pattern");
}

/// Element of L^2(link; C^2) truncated to the lattice cutoff. Absent modes are zero.
class BoundaryField {
 public:
  explicit BoundaryField(ModeLattice lattice) : lattice_(lattice) {}

  const ModeLattice& lattice() const { return lattice_; }
  const std::map<Mode, Spinor>& coefficients() const { return coeffs_; }

  void set(Mode md, Spinor c) {
    if (!lattice_.contains(md))
      throw DomainError("BoundaryField: mode (" + std::to_string(md.l()) + ", " + std::to_string(md.m()) +
                        ") is not in the lattice");
    coeffs_[md] = c;
  }

  void add(Mode md, Spinor c) {
    Spinor cur = at(md);
    set(md, {cur[0] + c[0], cur[1] + c[1]});
  }

  Spinor at(Mode md) const {
    auto it = coeffs_.find(md);
    return it == coeffs_.end() ? Spinor{} : it->second;
  }

  bool operator==(const BoundaryField& o) const {
    if (!(lattice_ == o.lattice_)) return false;
    auto covered = [](const BoundaryField& a, const BoundaryField& b) {
      for (const auto& [md, c] : a.coeffs_)
        if (b.at(md) != c) return false;
      return true;
    };
    return covered(*this, o) && covered(o, *this);
  }

  BoundaryField& operator+=(const BoundaryField& o) {
    require_same(o);
    for (const auto& [md, c] : o.coeffs_) add(md, c);
    return *this;
  }

  friend BoundaryField operator+(BoundaryField a, const BoundaryField& b) { return a += b; }

  friend BoundaryField operator*(cplx z, BoundaryField f) {
    for (auto& [md, c] : f.coeffs_) c = {z * c[0], z * c[1]};
    return f;
  }

  /// Squared Hermitian norm.
  double norm2() const {
    double s = 0.0;
    for (const auto& [md, c] : coeffs_) s += std::norm(c[0]) + std::norm(c[1]);
    return s;
  }

  void require_same(const BoundaryField& o) const {
    if (!(lattice_ == o.lattice_)) throw DomainError("BoundaryField: lattice mismatch");
  }

 private:
  ModeLattice lattice_;
  std::map<Mode, Spinor> coeffs_;
};

namespace detail {

// Orthogonal projection of x onto span(1, w), |w| = 1. Pairs already on the
// pattern (or on its complement (1, -w)) are returned bit-exactly, which makes
// the projection exactly idempotent.
inline Spinor project_rank1(const Spinor& x, cplx w) {
  if (x[1] == w * x[0]) return x;
  if (x[1] == -w * x[0]) return {};
  const cplx alpha = 0.5 * (x[0] + std::conj(w) * x[1]);
  return {alpha, w * alpha};
}

}  // namespace detail

/// Orthogonal projection onto a tagged subspace.
inline BoundaryField project(const BoundaryField& f, SubspaceTag tag) {
  const ModeLattice& lat = f.lattice();
  check_tag(lat, tag);
  BoundaryField out(lat);
  for (const auto& [md, x] : f.coefficients()) {
    const auto s = splitting_sign(lat, md);
    if (!s) {
      if (tag_includes_zero_modes(tag)) out.set(md, x);
      continue;
    }
    if (tag == SubspaceTag::Full) {
      out.set(md, x);
    } else if (tag != SubspaceTag::KerDSigma) {
      const Spinor p = detail::project_rank1(x, pattern_weight(tag, *s));
      if (p != Spinor{}) out.set(md, p);
    }
  }
  return out;
}

/// Coordinates of a field in the (Exp^+, Exp^-, ker) basis: per signed mode the
/// coefficients (p+, p-) of (1, -i s) and (1, i s); zero modes keep (c1, c2).
struct ExpCoordinates {
  std::map<Mode, std::array<cplx, 2>> signed_modes;
  std::map<Mode, Spinor> zero_modes;
};

inline ExpCoordinates exp_coordinates(const BoundaryField& f) {
  ExpCoordinates ec;
  for (const auto& [md, x] : f.coefficients()) {
    const auto s = splitting_sign(f.lattice(), md);
    if (!s) {
      ec.zero_modes[md] = x;
      continue;
    }
    const cplx wp = pattern_weight(SubspaceTag::ExpPlus, *s);
    const cplx wm = pattern_weight(SubspaceTag::ExpMinus, *s);
    ec.signed_modes[md] = {0.5 * (x[0] + std::conj(wp) * x[1]), 0.5 * (x[0] + std::conj(wm) * x[1])};
  }
  return ec;
}

inline BoundaryField from_exp_coordinates(const ModeLattice& lat, const ExpCoordinates& ec) {
  BoundaryField f(lat);
  for (const auto& [md, p] : ec.signed_modes) {
    const cplx s = *splitting_sign(lat, md);
    const cplx wp = pattern_weight(SubspaceTag::ExpPlus, s);
    const cplx wm = pattern_weight(SubspaceTag::ExpMinus, s);
    f.set(md, {p[0] + p[1], wp * p[0] + wm * p[1]});
  }
  for (const auto& [md, c] : ec.zero_modes) f.set(md, c);
  return f;
}

/// Clifford multiplication e_0 = [[0, 1], [-1, 0]].
inline Spinor apply_e0(const Spinor& x) { return {x[1], -x[0]}; }

inline BoundaryField apply_e0(const BoundaryField& f) {
  BoundaryField out(f.lattice());
  for (const auto& [md, x] : f.coefficients()) out.set(md, apply_e0(x));
  return out;
}

/// Pointwise complex conjugation of the field (mode l goes to -l).
inline BoundaryField conjugate(const BoundaryField& f) {
  BoundaryField out(f.lattice());
  for (const auto& [md, x] : f.coefficients()) out.set(-md, {std::conj(x[0]), std::conj(x[1])});
  return out;
}

/// (X, Y) = sum over modes of <X, Y>, conjugate-linear in Y.
inline cplx pairing_hermitian(const BoundaryField& x, const BoundaryField& y) {
  x.require_same(y);
  cplx s{};
  for (const auto& [md, a] : x.coefficients()) {
    const Spinor b = y.at(md);
    s += a[0] * std::conj(b[0]) + a[1] * std::conj(b[1]);
  }
  return s;
}

enum class PairingConvention { Hermitian, Bilinear };

/// B(X, Y) = integral of <X, e_0 Y>. Hermitian: conjugation on the second slot.
/// Bilinear: no conjugation, so mode l of X meets mode -l of e_0 Y.
inline cplx pairing_B(const BoundaryField& x, const BoundaryField& y,
                      PairingConvention conv = PairingConvention::Hermitian) {
  x.require_same(y);
  if (conv == PairingConvention::Hermitian) return pairing_hermitian(x, apply_e0(y));
  cplx s{};
  for (const auto& [md, a] : x.coefficients()) {
    const Spinor b = apply_e0(y.at(-md));
    s += a[0] * b[0] + a[1] * b[1];
  }
  return s;
}

/// Outcome of testing the e_0 / Lagrangian statements under one convention.
struct ConventionProbe {
  PairingConvention pairing = PairingConvention::Hermitian;
  bool conjugated_pattern = false;   // Exp^-+ patterns (1, +-i conj(s)) instead of (1, +-i s)
  bool conjugating_e0 = false;       // e_0 composed with complex conjugation of the field
  bool e0_swaps_exp = false;         // e_0(Exp^+) in Exp^- and e_0(Exp^-) in Exp^+
  bool e0_maps_exp_to_eexp = false;  // e_0(Exp^+-) has no Eexp^+- component
  bool exp_minus_isotropic = false;  // B vanishes on Exp^- x Exp^-
};

/// Runs every convention over all signed modes of the lattice. The Eexp
/// patterns stay as implemented; only the Exp patterns, the pairing and e_0 vary.
inline std::vector<ConventionProbe> probe_e0_conventions(const ModeLattice& lat, double tol = 1e-12) {
  std::vector<Mode> signed_modes;
  for (Mode md : enumerate_modes(lat))
    if (!md.is_zero()) signed_modes.push_back(md);

  const cplx i{0.0, 1.0};
  std::vector<ConventionProbe> out;
  for (auto conv : {PairingConvention::Hermitian, PairingConvention::Bilinear}) {
    for (bool conj_pattern : {false, true}) {
      for (bool conj_e0 : {false, true}) {
        ConventionProbe pr{conv, conj_pattern, conj_e0, true, true, true};
        auto exp_weight = [&](Mode md, int sgn) {
          const cplx s = generalized_sign(md);
          return -double(sgn) * i * (conj_pattern ? std::conj(s) : s);
        };
        auto basis = [&](Mode md, int sgn) {
          BoundaryField f(lat);
          f.set(md, {1.0, exp_weight(md, sgn)});
          return f;
        };
        auto e0 = [&](const BoundaryField& f) { return conj_e0 ? apply_e0(conjugate(f)) : apply_e0(f); };
        // |component along (1, w)| relative to |y| at one mode
        auto along = [](const Spinor& y, cplx w) {
          return std::abs(0.5 * (y[0] + std::conj(w) * y[1])) /
                 std::max(std::sqrt(std::norm(y[0]) + std::norm(y[1])), 1e-300);
        };
        for (Mode md : signed_modes) {
          const Mode target = conj_e0 ? -md : md;
          const cplx st = generalized_sign(target);
          for (int sgn : {+1, -1}) {
            const Spinor y = e0(basis(md, sgn)).at(target);
            if (along(y, exp_weight(target, sgn)) > tol) pr.e0_swaps_exp = false;
            const SubspaceTag same = sgn > 0 ? SubspaceTag::EexpPlus : SubspaceTag::EexpMinus;
            if (along(y, pattern_weight(same, st)) > tol) pr.e0_maps_exp_to_eexp = false;
          }
          const BoundaryField xm = basis(md, -1);
          for (Mode other : signed_modes)
            if (std::abs(pairing_B(xm, basis(other, -1), conv)) > tol) pr.exp_minus_isotropic = false;
        }
        out.push_back(pr);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Green's formula on separated mode solutions.

struct GreenResult {
  double residual = 0.0;
  cplx lhs{};         // 2 pi (outer flux - volume integral)
  cplx rhs{};         // 2 pi B(trace v, trace w)
  cplx volume{};
  cplx outer_flux{};
  double magnitude = 0.0;  // sum of |terms| entering lhs and rhs, sets the roundoff scale
};

inline constexpr double kGreenInnerRadius = 1e-4;

namespace detail {

// taper chi(r) = 1 - (r/R)^4 / 2: equal to 1 at the singular end to O(r^4),
// nonvanishing at R so the outer flux contributes.
inline double taper(double r, double R) {
  const double x = r / R;
  return 1.0 - 0.5 * x * x * x * x;
}
inline double taper_derivative(double r, double R) { return -2.0 * r * r * r / (R * R * R * R); }

inline GreenResult green_once(const std::vector<RadialMode>& v, const std::vector<RadialMode>& w, double R,
                              int quad_n) {
  GreenResult res;
  const QuadratureRule q = gauss_legendre(quad_n, kGreenInnerRadius, R);
  for (const RadialMode& vi : v) {
    for (const RadialMode& wj : w) {
      if (vi.k != wj.k || vi.a != wj.a) continue;  // orthogonal Fourier modes
      auto field = [R](const RadialMode& md, double r) {
        const double c = taper(r, R);
        auto u = md(r);
        return Spinor{c * u[0], c * u[1]};
      };
      // L u = u' - M u for the tapered field.
      auto defect = [R](const RadialMode& md, double r) {
        const double c = taper(r, R), dc = taper_derivative(r, R);
        const auto u = md(r);
        const auto du = md.derivative(r);
        const Spinor f{c * u[0], c * u[1]};
        const Spinor df{dc * u[0] + c * du[0], dc * u[1] + c * du[1]};
        const auto mf = radial_rhs(md.k, md.a, f, r);
        return Spinor{df[0] - mf[0], df[1] - mf[1]};
      };
      cplx vol{};
      double mag = 0.0;
      for (std::size_t n = 0; n < q.nodes.size(); ++n) {
        const double r = q.nodes[n];
        const Spinor fv = field(vi, r), fw = field(wj, r);
        const Spinor lv = defect(vi, r), lw = defect(wj, r);
        const cplx integrand = r * (lv[0] * std::conj(fw[1]) - lv[1] * std::conj(fw[0]) +
                                    fv[0] * std::conj(lw[1]) - fv[1] * std::conj(lw[0]));
        vol += q.weights[n] * integrand;
        mag += q.weights[n] * r *
               (std::abs(lv[0] * fw[1]) + std::abs(lv[1] * fw[0]) + std::abs(fv[0] * lw[1]) + std::abs(fv[1] * lw[0]));
      }
      const Spinor fvR = field(vi, R), fwR = field(wj, R);
      const cplx flux = R * (fvR[0] * std::conj(fwR[1]) - fvR[1] * std::conj(fwR[0]));
      const Spinor tv = radial_trace(vi), tw = radial_trace(wj);
      const cplx boundary = tv[0] * std::conj(tw[1]) - tv[1] * std::conj(tw[0]);
      const double two_pi = 2.0 * std::numbers::pi;
      res.volume += two_pi * vol;
      res.outer_flux += two_pi * flux;
      res.lhs += two_pi * (flux - vol);
      res.rhs += two_pi * boundary;
      res.magnitude += two_pi * (mag + R * (std::abs(fvR[0] * fwR[1]) + std::abs(fvR[1] * fwR[0])) +
                                 std::abs(tv[0] * tw[1]) + std::abs(tv[1] * tw[0]));
    }
  }
  res.residual = std::abs(res.lhs - res.rhs);
  return res;
}

}  // namespace detail

/// Compares the tube side of Green's formula (outer flux minus the volume
/// integral of <D v, w> + <v, D w>, Gauss-Legendre in r on [1e-4, R]) with the
/// boundary pairing of the leading coefficients at r -> 0. Fields are the mode
/// solutions times chi(r) = 1 - (r/R)^4/2. Modes must be L^2 near r = 0.
inline GreenResult green_check(const std::vector<RadialMode>& v, const std::vector<RadialMode>& w, double R,
                               int quad_n) {
  if (!(R > kGreenInnerRadius)) throw DomainError("green_check: outer radius must exceed the inner radius");
  if (quad_n < 2) throw DomainError("green_check: quad_n must be >= 2");
  GreenResult fine = detail::green_once(v, w, R, quad_n);
  if (quad_n >= 4) {
    const GreenResult coarse = detail::green_once(v, w, R, quad_n / 2);
    const double floor = 1e-12 * (1.0 + fine.magnitude);
    if (fine.residual > coarse.residual && coarse.residual > floor)
      throw NumericError("green_check: residual does not decrease under quadrature refinement");
  }
  return fine;
}

struct GreenConvergence {
  std::vector<int> quad_n;
  std::vector<double> residual;
  double noise_floor = 0.0;  // 1e-12 (1 + magnitude)
  double min_order = INFINITY;  // lower bound log2(r_n / max(r_2n, floor)) over resolvable doublings
};

/// Residuals under quad_n doubling and the smallest observed order, bounded
/// below by log2(r_n / max(r_2n, floor)). Doublings that start within 4x of the
/// noise floor cannot resolve second order and are skipped; a step starting
/// above the floor must not increase. Exactly vanishing residuals give inf.
inline GreenConvergence green_convergence(const std::vector<RadialMode>& v, const std::vector<RadialMode>& w,
                                          double R, std::vector<int> quad_n = {2, 4, 8, 16, 32, 64}) {
  GreenConvergence gc;
  gc.quad_n = quad_n;
  for (int n : quad_n) {
    const GreenResult r = detail::green_once(v, w, R, n);
    gc.residual.push_back(r.residual);
    gc.noise_floor = std::max(gc.noise_floor, 1e-12 * (1.0 + r.magnitude));
  }
  for (std::size_t i = 1; i < gc.residual.size(); ++i) {
    const double prev = gc.residual[i - 1], cur = gc.residual[i];
    if (prev <= gc.noise_floor) continue;
    if (cur > prev) throw NumericError("green_convergence: residual increases under quadrature refinement");
    // below 4x the floor a second-order step cannot be resolved
    if (prev <= 4.0 * gc.noise_floor) continue;
    gc.min_order = std::min(gc.min_order, std::log2(prev / std::max(cur, gc.noise_floor)));
  }
  return gc;
}

}  // namespace z2index
