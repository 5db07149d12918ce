#pragma once

// Pointwise correspondences between boundary data and scalar fields:
// kernel data (d+ eta, d- conj(eta)) -> eta, cokernel data (d+ conj(c), d- c) -> c.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "z2index/boundary_spaces.hpp"
#include "z2index/errors.hpp"
#include "z2index/index_engine.hpp"
#include "z2index/symbol.hpp"

namespace z2index {

inline constexpr double kKernelResidualTol = 1e-8;
inline constexpr double kBranchAgreementTol = 1e-6;
inline constexpr double kBranchDenominatorFloor = 1e-6;

/// Exact product of a symbol with a scalar field.
inline ScalarField multiply(const TrigPoly& d, const ScalarField& f) {
  ScalarField out;
  for (const auto& [k, dk] : d.coeffs)
    for (const auto& [l, fl] : f) out[k + l] += dk * fl;
  return out;
}

/// Coefficients of the pointwise conjugate.
inline ScalarField conjugate(const ScalarField& f) {
  ScalarField out;
  for (const auto& [l, c] : f) out[-l] = std::conj(c);
  return out;
}

/// Field with components (a, b); every mode must lie in the lattice.
inline BoundaryField make_field(const ModeLattice& lat, const ScalarField& a, const ScalarField& b) {
  BoundaryField f(lat);
  for (const auto& [md, c] : a) f.add(md, {c, 0.0});
  for (const auto& [md, c] : b) f.add(md, {0.0, c});
  return f;
}

inline ScalarField component(const BoundaryField& f, int slot) {
  ScalarField out;
  for (const auto& [md, x] : f.coefficients()) out[md] = x[slot];
  return out;
}

inline double max_abs(const ScalarField& f) {
  double m = 0.0;
  for (const auto& [md, c] : f) m = std::max(m, std::abs(c));
  return m;
}

namespace detail {

// Grid points per direction: a power of two above 4 (bandwidth + 1).
inline int grid_size(int bandwidth) {
  int n = 16;
  while (n < 4 * (bandwidth + 1)) n *= 2;
  return n;
}

// Coefficients at the requested modes of grid samples (direct DFT).
inline ScalarField grid_to_modes(int dim_link, const std::vector<cplx>& v, int n, const std::vector<Mode>& modes) {
  const double h = 2.0 * std::numbers::pi / n;
  ScalarField out;
  if (dim_link == 1) {
    for (Mode md : modes) {
      cplx s{};
      for (int j = 0; j < n; ++j) s += v[j] * std::polar(1.0, -md.l() * h * j);
      out[md] = s / static_cast<double>(n);
    }
    return out;
  }
  std::map<int, std::vector<cplx>> partial;  // m2 -> (sum over s) per t row
  for (Mode md : modes) {
    auto& p = partial[md.m2];
    if (!p.empty()) continue;
    p.assign(n, cplx{});
    for (int j = 0; j < n; ++j) {
      const cplx* row = v.data() + static_cast<std::size_t>(j) * n;
      cplx s{};
      for (int k = 0; k < n; ++k) s += row[k] * std::polar(1.0, -md.m() * h * k);
      p[j] = s;
    }
  }
  for (Mode md : modes) {
    const auto& p = partial[md.m2];
    cplx s{};
    for (int j = 0; j < n; ++j) s += p[j] * std::polar(1.0, -md.l() * h * j);
    out[md] = s / (static_cast<double>(n) * n);
  }
  return out;
}

}  // namespace detail

/// eta with T(d+ eta, d- conj(eta)) = 0 recovered pointwise from u: u+/d+
/// where |d+| >= |d-|, else conj(u-/d-). Projected to the lattice cutoff of u.
inline ScalarField reconstruct_eta(const BoundaryField& u, const SymbolData& sym) {
  require_nondegenerate(sym);
  const ModeLattice& lat = u.lattice();
  if (sym.dim_link() != lat.dim_link) throw DomainError("reconstruct_eta: symbol and field live on different links");
  const double res = max_abs(apply_T(sym, u));
  if (!(res < kKernelResidualTol))
    throw DomainError("reconstruct_eta: input is not in the kernel of T (residual " + std::to_string(res) + ")");

  const int n = detail::grid_size(lat.cutoff + sym.bandwidth());
  const auto up = evaluate_on_grid(lat.dim_link, component(u, 0), n);
  const auto um = evaluate_on_grid(lat.dim_link, component(u, 1), n);
  const auto dp = evaluate_on_grid(sym.d_plus, n);
  const auto dm = evaluate_on_grid(sym.d_minus, n);
  std::vector<cplx> eta(up.size());
  for (std::size_t i = 0; i < up.size(); ++i) {
    const double ap = std::abs(dp[i]), am = std::abs(dm[i]);
    const bool both = ap > kBranchDenominatorFloor && am > kBranchDenominatorFloor;
    const cplx e1 = ap > 0.0 ? up[i] / dp[i] : cplx{};
    const cplx e2 = am > 0.0 ? std::conj(um[i] / dm[i]) : cplx{};
    if (both && std::abs(e1 - e2) > kBranchAgreementTol * std::max({std::abs(e1), std::abs(e2), 1e-300}) &&
        std::abs(e1 - e2) > 1e-12)
      throw DomainError("reconstruct_eta: u+/d+ and conj(u-/d-) disagree; input is not kernel data");
    eta[i] = ap >= am ? e1 : e2;
  }
  return detail::grid_to_modes(lat.dim_link, eta, n, enumerate_modes(lat));
}

struct CokernelResult {
  ScalarField c;
  double precondition_residual = 0.0;
  double orthogonality_residual = 0.0;
};

/// c = conj(u+)/conj(d+) = u-/d- (better-conditioned branch). The orthogonality
/// residual compares (T(w), c) = Re sum T(w) conj(c) with Re B(w, u) over the
/// real coordinate basis of fields w at the cutoff of u, and also measures
/// (T(w), c) on the real B-annihilator of u, where it must vanish.
inline CokernelResult cokernel_correspondence(const BoundaryField& u, const SymbolData& sym) {
  require_nondegenerate(sym);
  const ModeLattice& lat = u.lattice();
  if (sym.dim_link() != lat.dim_link)
    throw DomainError("cokernel_correspondence: symbol and field live on different links");

  const int n = detail::grid_size(lat.cutoff + sym.bandwidth());
  const auto up = evaluate_on_grid(lat.dim_link, component(u, 0), n);
  const auto um = evaluate_on_grid(lat.dim_link, component(u, 1), n);
  const auto dp = evaluate_on_grid(sym.d_plus, n);
  const auto dm = evaluate_on_grid(sym.d_minus, n);

  CokernelResult out;
  std::vector<cplx> cv(up.size());
  for (std::size_t i = 0; i < up.size(); ++i) {
    out.precondition_residual = std::max(out.precondition_residual, std::abs(dm[i] * std::conj(up[i]) -
                                                                             std::conj(dp[i]) * um[i]));
    cv[i] = std::abs(dp[i]) >= std::abs(dm[i]) ? std::conj(up[i] / dp[i]) : um[i] / dm[i];
  }
  if (!(out.precondition_residual < kKernelResidualTol))
    throw DomainError("cokernel_correspondence: d- conj(u+) != conj(d+) u-; input is not a cokernel element");
  out.c = detail::grid_to_modes(lat.dim_link, cv, n, enumerate_modes(lat));

  const RealifiedOperator A = build_T(sym, lat, lat.cutoff, SubspaceTag::Full);
  Eigen::VectorXd cvec = Eigen::VectorXd::Zero(A.row_basis.size());
  for (std::size_t i = 0; i < A.row_basis.size(); i += 2) {
    auto it = out.c.find(A.row_basis[i].mode);
    if (it == out.c.end()) continue;
    cvec(i) = it->second.real();
    cvec(i + 1) = it->second.imag();
  }
  // Re B(w, u) = Re(w1 conj(u2) - w2 conj(u1)) as a real linear functional of w
  Eigen::VectorXd bvec(A.col_basis.size());
  for (std::size_t j = 0; j < A.col_basis.size(); j += 2) {
    const BasisEntry& e = A.col_basis[j];
    const Spinor x = u.at(e.mode);
    const cplx partner = e.slot == 0 ? x[1] : -x[0];
    bvec(j) = partner.real();
    bvec(j + 1) = partner.imag();
  }
  const Eigen::VectorXd g = A.matrix.transpose() * cvec;
  const double identity_res = (g - bvec).cwiseAbs().maxCoeff();
  Eigen::VectorXd g_ann = g;
  const double bb = bvec.squaredNorm();
  if (bb > 0.0) g_ann -= (g.dot(bvec) / bb) * bvec;
  out.orthogonality_residual = std::max(identity_res, g_ann.cwiseAbs().maxCoeff());
  return out;
}

}  // namespace z2index
