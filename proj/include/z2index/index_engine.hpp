#pragma once

// Realified truncations of T(a, b) = conj(d-) a - d+ conj(b) and their
// numerical kernels, cokernels and indices.

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "z2index/boundary_spaces.hpp"
#include "z2index/errors.hpp"
#include "z2index/mode_lattice.hpp"
#include "z2index/symbol.hpp"

namespace z2index {

/// Scalar function on the link lattice, by mode.
using ScalarField = std::map<Mode, cplx>;

/// One real coordinate: mode, complex slot (pattern parameter / c1 = 0, c2 = 1;
/// scalar rows use 0) and real or imaginary part.
struct BasisEntry {
  Mode mode;
  int slot = 0;
  bool imag = false;
  auto operator<=>(const BasisEntry&) const = default;
};

struct RealifiedOperator {
  Eigen::MatrixXd matrix;
  std::vector<BasisEntry> row_basis;
  std::vector<BasisEntry> col_basis;
  SubspaceTag domain_tag = SubspaceTag::ExpMinus;
  std::string codomain_tag = "scalar";
  ModeLattice lattice;
  int N_dom = 0;
  int N_cod = 0;

  void validate() const {
    if (matrix.rows() != static_cast<Eigen::Index>(row_basis.size()) ||
        matrix.cols() != static_cast<Eigen::Index>(col_basis.size()))
      throw NumericError("RealifiedOperator: matrix shape does not match its basis descriptors");
    auto unique = [](const std::vector<BasisEntry>& b) {
      return std::set<BasisEntry>(b.begin(), b.end()).size() == b.size();
    };
    if (!unique(row_basis) || !unique(col_basis))
      throw NumericError("RealifiedOperator: duplicate basis descriptor");
  }
};

namespace detail {

// Complex domain parameter p: the field (alpha p, beta p) at a mode.
struct DomainParam {
  Mode mode;
  int slot;
  cplx alpha;
  cplx beta;
};

inline std::vector<DomainParam> domain_params(const ModeLattice& lat, int N, SubspaceTag tag) {
  check_tag(lat, tag);
  std::vector<DomainParam> out;
  for (Mode md : enumerate_modes(lat, N)) {
    const auto s = splitting_sign(lat, md);
    const bool two_slots = (!s && tag_includes_zero_modes(tag)) || (s && tag == SubspaceTag::Full);
    if (two_slots) {
      out.push_back({md, 0, 1.0, 0.0});
      out.push_back({md, 1, 0.0, 1.0});
    } else if (s && tag != SubspaceTag::KerDSigma) {
      out.push_back({md, 0, 1.0, pattern_weight(tag, *s)});
    }
  }
  return out;
}

}  // namespace detail

/// Matrix of T on the tagged subspace restricted to modes <= N_dom, with
/// values in scalar modes <= N_cod. Entries come from exact convolution with
/// the symbol coefficients.
inline RealifiedOperator build_T_rect(const SymbolData& sym, const ModeLattice& lat, int N_dom, int N_cod,
                                      SubspaceTag tag) {
  if (N_dom < 1 || N_cod < 1) throw DomainError("build_T: cutoffs must be >= 1");
  sym.validate();
  if (sym.dim_link() != lat.dim_link) throw DomainError("build_T: symbol and lattice live on different links");

  RealifiedOperator op;
  op.domain_tag = tag;
  op.lattice = lat.with_cutoff(N_dom);
  op.N_dom = N_dom;
  op.N_cod = N_cod;

  const auto params = detail::domain_params(lat, N_dom, tag);
  const ModeIndex rows(enumerate_modes(lat, N_cod));
  for (Mode md : rows.modes()) {
    op.row_basis.push_back({md, 0, false});
    op.row_basis.push_back({md, 0, true});
  }
  for (const auto& p : params) {
    op.col_basis.push_back({p.mode, p.slot, false});
    op.col_basis.push_back({p.mode, p.slot, true});
  }
  op.matrix = Eigen::MatrixXd::Zero(op.row_basis.size(), op.col_basis.size());

  for (std::size_t j = 0; j < params.size(); ++j) {
    const auto& p = params[j];
    const Eigen::Index cx = 2 * static_cast<Eigen::Index>(j);
    // linear part: conj(d-_{l-n}) alpha p at n = l - k
    if (p.alpha != cplx{}) {
      for (const auto& [k, dk] : sym.d_minus.coeffs) {
        const int r = rows.find(p.mode - k);
        if (r < 0) continue;
        const cplx A = std::conj(dk) * p.alpha;
        const Eigen::Index rx = 2 * r;
        op.matrix(rx, cx) += A.real();
        op.matrix(rx, cx + 1) -= A.imag();
        op.matrix(rx + 1, cx) += A.imag();
        op.matrix(rx + 1, cx + 1) += A.real();
      }
    }
    // conjugate part: -d+_k conj(beta p) at n = k - l
    if (p.beta != cplx{}) {
      for (const auto& [k, dk] : sym.d_plus.coeffs) {
        const int r = rows.find(k - p.mode);
        if (r < 0) continue;
        const cplx B = -dk * std::conj(p.beta);
        const Eigen::Index rx = 2 * r;
        op.matrix(rx, cx) += B.real();
        op.matrix(rx, cx + 1) += B.imag();
        op.matrix(rx + 1, cx) += B.imag();
        op.matrix(rx + 1, cx + 1) -= B.real();
      }
    }
  }
  return op;
}

/// Codomain cutoff N_dom + W, so nothing in the range is truncated away.
inline RealifiedOperator build_T(const SymbolData& sym, const ModeLattice& lat, int N_dom, SubspaceTag tag) {
  return build_T_rect(sym, lat, N_dom, N_dom + sym.bandwidth(), tag);
}

/// Column vector of a field in the operator's domain coordinates. Pattern
/// parameters are read as the projection coefficient onto (1, w).
inline Eigen::VectorXd to_domain_vector(const RealifiedOperator& op, const BoundaryField& f) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(op.col_basis.size());
  for (std::size_t j = 0; j < op.col_basis.size(); j += 2) {
    const BasisEntry& e = op.col_basis[j];
    const Spinor x = f.at(e.mode);
    cplx p;
    const auto s = splitting_sign(op.lattice, e.mode);
    const bool two_slots = (!s) || op.domain_tag == SubspaceTag::Full;
    if (two_slots) {
      p = x[e.slot];
    } else {
      p = 0.5 * (x[0] + std::conj(pattern_weight(op.domain_tag, *s)) * x[1]);
    }
    v(j) = p.real();
    v(j + 1) = p.imag();
  }
  return v;
}

inline ScalarField from_codomain_vector(const RealifiedOperator& op, const Eigen::VectorXd& v) {
  ScalarField out;
  for (std::size_t i = 0; i < op.row_basis.size(); i += 2) out[op.row_basis[i].mode] = {v(i), v(i + 1)};
  return out;
}

/// Realified multiplication by i on a basis of (Re, Im) pairs.
inline Eigen::MatrixXd realified_i(std::size_t n) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t j = 0; j + 1 < n; j += 2) {
    J(j + 1, j) = 1.0;
    J(j, j + 1) = -1.0;
  }
  return J;
}

/// T applied directly to a field (no truncation).
inline ScalarField apply_T(const SymbolData& sym, const BoundaryField& f) {
  ScalarField out;
  for (const auto& [l, x] : f.coefficients()) {
    for (const auto& [k, dk] : sym.d_minus.coeffs) out[l - k] += std::conj(dk) * x[0];
    for (const auto& [k, dk] : sym.d_plus.coeffs) out[k - l] -= dk * std::conj(x[1]);
  }
  return out;
}

/// Row-major CSV of the realified matrix, 17 significant digits.
inline std::string matrix_csv(const RealifiedOperator& op) {
  std::ostringstream os;
  os.precision(17);
  for (Eigen::Index i = 0; i < op.matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < op.matrix.cols(); ++j) os << (j ? "," : "") << op.matrix(i, j);
    os << '\n';
  }
  return os.str();
}

inline void write_matrix_csv(const RealifiedOperator& op, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open matrix dump '" + path + "'");
  os << matrix_csv(op);
}

// ---------------------------------------------------------------------------
// Numerical ranks.

inline constexpr double kDefaultSvdTolerance = 1e-8;
inline constexpr double kMinSpectralGap = 1e3;

struct RankInfo {
  int rank = 0;
  int rows = 0;
  int cols = 0;
  double sigma_max = 0.0;
  double sigma_min_kept = 0.0;
  double gap = 0.0;
};

/// rank = #{sigma >= tol * sigma_max}. gap = sigma_last_kept / sigma_first_dropped,
/// inf when nothing (or an exact zero) is dropped.
inline RankInfo numerical_rank(const Eigen::MatrixXd& m, double tol) {
  RankInfo info;
  info.rows = static_cast<int>(m.rows());
  info.cols = static_cast<int>(m.cols());
  if (m.size() == 0) throw DomainError("numerical_index: empty matrix");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
  const Eigen::VectorXd sv = svd.singularValues();
  info.sigma_max = sv.size() ? sv(0) : 0.0;
  if (!(info.sigma_max > 0.0)) throw NumericError("numerical_index: degenerate operator (sigma_max = 0)");
  const double thr = tol * info.sigma_max;
  int r = 0;
  while (r < sv.size() && sv(r) >= thr) ++r;
  info.rank = r;
  info.gap = (r < sv.size() && sv(r) > 0.0) ? sv(r - 1) / sv(r) : std::numeric_limits<double>::infinity();
  info.sigma_min_kept = sv(r - 1);
  return info;
}

struct IndexReport {
  std::vector<int> cutoffs;
  std::vector<int> dim_ker;
  std::vector<int> dim_coker;
  std::vector<int> index_per_cutoff;
  std::vector<double> spectral_gap;
  int index_real = 0;
  double index_complex = 0.0;
  bool stable = false;
  bool odd_index = false;
  double svd_tolerance = kDefaultSvdTolerance;
};

/// Kernel and cokernel of one matrix; index = cols - rows.
inline IndexReport numerical_index(const RealifiedOperator& op, double tol_rel = kDefaultSvdTolerance) {
  op.validate();
  const RankInfo ri = numerical_rank(op.matrix, tol_rel);
  IndexReport rep;
  rep.svd_tolerance = tol_rel;
  rep.cutoffs = {op.N_dom};
  rep.dim_ker = {ri.cols - ri.rank};
  rep.dim_coker = {ri.rows - ri.rank};
  rep.index_per_cutoff = {rep.dim_ker[0] - rep.dim_coker[0]};
  rep.spectral_gap = {ri.gap};
  rep.index_real = rep.index_per_cutoff[0];
  rep.odd_index = rep.index_real % 2 != 0;
  rep.index_complex = 0.5 * rep.index_real;
  rep.stable = false;  // one cutoff is never evidence of stabilization
  return rep;
}

struct CutoffResult {
  int cutoff = 0;
  int dim_ker = 0;
  int dim_coker = 0;
  double gap = 0.0;
};

/// Kernel from T: dom(N) -> cod(N + W) (no range truncated), cokernel from
/// T: dom(N + W) -> cod(N) (every domain mode reaching cod(N) is present).
inline CutoffResult cutoff_index(const SymbolData& sym, const ModeLattice& lat, int N, SubspaceTag tag,
                                 double tol) {
  const int W = sym.bandwidth();
  const RealifiedOperator A = build_T_rect(sym, lat, N, N + W, tag);
  const RealifiedOperator C = build_T_rect(sym, lat, N + W, N, tag);
  const RankInfo ka = numerical_rank(A.matrix, tol);
  const RankInfo kc = numerical_rank(C.matrix, tol);
  return {N, ka.cols - ka.rank, kc.rows - kc.rank, std::min(ka.gap, kc.gap)};
}

/// Worker cap: Z2INDEX_THREADS if set and positive, else hardware concurrency.
inline unsigned worker_limit() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("Z2INDEX_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return hw;
}

/// cutoff_index at every cutoff, run on up to worker_limit() threads.
inline std::vector<CutoffResult> cutoff_sweep(const SymbolData& sym, const ModeLattice& lat,
                                              const std::vector<int>& cutoffs, SubspaceTag tag,
                                              double tol_rel = kDefaultSvdTolerance) {
  if (cutoffs.empty()) throw DomainError("cutoff_sweep: no cutoffs");
  for (std::size_t i = 1; i < cutoffs.size(); ++i)
    if (cutoffs[i] <= cutoffs[i - 1]) throw DomainError("cutoff_sweep: cutoffs must be strictly increasing");
  for (int N : cutoffs)
    if (N < 1) throw DomainError("cutoff_sweep: cutoffs must be >= 1");
  require_nondegenerate(sym);

  std::vector<CutoffResult> res(cutoffs.size());
  std::vector<std::exception_ptr> errs(cutoffs.size());
  const unsigned workers = std::min<unsigned>(worker_limit(), static_cast<unsigned>(cutoffs.size()));
  auto job = [&](std::size_t i) {
    try {
      res[i] = cutoff_index(sym, lat, cutoffs[i], tag, tol_rel);
    } catch (...) {
      errs[i] = std::current_exception();
    }
  };
  if (workers <= 1) {
    for (std::size_t i = 0; i < cutoffs.size(); ++i) job(i);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < cutoffs.size(); i += workers) job(i);
      });
    for (auto& t : pool) t.join();
  }
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
  return res;
}

/// Per-cutoff table plus verdict: stable iff the last three cutoffs share an
/// even index and every gap is at least kMinSpectralGap.
inline IndexReport summarize_cutoffs(const std::vector<CutoffResult>& res, double tol_rel) {
  if (res.empty()) throw DomainError("summarize_cutoffs: no cutoffs");
  IndexReport rep;
  rep.svd_tolerance = tol_rel;
  for (const auto& r : res) {
    rep.cutoffs.push_back(r.cutoff);
    rep.dim_ker.push_back(r.dim_ker);
    rep.dim_coker.push_back(r.dim_coker);
    rep.index_per_cutoff.push_back(r.dim_ker - r.dim_coker);
    rep.spectral_gap.push_back(r.gap);
  }
  const std::size_t n = rep.cutoffs.size();
  rep.index_real = rep.index_per_cutoff[n - 1];
  rep.index_complex = 0.5 * rep.index_real;
  rep.odd_index = rep.index_real % 2 != 0;
  bool same = n >= 3;
  for (std::size_t i = n >= 3 ? n - 3 : n; i < n; ++i) same = same && rep.index_per_cutoff[i] == rep.index_real;
  const bool gaps = std::all_of(rep.spectral_gap.begin(), rep.spectral_gap.end(),
                                [](double g) { return g >= kMinSpectralGap; });
  rep.stable = same && gaps && !rep.odd_index;
  return rep;
}

inline IndexReport stabilized_index(const SymbolData& sym, const ModeLattice& lat, const std::vector<int>& cutoffs,
                                    SubspaceTag tag, double tol_rel = kDefaultSvdTolerance) {
  if (cutoffs.size() < 3) throw DomainError("stabilized_index: at least 3 cutoffs are required");
  for (std::size_t i = 1; i < cutoffs.size(); ++i)
    if (cutoffs[i] <= cutoffs[i - 1]) throw DomainError("stabilized_index: cutoffs must be strictly increasing");
  return summarize_cutoffs(cutoff_sweep(sym, lat, cutoffs, tag, tol_rel), tol_rel);
}

}  // namespace z2index
