#pragma once

// Invariant suites run by `z2index verify`. Each returns the worst residual
// against its threshold and, on failure, the first failing case as JSON.

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "z2index/boundary_spaces.hpp"
#include "z2index/correspondences.hpp"
#include "z2index/index_engine.hpp"
#include "z2index/radial_modes.hpp"
#include "z2index/serialization.hpp"

namespace z2index {

struct VerifyOptions {
  std::uint64_t seed = 0;
  bool has_seed = false;
  int samples = 50;
  int quad_n = 64;
  double green_radius = 2.0;
};

struct SuiteResult {
  std::string name;
  bool passed = false;
  double max_residual = 0.0;
  double threshold = 0.0;
  int cases = 0;
  json details = json::object();
  json failing_case = nullptr;
};

inline constexpr double kGreenTol = 1e-8;
inline constexpr double kGreenMinOrder = 2.0;
inline constexpr double kBesselTol = 1e-12;
inline constexpr double kOdeTol = 1e-9;
inline constexpr double kOrthogonalityTol = 1e-12;
inline constexpr int kSumUlps = 4;
inline constexpr double kKernelIdentityTol = 1e-13;
inline constexpr double kRoundTripTol = 1e-10;
inline constexpr double kCokernelOrthogonalityTol = 1e-8;
inline constexpr double kMaxSupportedAr = 50.0;

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"green", "bessel", "ode", "splitting", "kernel-identity", "eta",
                                              "cokernel"};
  return names;
}

inline bool suite_is_randomized(const std::string& name) {
  return name == "splitting" || name == "kernel-identity" || name == "eta" || name == "cokernel";
}

namespace detail {

inline json radial_mode_to_json(const RadialMode& m) {
  json j;
  j["k"] = m.k;
  j["a"] = m.a;
  j["u_plus"] = complex_to_json(m.u_plus);
  j["u_minus"] = complex_to_json(m.u_minus);
  j["growth"] = to_string(m.growth);
  return j;
}

inline std::vector<std::pair<RadialMode, RadialMode>> green_pairs() {
  const cplx I{0.0, 1.0};
  std::vector<std::pair<RadialMode, RadialMode>> p;
  for (double a : {1.0, 2.5}) {
    const auto first = assemble_solution(0, a, 1.0, 0.0);
    const auto second = assemble_solution(0, a, 0.0, 1.0);
    const auto dec = decaying_solution(0, a, cplx(0.5, 0.3));
    const auto mix = assemble_solution(0, a, cplx(1.0, 1.0), cplx(0.0, -2.0));
    p.push_back({first, second});
    p.push_back({dec, first});
    p.push_back({mix, dec});
    p.push_back({mix, mix});
  }
  p.push_back({assemble_solution(0, 0.0, 1.0, 2.0), assemble_solution(0, 0.0, I, 1.0)});
  p.push_back({assemble_solution(1, 1.0, 1.0, 0.0), assemble_solution(1, 1.0, 2.0, 0.0)});
  return p;
}

// sinh/cosh closed forms of I_{+-1/2}, I_{+-3/2} in long double
inline long double closed_form_I(int twice_p, long double x) {
  const long double c = std::sqrt(2.0L / (std::numbers::pi_v<long double> * x));
  const long double sh = std::sinh(x), ch = std::cosh(x);
  switch (twice_p) {
    case 1: return c * sh;
    case -1: return c * ch;
    case 3: return c * (ch - sh / x);
    case -3: return c * (sh - ch / x);
  }
  return NAN;
}

// Richardson-extrapolated central difference, relative mismatch with radial_rhs.
inline double ode_relative_residual(const RadialMode& md, double r) {
  auto central = [&](double h) {
    const auto p = md(r + h), m = md(r - h);
    return std::array<cplx, 2>{(p[0] - m[0]) / (2 * h), (p[1] - m[1]) / (2 * h)};
  };
  const double h = 1e-3 * r;
  const auto d1 = central(h), d2 = central(h / 2), d3 = central(h / 4);
  std::array<cplx, 2> d;
  for (int c = 0; c < 2; ++c) {
    const cplx r1 = (4.0 * d2[c] - d1[c]) / 3.0, r2 = (4.0 * d3[c] - d2[c]) / 3.0;
    d[c] = (16.0 * r2 - r1) / 15.0;
  }
  const auto rhs = radial_rhs(md.k, md.a, md(r), r);
  const double num = std::max(std::abs(d[0] - rhs[0]), std::abs(d[1] - rhs[1]));
  const double scale = std::max(std::abs(d[0]), std::abs(d[1])) + std::max(std::abs(rhs[0]), std::abs(rhs[1]));
  return num / scale;
}

inline ScalarField random_scalar(const ModeLattice& lat, int bandwidth, std::mt19937_64& rng) {
  ScalarField f;
  for (Mode md : enumerate_modes(lat, bandwidth)) f[md] = random_unit_disc(rng);
  return f;
}

inline double max_diff(const ScalarField& a, const ScalarField& b) {
  double m = 0.0;
  for (const auto& [md, c] : a) {
    auto it = b.find(md);
    m = std::max(m, std::abs(c - (it == b.end() ? cplx{} : it->second)));
  }
  for (const auto& [md, c] : b)
    if (!a.contains(md)) m = std::max(m, std::abs(c));
  return m;
}

// Case i alternates circle / torus lattices and offsets.
inline ModeLattice correspondence_lattice(int i) {
  const int dim = i % 2 == 0 ? 1 : 2;
  const double off = (i / 2) % 2 == 0 ? 0.5 : 0.0;
  return ModeLattice::make(dim, off, 0.0, dim == 1 ? 10 : 5);
}

// extra_ok carries a suite's secondary pass condition.
inline void record(SuiteResult& s, double residual, const std::function<json()>& make_case, bool extra_ok = true) {
  ++s.cases;
  const bool bad = !(residual < s.threshold) || !extra_ok;
  if (bad && s.failing_case.is_null()) s.failing_case = make_case();
  if (!(residual <= s.max_residual)) s.max_residual = residual;
}

}  // namespace detail

inline SuiteResult verify_green(const VerifyOptions& o) {
  SuiteResult s{"green", false, 0.0, kGreenTol};
  double min_order = INFINITY;
  for (const auto& [v, w] : detail::green_pairs()) {
    if (std::max(v.a, w.a) * o.green_radius > kMaxSupportedAr)
      throw ConfigError("verify: green_radius puts a*r beyond the supported range 50");
    const auto r = green_check({v}, {w}, o.green_radius, o.quad_n);
    const auto gc = green_convergence({v}, {w}, o.green_radius);
    min_order = std::min(min_order, gc.min_order);
    auto make_case = [&] {
      json c;
      c["v"] = detail::radial_mode_to_json(v);
      c["w"] = detail::radial_mode_to_json(w);
      c["R"] = o.green_radius;
      c["quad_n"] = o.quad_n;
      c["lhs"] = complex_to_json(r.lhs);
      c["rhs"] = complex_to_json(r.rhs);
      c["min_order"] = json_double(gc.min_order);
      return c;
    };
    detail::record(s, r.residual, make_case, gc.min_order >= kGreenMinOrder);
  }
  s.details["min_order"] = json_double(min_order);
  s.details["min_order_threshold"] = kGreenMinOrder;
  s.passed = s.failing_case.is_null();
  return s;
}

inline SuiteResult verify_bessel(const VerifyOptions&) {
  SuiteResult s{"bessel", false, 0.0, kBesselTol};
  for (int tp : {-3, -1, 1, 3}) {
    // the p = +-3/2 closed forms cancel in long double below x = 0.5
    const double lo = std::abs(tp) == 1 ? 0.01 : 0.5;
    for (double a : {0.5, 1.0, 3.0}) {
      for (int i = 0; i <= 200; ++i) {
        const double x = lo * std::pow(20.0 / lo, i / 200.0);
        const double r = x / a;
        const long double want = std::pow(static_cast<long double>(a), -0.5L * tp) * detail::closed_form_I(tp, x);
        const double got = bessel_series(0.5 * tp, a, r);
        const double rel = static_cast<double>(std::abs((got - want) / want));
        detail::record(s, rel, [&] {
          json c;
          c["p"] = 0.5 * tp;
          c["a"] = a;
          c["r"] = r;
          c["series"] = got;
          c["closed_form"] = static_cast<double>(want);
          return c;
        });
      }
    }
  }
  s.passed = s.failing_case.is_null();
  return s;
}

inline SuiteResult verify_ode(const VerifyOptions&) {
  SuiteResult s{"ode", false, 0.0, kOdeTol};
  std::set<double> eigen;
  for (const auto& lat : {ModeLattice::make(1, 0.5, 0.0, 8), ModeLattice::make(1, 0.0, 0.0, 8),
                          ModeLattice::make(2, 0.0, 0.5, 8)})
    for (Mode md : enumerate_modes(lat)) eigen.insert(eigenvalue(md));
  const std::array<std::pair<cplx, cplx>, 3> coeffs{{{1.0, 0.0}, {0.0, 1.0}, {cplx(0.3, -1.0), cplx(2.0, 0.5)}}};
  for (int k = -8; k <= 8; ++k)
    for (double a : eigen)
      for (auto [up, um] : coeffs) {
        const auto md = assemble_solution(k, a, up, um);
        for (int i = 0; i < 50; ++i) {
          const double r = 0.05 + 1.95 * i / 49.0;
          detail::record(s, detail::ode_relative_residual(md, r), [&] {
            json c = detail::radial_mode_to_json(md);
            c["r"] = r;
            return c;
          });
        }
      }
  s.details["residual"] = "relative: |dU/dr - rhs| / (|dU/dr| + |rhs|)";
  s.passed = s.failing_case.is_null();
  return s;
}

inline SuiteResult verify_splitting(const VerifyOptions& o) {
  SuiteResult s{"splitting", false, 0.0, kOrthogonalityTol};
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> g;
  const double eps = std::numeric_limits<double>::epsilon();
  const std::vector<ModeLattice> lats{
      ModeLattice::make(1, 0.5, 0.0, 6), ModeLattice::make(1, 0.0, 0.0, 6), ModeLattice::make(2, 0.0, 0.0, 6),
      ModeLattice::make(2, 0.5, 0.0, 6), ModeLattice::make(2, 0.0, 0.5, 6), ModeLattice::make(2, 0.5, 0.5, 6)};
  int idempotency_failures = 0, sum_failures = 0;
  double worst_sum_ulps = 0.0;
  for (int i = 0; i < o.samples; ++i) {
    const ModeLattice& lat = lats[i % lats.size()];
    BoundaryField x(lat), y(lat);
    for (Mode md : enumerate_modes(lat)) {
      x.set(md, {cplx(g(rng), g(rng)), cplx(g(rng), g(rng))});
      y.set(md, {cplx(g(rng), g(rng)), cplx(g(rng), g(rng))});
    }
    std::vector<SubspaceTag> tags{SubspaceTag::ExpPlus, SubspaceTag::ExpMinus, SubspaceTag::EexpPlus,
                                  SubspaceTag::EexpMinus};
    if (has_separate_zero_mode(lat)) tags.push_back(SubspaceTag::KerDSigma);
    for (auto t : tags) {
      const auto p = project(x, t);
      if (!(project(p, t) == p)) ++idempotency_failures;
    }
    const auto xp = project(x, SubspaceTag::ExpPlus), xm = project(x, SubspaceTag::ExpMinus);
    double orth = std::abs(pairing_hermitian(xp, project(y, SubspaceTag::ExpMinus)));
    BoundaryField sum = xp + xm;
    if (has_separate_zero_mode(lat)) {
      const auto yk = project(y, SubspaceTag::KerDSigma);
      orth = std::max({orth, std::abs(pairing_hermitian(xp, yk)), std::abs(pairing_hermitian(xm, yk))});
      sum += project(x, SubspaceTag::KerDSigma);
    }
    for (const auto& [md, c] : x.coefficients()) {
      const auto t = sum.at(md);
      const double scale = std::max(std::abs(c[0]), std::abs(c[1]));
      const double ulps = std::max(std::abs(t[0] - c[0]), std::abs(t[1] - c[1])) / (eps * scale);
      worst_sum_ulps = std::max(worst_sum_ulps, ulps);
      if (ulps > kSumUlps) ++sum_failures;
    }
    detail::record(s, orth, [&] {
      json c;
      c["x"] = field_to_json(x);
      c["y"] = field_to_json(y);
      return c;
    });
  }
  int trace_failures = 0;
  for (const auto& lat : {ModeLattice::make(1, 0.0, 0.0, 32), ModeLattice::make(1, 0.5, 0.0, 32),
                          ModeLattice::make(2, 0.0, 0.0, 32), ModeLattice::make(2, 0.5, 0.5, 32)})
    for (Mode md : enumerate_modes(lat)) {
      if (md.is_zero()) continue;
      const auto t = decaying_trace(md);
      if (t[1] != pattern_weight(SubspaceTag::ExpMinus, generalized_sign(md)) * t[0]) ++trace_failures;
    }
  s.details["idempotency_failures"] = idempotency_failures;
  s.details["sum_to_identity_max_ulps"] = worst_sum_ulps;
  s.details["sum_to_identity_ulp_bound"] = kSumUlps;
  s.details["decaying_trace_pattern_failures"] = trace_failures;
  s.passed = s.failing_case.is_null() && idempotency_failures == 0 && sum_failures == 0 && trace_failures == 0;
  return s;
}

inline SuiteResult verify_kernel_identity(const VerifyOptions& o) {
  SuiteResult s{"kernel-identity", false, 0.0, kKernelIdentityTol};
  std::mt19937_64 rng(o.seed);
  for (int dim : {1, 2}) {
    const auto lat = dim == 1 ? ModeLattice::make(1, 0.5, 0.0, 10) : ModeLattice::make(2, 0.0, 0.0, 5);
    for (int i = 0; i < o.samples; ++i) {
      const auto sym = random_symbol(dim, dim == 1 ? 3 : 2, rng);
      const auto eta = detail::random_scalar(lat, lat.cutoff - sym.bandwidth(), rng);
      const auto u = make_field(lat, multiply(sym.d_plus, eta), multiply(sym.d_minus, conjugate(eta)));
      const auto op = build_T(sym, lat, lat.cutoff, SubspaceTag::Full);
      const Eigen::VectorXd out = op.matrix * to_domain_vector(op, u);
      detail::record(s, out.cwiseAbs().maxCoeff(), [&] {
        json c;
        c["symbol"] = symbol_to_json(sym);
        c["eta"] = scalar_field_to_json(eta, dim);
        c["lattice"] = lattice_to_json(lat);
        return c;
      });
    }
  }
  s.passed = s.failing_case.is_null();
  return s;
}

inline SuiteResult verify_eta(const VerifyOptions& o) {
  SuiteResult s{"eta", false, 0.0, kRoundTripTol};
  std::mt19937_64 rng(o.seed);
  for (int i = 0; i < o.samples; ++i) {
    const auto lat = detail::correspondence_lattice(i);
    const auto sym = random_symbol(lat.dim_link, 2, rng);
    const auto eta = detail::random_scalar(lat, lat.cutoff - sym.bandwidth(), rng);
    const auto u = make_field(lat, multiply(sym.d_plus, eta), multiply(sym.d_minus, conjugate(eta)));
    const double err = detail::max_diff(reconstruct_eta(u, sym), eta);
    detail::record(s, err, [&] {
      json c;
      c["symbol"] = symbol_to_json(sym);
      c["eta"] = scalar_field_to_json(eta, lat.dim_link);
      c["u"] = field_to_json(u);
      return c;
    });
  }
  s.passed = s.failing_case.is_null();
  return s;
}

inline SuiteResult verify_cokernel(const VerifyOptions& o) {
  SuiteResult s{"cokernel", false, 0.0, kRoundTripTol};
  std::mt19937_64 rng(o.seed);
  double worst_orth = 0.0;
  bool orth_ok = true;
  for (int i = 0; i < o.samples; ++i) {
    const auto lat = detail::correspondence_lattice(i);
    const auto sym = random_symbol(lat.dim_link, 2, rng);
    const auto c0 = detail::random_scalar(lat, lat.cutoff - sym.bandwidth(), rng);
    const auto u = make_field(lat, multiply(sym.d_plus, conjugate(c0)), multiply(sym.d_minus, c0));
    const auto r = cokernel_correspondence(u, sym);
    const double err = detail::max_diff(r.c, c0);
    worst_orth = std::max(worst_orth, r.orthogonality_residual);
    const bool this_orth = r.orthogonality_residual < kCokernelOrthogonalityTol;
    orth_ok = orth_ok && this_orth;
    detail::record(s, err, [&] {
      json c;
      c["symbol"] = symbol_to_json(sym);
      c["c"] = scalar_field_to_json(c0, lat.dim_link);
      c["u"] = field_to_json(u);
      c["round_trip_error"] = err;
      c["orthogonality_residual"] = r.orthogonality_residual;
      return c;
    }, this_orth);
  }
  s.details["max_orthogonality_residual"] = worst_orth;
  s.details["orthogonality_threshold"] = kCokernelOrthogonalityTol;
  s.passed = s.failing_case.is_null() && orth_ok;
  return s;
}

inline SuiteResult run_suite(const std::string& name, const VerifyOptions& o) {
  if (suite_is_randomized(name) && !o.has_seed)
    throw ConfigError("verify: suite '" + name + "' is randomized and needs a seed");
  if (name == "green") return verify_green(o);
  if (name == "bessel") return verify_bessel(o);
  if (name == "ode") return verify_ode(o);
  if (name == "splitting") return verify_splitting(o);
  if (name == "kernel-identity") return verify_kernel_identity(o);
  if (name == "eta") return verify_eta(o);
  if (name == "cokernel") return verify_cokernel(o);
  throw ConfigError("verify: unknown suite '" + name + "'");
}

inline json suite_to_json(const SuiteResult& s) {
  json j;
  j["name"] = s.name;
  j["passed"] = s.passed;
  j["cases"] = s.cases;
  j["max_residual"] = json_double(s.max_residual);
  j["threshold"] = s.threshold;
  j["details"] = s.details;
  if (!s.failing_case.is_null()) j["failing_case"] = s.failing_case;
  return j;
}

}  // namespace z2index
