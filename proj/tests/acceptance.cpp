// Acceptance run: one PASS/FAIL line per criterion, tolerances pinned here.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>

#include "z2index/cli.hpp"

using namespace z2index;

namespace {

// pinned acceptance thresholds
constexpr int kRandomSymbols = 20;
constexpr std::uint64_t kSymbolSeed = 12345;
constexpr int kSymbolBandwidth = 3;
constexpr double kMinGap = 1e3;
constexpr double kIndexZeroBudgetSeconds = 60.0;
constexpr double kFourDBudgetSeconds = 120.0;
constexpr double kKernelIdentityMax = 1e-13;
constexpr int kKernelIdentityPairs = 50;
constexpr double kBesselMax = 1e-12;
constexpr double kOdeMax = 1e-9;
constexpr double kGreenMax = 1e-8;
constexpr int kGreenQuad = 64;
constexpr double kGreenOrder = 2.0;
constexpr double kOrthogonalityMax = 1e-12;
constexpr int kRoundTripCases = 50;
constexpr double kRoundTripMax = 1e-10;
constexpr double kAppendixOrthogonalityMax = 1e-8;
constexpr std::uint64_t kSuiteSeed = 2718;

int failures = 0;

void report(int id, bool ok, const std::string& what, const std::string& detail) {
  std::printf("[%s] %d %s: %s\n", ok ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(kSymbolSeed);
  const auto lat = ModeLattice::make(1, 0.5, 0.0, 1);
  int good = 0;
  double min_gap = INFINITY;
  for (int i = 0; i < kRandomSymbols; ++i) {
    const auto sym = random_symbol(1, kSymbolBandwidth, rng);
    const auto rep = stabilized_index(sym, lat, {16, 32, 64}, SubspaceTag::ExpMinus);
    bool gaps = true;
    for (double g : rep.spectral_gap) {
      gaps = gaps && g >= kMinGap;
      min_gap = std::min(min_gap, g);
    }
    if (rep.stable && rep.index_real == 0 && gaps) ++good;
  }
  const double dt = seconds_since(t0);
  report(1, good == kRandomSymbols && dt < kIndexZeroBudgetSeconds, "3D index zero",
         fmt("%d/%d symbols stable with index 0 over cutoffs {16,32,64}, min gap %.3g (>= %.0e), %.2f s (< %.0f s)",
             good, kRandomSymbols, min_gap, kMinGap, dt, kIndexZeroBudgetSeconds));
}

void criterion_2() {
  const auto t0 = std::chrono::steady_clock::now();
  const SymbolData sym{TrigPoly{2, {}}, TrigPoly::constant(2, 1.0)};
  const std::vector<int> cut{4, 8, 12};
  const auto trivial = stabilized_index(sym, ModeLattice::make(2, 0.0, 0.0, 1), cut, SubspaceTag::ExpMinus);
  bool ok = trivial.stable && trivial.index_complex == -1.0;
  for (int k : trivial.dim_ker) ok = ok && k == 0;
  std::string detail = fmt("trivial: dim_ker %d/%d/%d, index_complex %g", trivial.dim_ker[0], trivial.dim_ker[1],
                           trivial.dim_ker[2], trivial.index_complex);
  for (auto [t, s] : {std::pair{0.5, 0.0}, {0.0, 0.5}, {0.5, 0.5}}) {
    const auto rep = stabilized_index(sym, ModeLattice::make(2, t, s, 1), cut, SubspaceTag::ExpMinus);
    ok = ok && rep.stable && rep.index_real == 0;
    detail += fmt("; (%g,%g): index %d%s", t, s, rep.index_real, rep.stable ? "" : " unstable");
  }
  const double dt = seconds_since(t0);
  ok = ok && dt < kFourDBudgetSeconds;
  report(2, ok, "4D explicit case", detail + fmt(", %.2f s (< %.0f s)", dt, kFourDBudgetSeconds));
}

VerifyOptions suite_options(int samples) {
  VerifyOptions o;
  o.seed = kSuiteSeed;
  o.has_seed = true;
  o.samples = samples;
  o.quad_n = kGreenQuad;
  return o;
}

void criterion_3() {
  const auto s = verify_kernel_identity(suite_options(kKernelIdentityPairs));
  report(3, s.cases == 2 * kKernelIdentityPairs && s.max_residual < kKernelIdentityMax, "kernel identity",
         fmt("%d (eta, symbol) pairs over both links, max residual %.3g (< %.0e)", s.cases, s.max_residual,
             kKernelIdentityMax));
}

void criterion_4() {
  const auto b = verify_bessel(suite_options(1));
  const auto o = verify_ode(suite_options(1));
  report(4, b.max_residual < kBesselMax && o.max_residual < kOdeMax, "Bessel and ODE",
         fmt("closed-form max rel. delta %.3g (< %.0e) over %d points; ODE max rel. residual %.3g (< %.0e) over %d "
             "points",
             b.max_residual, kBesselMax, b.cases, o.max_residual, kOdeMax, o.cases));
}

void criterion_5() {
  const auto g = verify_green(suite_options(1));
  const double order = g.details["min_order"].is_number() ? g.details["min_order"].get<double>() : INFINITY;
  report(5, g.cases == 10 && g.max_residual < kGreenMax && order >= kGreenOrder, "Green's formula",
         fmt("%d pairs at quad_n %d, max residual %.3g (< %.0e), min observed order %.3g (>= %.0f)", g.cases,
             kGreenQuad, g.max_residual, kGreenMax, order, kGreenOrder));
}

void criterion_6() {
  const auto s = verify_splitting(suite_options(60));
  const int idem = s.details["idempotency_failures"].get<int>();
  const int trace = s.details["decaying_trace_pattern_failures"].get<int>();
  const double ulps = s.details["sum_to_identity_max_ulps"].get<double>();

  // complementary projections annihilate each other exactly
  std::mt19937_64 rng(kSuiteSeed);
  std::normal_distribution<double> gauss;
  int cross = 0;
  for (const auto& lat : {ModeLattice::make(1, 0.5, 0.0, 8), ModeLattice::make(1, 0.0, 0.0, 8),
                          ModeLattice::make(2, 0.0, 0.0, 8), ModeLattice::make(2, 0.5, 0.5, 8)}) {
    BoundaryField x(lat);
    for (Mode md : enumerate_modes(lat)) x.set(md, {cplx(gauss(rng), gauss(rng)), cplx(gauss(rng), gauss(rng))});
    const BoundaryField zero(lat);
    if (!(project(project(x, SubspaceTag::ExpPlus), SubspaceTag::ExpMinus) == zero)) ++cross;
    if (!(project(project(x, SubspaceTag::ExpMinus), SubspaceTag::ExpPlus) == zero)) ++cross;
    if (has_separate_zero_mode(lat) &&
        !(project(project(x, SubspaceTag::KerDSigma), SubspaceTag::ExpPlus) == zero))
      ++cross;
  }
  const bool ok = s.passed && idem == 0 && trace == 0 && cross == 0 && s.max_residual < kOrthogonalityMax;
  report(6, ok, "splitting algebra",
         fmt("idempotency failures %d (bitwise), cross-projection failures %d (bitwise), max |<P+x, P-y>| %.3g (< "
             "%.0e), sum to identity within %.2f ulp (exact in Exp coordinates), decaying-trace pattern failures "
             "%d up to N=32",
             idem, cross, s.max_residual, kOrthogonalityMax, ulps, trace));
}

void criterion_7() {
  int bad3 = 0;
  for (long long k = 0; k <= 100; ++k)
    if (virtual_dimension_ledger({0, 0, k, 0}, LedgerMode::ThreeD).virtual_dim != 0) ++bad3;
  struct Row {
    long long ahat, ks, k;
  };
  const Row table[10] = {{0, 2, 0}, {-2, 0, 1}, {1, 0, 0}, {3, 4, 2}, {-1, 2, 5},
                         {2, 6, 0}, {-4, 0, 3}, {0, 8, 1}, {5, 2, 7}, {-3, 4, 4}};
  int bad4 = 0;
  for (const Row& r : table) {
    const auto res = virtual_dimension_ledger({r.ahat, r.ks, r.k, -r.ks / 2}, LedgerMode::FourD);
    if (res.virtual_dim != r.ahat || res.index_T_circ_B != r.ahat + r.k) ++bad4;
  }
  report(7, bad3 == 0 && bad4 == 0, "ledger",
         fmt("3D virtual_dim nonzero for %d of 101 inputs k in [0, 100]; 4D virtual_dim != Ahat in %d of 10 cases",
             bad3, bad4));
}

void criterion_8() {
  const auto e = verify_eta(suite_options(kRoundTripCases));
  const auto c = verify_cokernel(suite_options(kRoundTripCases));
  const double orth = c.details["max_orthogonality_residual"].get<double>();
  report(8,
         e.cases == kRoundTripCases && c.cases == kRoundTripCases && e.max_residual < kRoundTripMax &&
             c.max_residual < kRoundTripMax && orth < kAppendixOrthogonalityMax,
         "eta and cokernel round trips",
         fmt("eta max error %.3g, cokernel max error %.3g (< %.0e) over %d cases each; orthogonality max %.3g (< "
             "%.0e)",
             e.max_residual, c.max_residual, kRoundTripMax, kRoundTripCases, orth, kAppendixOrthogonalityMax));
}

std::string strip_timestamp(const std::string& text) {
  std::istringstream is(text);
  std::string line, out;
  while (std::getline(is, line))
    if (line.find("\"timestamp\"") == std::string::npos && line.rfind("# z2index", 0) != 0) out += line + "\n";
  return out;
}

void criterion_9() {
  const auto dir = std::filesystem::temp_directory_path() / ("z2index_acceptance_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  const json index_cfg = json::parse(R"({
    "lattice": {"dim_link": 1, "offset_t": 0.5},
    "symbol": {"random": {"bandwidth": 3}},
    "seed": 424242,
    "cutoffs": [8, 16, 32]
  })");
  json sweep_cfg = index_cfg;
  sweep_cfg["cutoffs"] = {4, 8, 16};
  const json verify_cfg = json::parse(R"({"suites": ["kernel-identity", "eta", "cokernel"], "seed": 99, "samples": 5})");
  int identical = 0, total = 0;
  for (const auto& [cmd, cfg] :
       {std::pair<std::string, json>{"index", index_cfg}, {"sweep", sweep_cfg}, {"verify", verify_cfg}}) {
    std::string text[2];
    for (int rep = 0; rep < 2; ++rep) {
      CliOverrides ov;
      ov.out = (dir / (cmd + std::to_string(rep))).string();
      std::ostringstream out, err;
      run_command(cmd, cfg, ov, out, err);
      std::ifstream is(*ov.out, std::ios::binary);
      text[rep].assign(std::istreambuf_iterator<char>(is), {});
    }
    ++total;
    if (!text[0].empty() && strip_timestamp(text[0]) == strip_timestamp(text[1])) ++identical;
  }
  std::filesystem::remove_all(dir);
  report(9, identical == total, "reproducibility",
         fmt("%d/%d commands (index, sweep, verify) give byte-identical reports apart from the timestamp", identical,
             total));
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  for (auto* c : {criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7,
                  criterion_8, criterion_9}) {
    try {
      c();
    } catch (const std::exception& e) {
      std::printf("[FAIL] exception: %s\n", e.what());
      ++failures;
    }
  }
  std::printf("%d criteria failed, %.1f s total\n", failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
