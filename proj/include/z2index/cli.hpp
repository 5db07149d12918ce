#pragma once

// Command implementations behind the z2index executable. Argument parsing
// lives in tools/z2index.cpp; everything here takes a parsed JSON config.
//
// Exit codes: 0 success, 1 input or domain error, 2 verification or
// stability failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "z2index/ledger.hpp"
#include "z2index/serialization.hpp"
#include "z2index/verify.hpp"

namespace z2index {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitFailure = 2;

struct CliOverrides {
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::filesystem::path base_dir = ".";  // for relative symbol_file paths
};

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open '" + path.string() + "'");
  try {
    return json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

namespace detail {

struct IndexSetup {
  ModeLattice lattice;
  SymbolData symbol;
  std::vector<int> cutoffs;
  SubspaceTag tag = SubspaceTag::ExpMinus;
  double tol = kDefaultSvdTolerance;
  std::string format = "json";
  std::optional<std::string> dump_matrix;
};

inline std::optional<std::uint64_t> effective_seed(const json& cfg, const CliOverrides& ov) {
  if (ov.seed) return ov.seed;
  if (!cfg.contains("seed")) return std::nullopt;
  if (!cfg["seed"].is_number_unsigned()) throw ConfigError("seed must be a nonnegative integer");
  return cfg["seed"].get<std::uint64_t>();
}

inline SymbolData symbol_from_config(const json& cfg, const ModeLattice& lat, const CliOverrides& ov) {
  if (cfg.contains("symbol") == cfg.contains("symbol_file"))
    throw ConfigError("config needs exactly one of 'symbol' and 'symbol_file'");
  json j;
  if (cfg.contains("symbol_file")) {
    if (!cfg["symbol_file"].is_string()) throw ConfigError("symbol_file must be a path");
    std::filesystem::path p = cfg["symbol_file"].get<std::string>();
    j = read_json_file(p.is_absolute() ? p : ov.base_dir / p);
  } else {
    j = cfg["symbol"];
  }
  if (j.is_object() && j.contains("random")) {
    check_keys(j, {"random"}, "symbol");
    check_keys(j["random"], {"bandwidth"}, "symbol.random");
    const auto seed = effective_seed(cfg, ov);
    if (!seed) throw ConfigError("a random symbol needs a seed");
    const int W = get_required<int>(j["random"], "bandwidth", "symbol.random");
    if (W < 0) throw ConfigError("symbol.random: bandwidth must be >= 0");
    std::mt19937_64 rng(*seed);
    return random_symbol(lat.dim_link, W, rng);
  }
  return symbol_from_json(j, lat.dim_link);
}

inline IndexSetup index_setup(const json& cfg, const CliOverrides& ov, const std::string& cmd) {
  check_keys(cfg,
             {"lattice", "symbol", "symbol_file", "cutoffs", "domain_tag", "svd_tolerance", "seed", "expect",
              "expect_complex", "format", "output", "dump_matrix"},
             cmd);
  if (cmd == "sweep" && (cfg.contains("expect") || cfg.contains("expect_complex")))
    throw ConfigError("sweep: expectations belong to the index command");
  IndexSetup s;
  if (!cfg.contains("lattice")) throw ConfigError(cmd + ": missing key 'lattice'");
  s.cutoffs = get_required<std::vector<int>>(cfg, "cutoffs", cmd);
  const int top = s.cutoffs.empty() ? 1 : std::max(1, *std::max_element(s.cutoffs.begin(), s.cutoffs.end()));
  s.lattice = lattice_from_json(cfg["lattice"], top);
  s.symbol = symbol_from_config(cfg, s.lattice, ov);
  s.tag = subspace_tag_from_string(get_or<std::string>(cfg, "domain_tag", "ExpMinus", cmd));
  s.tol = get_or<double>(cfg, "svd_tolerance", kDefaultSvdTolerance, cmd);
  if (!(s.tol > 0.0 && s.tol < 1.0)) throw ConfigError(cmd + ": svd_tolerance must lie in (0, 1)");
  s.format = get_or<std::string>(cfg, "format", cmd == "sweep" ? "csv" : "json", cmd);
  if (s.format != "json" && s.format != "csv") throw ConfigError(cmd + ": format must be 'json' or 'csv'");
  if (cfg.contains("dump_matrix")) s.dump_matrix = get_required<std::string>(cfg, "dump_matrix", cmd);
  return s;
}

inline json header(const std::string& cmd) {
  json h;
  h["tool"] = "z2index";
  h["command"] = cmd;
  h["timestamp"] = utc_timestamp();
  return h;
}

inline std::string csv_table(const std::string& cmd, const IndexReport& rep) {
  std::ostringstream os;
  os.precision(17);
  os << "# z2index " << cmd << " " << utc_timestamp() << "\n";
  os << "cutoff,dim_ker,dim_coker,index_real,gap\n";
  for (std::size_t i = 0; i < rep.cutoffs.size(); ++i) {
    os << rep.cutoffs[i] << "," << rep.dim_ker[i] << "," << rep.dim_coker[i] << "," << rep.index_per_cutoff[i]
       << ",";
    if (std::isinf(rep.spectral_gap[i]))
      os << "inf";
    else
      os << rep.spectral_gap[i];
    os << "\n";
  }
  return os.str();
}

inline std::optional<std::string> output_path(const json& cfg, const CliOverrides& ov) {
  if (ov.out) return ov.out;
  if (cfg.contains("output")) {
    if (!cfg["output"].is_string()) throw ConfigError("output must be a path");
    return cfg["output"].get<std::string>();
  }
  return std::nullopt;
}

inline void emit(const std::string& text, const json& cfg, const CliOverrides& ov, std::ostream& out) {
  if (const auto path = output_path(cfg, ov))
    write_atomic(*path, text);
  else
    out << text;
}

inline json echo_config(json cfg, const CliOverrides& ov) {
  if (ov.seed) cfg["seed"] = *ov.seed;
  cfg.erase("output");
  return cfg;
}

inline json symbol_diagnostics(const SymbolData& sym) {
  json d;
  d["nondegeneracy_grid_min"] = check_nondegeneracy(sym).min_value;
  if (sym.dim_link() == 1) {
    auto w = [](const TrigPoly& p) -> json {
      const auto n = winding_number(p);
      return n ? json(*n) : json(nullptr);
    };
    d["winding_d_plus"] = w(sym.d_plus);
    d["winding_d_minus"] = w(sym.d_minus);
  }
  return d;
}

inline void maybe_dump(const IndexSetup& s) {
  if (!s.dump_matrix) return;
  const auto op = build_T(s.symbol, s.lattice, s.cutoffs.back(), s.tag);
  write_atomic(*s.dump_matrix, matrix_csv(op));
}

}  // namespace detail

inline int cmd_index(const json& cfg, const CliOverrides& ov, std::ostream& out, std::ostream& err) {
  const auto s = detail::index_setup(cfg, ov, "index");
  const IndexReport rep = stabilized_index(s.symbol, s.lattice, s.cutoffs, s.tag, s.tol);
  detail::maybe_dump(s);

  bool met = true;
  json expectation = json::object();
  if (cfg.contains("expect")) {
    const int want = get_required<int>(cfg, "expect", "index");
    expectation["expect"] = want;
    met = met && rep.index_real == want;
  }
  if (cfg.contains("expect_complex")) {
    const double want = get_required<double>(cfg, "expect_complex", "index");
    expectation["expect_complex"] = want;
    met = met && rep.index_complex == want;
  }
  if (!expectation.empty()) expectation["met"] = met;

  if (s.format == "csv") {
    detail::emit(detail::csv_table("index", rep), cfg, ov, out);
  } else {
    json j;
    j["header"] = detail::header("index");
    j["config"] = detail::echo_config(cfg, ov);
    j["symbol"] = symbol_to_json(s.symbol);
    j["report"] = index_report_to_json(rep);
    j["diagnostics"] = detail::symbol_diagnostics(s.symbol);
    if (!expectation.empty()) j["expectation"] = expectation;
    detail::emit(j.dump(2) + "\n", cfg, ov, out);
  }
  if (!rep.stable) {
    err << "index: not stable over cutoffs (index_real " << rep.index_real << ")\n";
    return kExitFailure;
  }
  if (!met) {
    err << "index: stable index " << rep.index_real << " does not match the expectation\n";
    return kExitFailure;
  }
  return kExitOk;
}

inline int cmd_sweep(const json& cfg, const CliOverrides& ov, std::ostream& out, std::ostream& /*err*/) {
  const auto s = detail::index_setup(cfg, ov, "sweep");
  if (s.cutoffs.size() < 2) throw ConfigError("sweep: needs at least 2 cutoffs");
  const IndexReport rep = summarize_cutoffs(cutoff_sweep(s.symbol, s.lattice, s.cutoffs, s.tag, s.tol), s.tol);
  detail::maybe_dump(s);
  if (s.format == "csv") {
    detail::emit(detail::csv_table("sweep", rep), cfg, ov, out);
  } else {
    json j;
    j["header"] = detail::header("sweep");
    j["config"] = detail::echo_config(cfg, ov);
    j["symbol"] = symbol_to_json(s.symbol);
    j["report"] = index_report_to_json(rep);
    detail::emit(j.dump(2) + "\n", cfg, ov, out);
  }
  return kExitOk;
}

inline int cmd_verify(const json& cfg, const CliOverrides& ov, std::ostream& out, std::ostream& err) {
  check_keys(cfg, {"suites", "seed", "samples", "quad_n", "green_radius", "output"}, "verify");
  const auto suites = get_or<std::vector<std::string>>(cfg, "suites", suite_names(), "verify");
  if (suites.empty()) throw ConfigError("verify: no suites requested");
  for (const auto& n : suites)
    if (std::find(suite_names().begin(), suite_names().end(), n) == suite_names().end())
      throw ConfigError("verify: unknown suite '" + n + "'");
  VerifyOptions o;
  if (const auto seed = detail::effective_seed(cfg, ov)) {
    o.seed = *seed;
    o.has_seed = true;
  }
  o.samples = get_or<int>(cfg, "samples", o.samples, "verify");
  o.quad_n = get_or<int>(cfg, "quad_n", o.quad_n, "verify");
  o.green_radius = get_or<double>(cfg, "green_radius", o.green_radius, "verify");
  if (o.samples < 1) throw ConfigError("verify: samples must be >= 1");
  if (o.quad_n < 2) throw ConfigError("verify: quad_n must be >= 2");
  for (const auto& n : suites)
    if (suite_is_randomized(n) && !o.has_seed) throw ConfigError("verify: suite '" + n + "' needs a seed");

  json results = json::array();
  bool all = true;
  for (const auto& n : suites) {
    const SuiteResult r = run_suite(n, o);
    all = all && r.passed;
    if (!r.passed) err << "verify: suite '" << n << "' failed (max residual " << r.max_residual << ")\n";
    results.push_back(suite_to_json(r));
  }
  json j;
  j["header"] = detail::header("verify");
  j["config"] = detail::echo_config(cfg, ov);
  j["all_passed"] = all;
  j["suites"] = std::move(results);
  detail::emit(j.dump(2) + "\n", cfg, ov, out);
  return all ? kExitOk : kExitFailure;
}

inline int cmd_ledger(const json& cfg, const CliOverrides& ov, std::ostream& out, std::ostream& /*err*/) {
  check_keys(cfg, {"mode", "Ahat_integral", "dim_ker_DSigma", "dim_ker_Dminus_L21", "index_T_exp_minus", "output"},
             "ledger");
  const auto mode_s = get_required<std::string>(cfg, "mode", "ledger");
  if (mode_s != "3D" && mode_s != "4D") throw ConfigError("ledger: mode must be '3D' or '4D'");
  const LedgerMode mode = mode_s == "3D" ? LedgerMode::ThreeD : LedgerMode::FourD;
  LedgerInput in;
  in.dim_ker_Dminus_L21 = get_required<long long>(cfg, "dim_ker_Dminus_L21", "ledger");
  if (mode == LedgerMode::FourD) {
    in.Ahat_integral = get_required<long long>(cfg, "Ahat_integral", "ledger");
    in.dim_ker_DSigma = get_required<long long>(cfg, "dim_ker_DSigma", "ledger");
    in.index_T_exp_minus = get_required<long long>(cfg, "index_T_exp_minus", "ledger");
  } else {
    in.Ahat_integral = get_or<long long>(cfg, "Ahat_integral", 0, "ledger");
  }
  const LedgerResult r = virtual_dimension_ledger(in, mode);
  for (const auto& line : r.chain) out << line << "\n";
  if (const auto path = detail::output_path(cfg, ov)) {
    json j;
    j["header"] = detail::header("ledger");
    j["config"] = detail::echo_config(cfg, ov);
    j["index_T_circ_B"] = r.index_T_circ_B;
    j["virtual_dim"] = r.virtual_dim;
    j["chain"] = r.chain;
    write_atomic(*path, j.dump(2) + "\n");
  }
  return kExitOk;
}

/// Dispatch with the exit-code contract; diagnostics go to err.
inline int run_command(const std::string& cmd, const json& cfg, const CliOverrides& ov, std::ostream& out,
                       std::ostream& err) {
  try {
    if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
    if (cmd == "index") return cmd_index(cfg, ov, out, err);
    if (cmd == "sweep") return cmd_sweep(cfg, ov, out, err);
    if (cmd == "verify") return cmd_verify(cfg, ov, out, err);
    if (cmd == "ledger") return cmd_ledger(cfg, ov, out, err);
    throw ConfigError("unknown command '" + cmd + "'");
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitInput;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << "\n";
    return kExitInput;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kExitFailure;
  } catch (const nlohmann::json::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
}

/// Reads the config file, then dispatches; relative symbol_file paths resolve
/// against the config's directory.
inline int run_command_file(const std::string& cmd, const std::string& config_path, CliOverrides ov,
                            std::ostream& out, std::ostream& err) {
  json cfg;
  try {
    cfg = read_json_file(config_path);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitInput;
  }
  ov.base_dir = std::filesystem::path(config_path).parent_path();
  if (ov.base_dir.empty()) ov.base_dir = ".";
  return run_command(cmd, cfg, ov, out, err);
}

}  // namespace z2index
