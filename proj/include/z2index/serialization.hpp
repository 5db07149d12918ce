#pragma once

// JSON encoding of lattices, symbols, fields and index reports, plus atomic
// file output. Non-finite doubles are written as the strings "inf", "-inf",
// "nan".

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <unistd.h>

#include "json.hpp"  // vendored nlohmann/json

#include "z2index/boundary_spaces.hpp"
#include "z2index/index_engine.hpp"
#include "z2index/symbol.hpp"

namespace z2index {

using json = nlohmann::ordered_json;

/// Rejects keys of j not in allowed; where names the object in the message.
inline void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.contains(k)) throw ConfigError(where + ": unknown key '" + k + "'");
}

template <class T>
T get_or(const json& j, const std::string& key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + ": key '" + key + "' has the wrong type");
  }
}

template <class T>
T get_required(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
  return get_or<T>(j, key, T{}, where);
}

inline json json_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

inline double double_from_json(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j == "inf") return INFINITY;
  if (j == "-inf") return -INFINITY;
  if (j == "nan") return NAN;
  throw ConfigError("expected a number");
}

inline json complex_to_json(cplx c) { return json::array({json_double(c.real()), json_double(c.imag())}); }

inline cplx complex_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2) throw ConfigError("complex value must be [re, im] or a real number");
  return {double_from_json(j[0]), double_from_json(j[1])};
}

inline int doubled_coordinate(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + ": mode coordinate must be a number");
  const double twice = 2.0 * j.get<double>();
  if (twice != std::round(twice)) throw ConfigError(where + ": mode coordinate must be a multiple of 1/2");
  return static_cast<int>(twice);
}

// ---------------------------------------------------------------------------

inline json lattice_to_json(const ModeLattice& lat) {
  json j;
  j["dim_link"] = lat.dim_link;
  j["offset_t"] = lat.offset_t();
  if (lat.dim_link == 2) j["offset_s"] = lat.offset_s();
  j["cutoff"] = lat.cutoff;
  j["zero_mode_policy"] = to_string(lat.zero_mode_policy);
  return j;
}

/// cutoff is optional in configs (the index commands take cutoff lists).
inline ModeLattice lattice_from_json(const json& j, int default_cutoff = 1) {
  const std::string w = "lattice";
  check_keys(j, {"dim_link", "offset_t", "offset_s", "cutoff", "zero_mode_policy"}, w);
  const int dim = get_required<int>(j, "dim_link", w);
  if (dim == 1 && j.contains("offset_s")) throw ConfigError("lattice: offset_s is only valid for dim_link 2");
  return ModeLattice::make(dim, get_or<double>(j, "offset_t", 0.0, w), get_or<double>(j, "offset_s", 0.0, w),
                           get_or<int>(j, "cutoff", default_cutoff, w),
                           zero_mode_policy_from_string(get_or<std::string>(j, "zero_mode_policy", "separate", w)));
}

inline json trig_poly_to_json(const TrigPoly& p) {
  json arr = json::array();
  for (const auto& [md, c] : p.coeffs) {
    json e;
    e["l"] = md.l2 / 2;
    if (p.dim_link == 2) e["m"] = md.m2 / 2;
    e["c"] = complex_to_json(c);
    arr.push_back(std::move(e));
  }
  return arr;
}

inline TrigPoly trig_poly_from_json(const json& j, int dim_link, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected a list of {l, m, c} terms");
  TrigPoly p{dim_link, {}};
  for (const auto& e : j) {
    check_keys(e, {"l", "m", "c"}, where);
    if (!e.contains("l") || !e.contains("c")) throw ConfigError(where + ": each term needs 'l' and 'c'");
    if (!e["l"].is_number_integer() || (e.contains("m") && !e["m"].is_number_integer()))
      throw ConfigError(where + ": symbol modes must be integers");
    const int l = e["l"].get<int>(), m = e.value("m", 0);
    if (dim_link == 1 && m != 0) throw ConfigError(where + ": circle symbol with m != 0");
    const Mode md{2 * l, 2 * m};
    if (p.coeffs.contains(md)) throw ConfigError(where + ": duplicate mode");
    p.coeffs[md] = complex_from_json(e["c"]);
  }
  p.validate();
  return p;
}

inline json symbol_to_json(const SymbolData& sym) {
  json j;
  j["d_plus"] = trig_poly_to_json(sym.d_plus);
  j["d_minus"] = trig_poly_to_json(sym.d_minus);
  return j;
}

inline SymbolData symbol_from_json(const json& j, int dim_link) {
  check_keys(j, {"d_plus", "d_minus"}, "symbol");
  if (!j.contains("d_plus") || !j.contains("d_minus")) throw ConfigError("symbol: needs 'd_plus' and 'd_minus'");
  return {trig_poly_from_json(j["d_plus"], dim_link, "symbol.d_plus"),
          trig_poly_from_json(j["d_minus"], dim_link, "symbol.d_minus")};
}

inline json field_to_json(const BoundaryField& f) {
  json j;
  j["lattice"] = lattice_to_json(f.lattice());
  json arr = json::array();
  for (const auto& [md, x] : f.coefficients()) {
    json e;
    e["l"] = md.l();
    if (f.lattice().dim_link == 2) e["m"] = md.m();
    e["c1"] = complex_to_json(x[0]);
    e["c2"] = complex_to_json(x[1]);
    arr.push_back(std::move(e));
  }
  j["coeffs"] = std::move(arr);
  return j;
}

inline BoundaryField field_from_json(const json& j) {
  check_keys(j, {"lattice", "coeffs"}, "field");
  if (!j.contains("lattice") || !j.contains("coeffs")) throw ConfigError("field: needs 'lattice' and 'coeffs'");
  BoundaryField f(lattice_from_json(j["lattice"]));
  for (const auto& e : j["coeffs"]) {
    check_keys(e, {"l", "m", "c1", "c2"}, "field.coeffs");
    if (!e.contains("l")) throw ConfigError("field.coeffs: missing 'l'");
    const Mode md{doubled_coordinate(e["l"], "field"), e.contains("m") ? doubled_coordinate(e["m"], "field") : 0};
    f.set(md, {e.contains("c1") ? complex_from_json(e["c1"]) : cplx{},
               e.contains("c2") ? complex_from_json(e["c2"]) : cplx{}});
  }
  return f;
}

inline json scalar_field_to_json(const ScalarField& f, int dim_link) {
  json arr = json::array();
  for (const auto& [md, c] : f) {
    json e;
    e["l"] = md.l();
    if (dim_link == 2) e["m"] = md.m();
    e["c"] = complex_to_json(c);
    arr.push_back(std::move(e));
  }
  return arr;
}

inline json index_report_to_json(const IndexReport& r) {
  json j;
  j["cutoffs"] = r.cutoffs;
  j["dim_ker"] = r.dim_ker;
  j["dim_coker"] = r.dim_coker;
  j["index_per_cutoff"] = r.index_per_cutoff;
  json gaps = json::array();
  for (double g : r.spectral_gap) gaps.push_back(json_double(g));
  j["spectral_gap"] = std::move(gaps);
  j["index_real"] = r.index_real;
  j["index_complex"] = r.index_complex;
  j["stable"] = r.stable;
  j["odd_index"] = r.odd_index;
  j["svd_tolerance"] = r.svd_tolerance;
  return j;
}

// ---------------------------------------------------------------------------

inline std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Writes content to a sibling temp file, then renames it over path.
inline void write_atomic(const std::string& path, const std::string& content) {
  const std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("cannot open '" + tmp.string() + "' for writing");
    os << content;
    os.flush();
    if (!os) throw ConfigError("failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw ConfigError("cannot move report into place at '" + path + "': " + ec.message());
  }
}

}  // namespace z2index
