#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "z2index/cli.hpp"

using namespace z2index;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = Z2INDEX_CONFIG_DIR;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(const std::string& cmd, const json& cfg, CliOverrides ov = {}) {
  std::ostringstream out, err;
  ov.base_dir = kConfigs;
  const int code = run_command(cmd, cfg, ov, out, err);
  return {code, out.str(), err.str()};
}

Outcome run_file(const std::string& cmd, const std::string& name, CliOverrides ov = {}) {
  std::ostringstream out, err;
  const int code = run_command_file(cmd, (kConfigs / name).string(), ov, out, err);
  return {code, out.str(), err.str()};
}

json config(const std::string& name) { return read_json_file(kConfigs / name); }

fs::path temp_dir() {
  const fs::path d = fs::temp_directory_path() / ("z2index_test_" + std::to_string(::getpid()));
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

// Drops lines carrying the timestamp header field.
std::string without_timestamp(const std::string& text) {
  std::istringstream is(text);
  std::string line, out;
  while (std::getline(is, line))
    if (line.find("\"timestamp\"") == std::string::npos && line.rfind("# z2index", 0) != 0) out += line + "\n";
  return out;
}

}  // namespace

TEST(CliIndex, ConstantCircleSymbol) {
  const Outcome r = run_file("index", "index_3d_constant.json");
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["report"]["index_real"], 0);
  EXPECT_TRUE(j["report"]["stable"].get<bool>());
  EXPECT_TRUE(j["expectation"]["met"].get<bool>());
}

TEST(CliIndex, TorusTrivialSpin) {
  const Outcome r = run_file("index", "index_4d_trivial_spin.json");
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["report"]["index_complex"], -1.0);
  for (const auto& k : j["report"]["dim_ker"]) EXPECT_EQ(k, 0);
}

TEST(CliIndex, VanishingSymbolIsADomainError) {
  const Outcome r = run_file("index", "index_vanishing_symbol.json");
  EXPECT_EQ(r.code, kExitInput);
  EXPECT_NE(r.err.find("nondegeneracy"), std::string::npos);
  EXPECT_TRUE(r.out.empty());
}

TEST(CliIndex, SymbolFileAndWindingDiagnostic) {
  const Outcome r = run_file("index", "index_3d_symbol_file.json");
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["diagnostics"]["winding_d_plus"], 1);
  EXPECT_EQ(j["diagnostics"]["winding_d_minus"], 0);
  EXPECT_EQ(j["report"]["index_real"], 0);
}

TEST(CliIndex, SeparatedZeroModeLeavesExpMinus) {
  // on the integer circle lattice the 'separate' policy removes the l = 0 mode from Exp-
  json cfg = config("index_3d_symbol_file.json");
  cfg["lattice"]["offset_t"] = 0.0;
  json j = json::parse(run("index", cfg).out);
  EXPECT_EQ(j["report"]["index_real"], -2);
  cfg["lattice"]["zero_mode_policy"] = "assign-minus";
  j = json::parse(run("index", cfg).out);
  EXPECT_EQ(j["report"]["index_real"], 0);
}

TEST(CliIndex, ExpectationMismatchExits2) {
  json cfg = config("index_3d_constant.json");
  cfg["expect"] = 2;
  const Outcome r = run("index", cfg);
  EXPECT_EQ(r.code, kExitFailure);
  EXPECT_FALSE(json::parse(r.out)["expectation"]["met"].get<bool>());
}

TEST(CliIndex, UnstableIndexExits2) {
  // a relative tolerance of 0.5 splits the singular values of the shift symbol without a gap
  json cfg = config("index_3d_symbol_file.json");
  cfg["svd_tolerance"] = 0.5;
  const Outcome r = run("index", cfg);
  EXPECT_EQ(r.code, kExitFailure) << r.out;
  EXPECT_FALSE(json::parse(r.out)["report"]["stable"].get<bool>());
}

TEST(CliIndex, CsvFormat) {
  json cfg = config("index_3d_constant.json");
  cfg["format"] = "csv";
  const Outcome r = run("index", cfg);
  ASSERT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("cutoff,dim_ker,dim_coker,index_real,gap\n8,0,0,0,"), std::string::npos);
}

TEST(CliIndex, ConfigErrors) {
  json cfg = config("index_3d_constant.json");
  cfg["cutofs"] = {1, 2, 3};
  EXPECT_EQ(run("index", cfg).code, kExitInput);

  cfg = config("index_3d_constant.json");
  cfg["lattice"]["offset_t"] = 0.25;
  EXPECT_EQ(run("index", cfg).code, kExitInput);

  cfg = config("index_3d_constant.json");
  cfg["cutoffs"] = {8, 16};
  EXPECT_EQ(run("index", cfg).code, kExitInput);

  cfg = config("index_3d_constant.json");
  cfg["symbol"]["d_minus"][0]["q"] = 1;
  EXPECT_EQ(run("index", cfg).code, kExitInput);

  EXPECT_EQ(run("index", json::array()).code, kExitInput);
  EXPECT_EQ(run("frobnicate", json::object()).code, kExitInput);
  EXPECT_EQ(run_file("index", "does_not_exist.json").code, kExitInput);
}

TEST(CliIndex, RandomSymbolNeedsSeed) {
  json cfg = config("index_3d_random.json");
  cfg.erase("seed");
  cfg["cutoffs"] = {4, 8, 16};
  cfg.erase("expect");
  const Outcome r = run("index", cfg);
  EXPECT_EQ(r.code, kExitInput);
  EXPECT_NE(r.err.find("seed"), std::string::npos);

  CliOverrides ov;
  ov.seed = 3;
  const Outcome s = run("index", cfg, ov);
  EXPECT_NE(s.code, kExitInput) << s.err;
  EXPECT_EQ(json::parse(s.out)["config"]["seed"], 3);
}

TEST(CliIndex, SeedOverrideChangesTheSymbol) {
  json cfg = config("index_3d_random.json");
  cfg["cutoffs"] = {4, 8, 16};
  cfg.erase("expect");
  CliOverrides a, b;
  a.seed = 1;
  b.seed = 2;
  EXPECT_NE(json::parse(run("index", cfg, a).out)["symbol"], json::parse(run("index", cfg, b).out)["symbol"]);
}

TEST(CliIndex, MatrixDump) {
  const fs::path dir = temp_dir();
  json cfg = config("index_3d_constant.json");
  cfg["dump_matrix"] = (dir / "T.csv").string();
  ASSERT_EQ(run("index", cfg).code, kExitOk);
  const std::string csv = slurp(dir / "T.csv");
  // N = 32 on the half-integer circle: 64 modes, realified to 128 columns and rows
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 128);
  fs::remove_all(dir);
}

TEST(CliSweep, FixedColumnsAndRows) {
  const Outcome r = run_file("sweep", "sweep_3d_random.json");
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::istringstream is(r.out);
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line.rfind("# z2index sweep", 0), 0u);
  std::getline(is, line);
  EXPECT_EQ(line, "cutoff,dim_ker,dim_coker,index_real,gap");
  std::vector<int> cutoffs, index;
  while (std::getline(is, line)) {
    std::istringstream row(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    ASSERT_EQ(cells.size(), 5u);
    cutoffs.push_back(std::stoi(cells[0]));
    index.push_back(std::stoi(cells[3]));
  }
  EXPECT_EQ(cutoffs, (std::vector<int>{4, 8, 16, 32}));
  EXPECT_EQ(index.back(), 0);
}

TEST(CliSweep, SingleCutoffIsInsufficient) {
  const Outcome r = run_file("sweep", "sweep_single_cutoff.json");
  EXPECT_EQ(r.code, kExitInput);
  EXPECT_NE(r.err.find("at least 2"), std::string::npos);
}

TEST(CliSweep, TwoCutoffsAreEnough) {
  json cfg = config("sweep_single_cutoff.json");
  cfg["cutoffs"] = {4, 8};
  EXPECT_EQ(run("sweep", cfg).code, kExitOk);
}

TEST(CliLedger, Examples) {
  Outcome r = run_file("ledger", "ledger_3d.json");
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("= -3 + 3 = 0\n"), std::string::npos) << r.out;

  r = run_file("ledger", "ledger_4d_torus.json");
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("dim K0 - dim K1 = index(T o B) - dim ker(D-|L2_1) = 0 - 0 = 0"), std::string::npos);

  r = run_file("ledger", "ledger_4d_odd.json");
  EXPECT_EQ(r.code, kExitInput);
  EXPECT_NE(r.err.find("even"), std::string::npos);
}

TEST(CliLedger, ReportFileAndMissingInputs) {
  const fs::path dir = temp_dir();
  CliOverrides ov;
  ov.out = (dir / "ledger.json").string();
  ASSERT_EQ(run_file("ledger", "ledger_4d_torus.json", ov).code, kExitOk);
  const json j = json::parse(slurp(dir / "ledger.json"));
  EXPECT_EQ(j["virtual_dim"], 0);
  EXPECT_EQ(j["index_T_circ_B"], 0);
  fs::remove_all(dir);

  EXPECT_EQ(run("ledger", json{{"mode", "4D"}, {"dim_ker_Dminus_L21", 0}}).code, kExitInput);
  EXPECT_EQ(run("ledger", json{{"mode", "5D"}, {"dim_ker_Dminus_L21", 0}}).code, kExitInput);
}

TEST(CliVerify, GreenAndBessel) {
  Outcome r = run_file("verify", "verify_green.json");
  ASSERT_EQ(r.code, kExitOk) << r.err;
  json j = json::parse(r.out);
  EXPECT_LT(j["suites"][0]["max_residual"].get<double>(), 1e-8);
  EXPECT_EQ(j["suites"][0]["cases"], 10);

  r = run_file("verify", "verify_bessel.json");
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_LT(json::parse(r.out)["suites"][0]["max_residual"].get<double>(), 1e-12);
}

TEST(CliVerify, KernelIdentitySeeded) {
  const Outcome r = run_file("verify", "verify_kernel_identity.json");
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const json s = json::parse(r.out)["suites"][0];
  EXPECT_EQ(s["cases"], 100);
  EXPECT_LT(s["max_residual"].get<double>(), 1e-13);
}

TEST(CliVerify, RandomizedSuiteNeedsSeed) {
  const Outcome r = run("verify", json{{"suites", {"eta"}}});
  EXPECT_EQ(r.code, kExitInput);
  EXPECT_NE(r.err.find("seed"), std::string::npos);
  EXPECT_EQ(run("verify", json{{"suites", {"nope"}}}).code, kExitInput);
  EXPECT_EQ(run("verify", json{{"suites", {"bessel"}}, {"extra", 1}}).code, kExitInput);
}

TEST(CliVerify, FailingCaseIsSerialized) {
  // two-point quadrature cannot meet the Green tolerance
  const Outcome r = run("verify", json{{"suites", {"green"}}, {"quad_n", 2}});
  EXPECT_EQ(r.code, kExitFailure);
  const json s = json::parse(r.out)["suites"][0];
  EXPECT_FALSE(s["passed"].get<bool>());
  ASSERT_TRUE(s.contains("failing_case"));
  EXPECT_EQ(s["failing_case"]["quad_n"], 2);
  EXPECT_TRUE(s["failing_case"].contains("v"));
}

TEST(CliReproducibility, ByteIdenticalModuloTimestamp) {
  const fs::path dir = temp_dir();
  for (const std::string name : {"index_3d_random.json", "sweep_3d_random.json"}) {
    const std::string cmd = name.rfind("index", 0) == 0 ? "index" : "sweep";
    CliOverrides a, b;
    a.out = (dir / "a.out").string();
    b.out = (dir / "b.out").string();
    ASSERT_EQ(run_file(cmd, name, a).code, kExitOk);
    ASSERT_EQ(run_file(cmd, name, b).code, kExitOk);
    const std::string x = slurp(dir / "a.out"), y = slurp(dir / "b.out");
    EXPECT_FALSE(x.empty());
    EXPECT_EQ(without_timestamp(x), without_timestamp(y)) << name;
  }
  for (const auto& e : fs::directory_iterator(dir))
    EXPECT_EQ(e.path().filename().string().find(".tmp."), std::string::npos) << "stray temp file " << e.path();
  fs::remove_all(dir);
}

TEST(CliBinary, ExitCodes) {
  auto status = [](const std::string& args) {
    const std::string cmd = std::string(Z2INDEX_BINARY) + " " + args + " >/dev/null 2>&1";
    const int s = std::system(cmd.c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  const std::string dir = kConfigs.string();
  EXPECT_EQ(status("--help"), 0);
  EXPECT_EQ(status(""), 1);
  EXPECT_EQ(status("index"), 1);
  EXPECT_EQ(status("index --config " + dir + "/index_3d_constant.json"), 0);
  EXPECT_EQ(status("index --config " + dir + "/index_vanishing_symbol.json"), 1);
  EXPECT_EQ(status("ledger --config " + dir + "/ledger_4d_odd.json"), 1);
  EXPECT_EQ(status("sweep --config " + dir + "/sweep_single_cutoff.json"), 1);
  EXPECT_EQ(status("index --config " + dir + "/index_3d_random.json --seed-override 99 --out /dev/null"), 0);
}
