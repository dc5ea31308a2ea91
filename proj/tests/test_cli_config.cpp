#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "urnlab/commands.hpp"
#include "urnlab/config.hpp"
#include "urnlab/errors.hpp"
#include "urnlab/report.hpp"

using namespace urnlab;
namespace fs = std::filesystem;

namespace {

const char* kFriedman = R"({
  "model": {"kind": "urn", "d": 2, "Y0": [1, 1],
            "adding_rule": {"kind": "deterministic", "D": [[0, 1], [1, 0]]}},
  "run": {"n": 256, "replicates": 50, "seed": 11}
})";

const char* kJordanSa = R"({
  "model": {"kind": "sa", "d": 2,
            "drift": {"kind": "linear", "matrix": [[0.8, -1], [0, 0.8]]},
            "theta_star": [0, 0], "theta0": [0, 0],
            "noise": {"kind": "gaussian", "gamma": [[1, 0], [0, 0]]}},
  "run": {"n": 512, "seed": 5}
})";

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("urnlab_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << text;
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Config, UnknownKeyReportsPointer) {
  try {
    parse_config(R"({"modle": {}})");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.pointer, "/modle");
  }
}

TEST(Config, ParseErrorReportsLine) {
  try {
    parse_config("{\n  \"run\": {,}\n}");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(Config, Defaults) {
  const ConfigDocument d = parse_config(kFriedman);
  EXPECT_EQ(d.kind, "urn");
  EXPECT_EQ(d.run.seed, 11u);
  const ConfigDocument m = parse_config("{}", false);
  EXPECT_EQ(m.run.seed, 0u);
  EXPECT_FALSE(m.run.seed_given);
  EXPECT_EQ(checkpoint_plan(m.run, 8), (std::vector<std::uint64_t>{1, 2, 4, 8}));
  EXPECT_EQ(checkpoint_plan(m.run, 10), (std::vector<std::uint64_t>{1, 2, 4, 8, 10}));
  EXPECT_THROW(parse_config("{}"), ConfigError);
}

TEST(Config, NonSquareMatrixRejected) {
  try {
    parse_config(R"({"model": {"kind": "urn", "d": 2, "Y0": [1, 1],
                  "adding_rule": {"kind": "deterministic", "D": [[0, 1, 2], [1, 0, 3]]}}})");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.pointer.rfind("/model/adding_rule/D", 0), 0u) << e.pointer;
  }
}

TEST(Config, DigestIgnoresFormatting) {
  const ConfigDocument a = parse_config(kFriedman);
  std::string compact;
  for (char c : std::string(kFriedman))
    if (c != ' ' && c != '\n') compact += c;
  EXPECT_EQ(parse_config(compact).digest, a.digest);
}

TEST(Report, CanonicalJson) {
  Json j;
  j["b"] = 0.1;
  j["a"] = std::numeric_limits<double>::infinity();
  EXPECT_EQ(canonical_json(j), "{\n  \"a\": null,\n  \"b\": 0.10000000000000001\n}\n");
}

TEST(Report, EmitCsvAndErrors) {
  const fs::path dir = scratch("emit");
  Matrix m(2, 2);
  m << 1, 2, 3, 4;
  emit_report(to_json(m), "csv", (dir / "m.csv").string());
  EXPECT_EQ(slurp(dir / "m.csv"), "1,2\n3,4\n");
  EXPECT_THROW(emit_report(to_json(m), "xml", (dir / "m.xml").string()), InvalidArgument);
  emit_report(to_json(m), "json", (dir / "a.json").string());
  emit_report(to_json(m), "json", (dir / "b.json").string());
  EXPECT_EQ(slurp(dir / "a.json"), slurp(dir / "b.json"));
}

TEST(Commands, AnalyzeFriedmanUrn) {
  const fs::path dir = scratch("analyze");
  CommandFlags f;
  f.config_path = write_config(dir, kFriedman);
  f.out_dir = (dir / "out").string();
  std::ostringstream out, err;
  ASSERT_EQ(run_command("analyze", f, out, err), 0) << err.str();
  const Json r = Json::parse(slurp(dir / "out" / "analyze.json"));
  EXPECT_EQ(r["tool"], "urnlab");
  EXPECT_EQ(r["seed"], 11);
  const Json& a = r["analysis"];
  EXPECT_EQ(a["regime"], "standard");
  EXPECT_NEAR(a["lambda_sec"].get<double>(), -1.0, 1e-10);
  const auto& s = a["sigma_tilde"];
  ASSERT_EQ(s.size(), 4u);
  Matrix m(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k) m(i, k) = s[i][k].get<double>();
  EXPECT_GE(Eigen::SelfAdjointEigenSolver<Matrix>(m).eigenvalues().minCoeff(), -1e-12);
}

TEST(Commands, SimulateIsReproducible) {
  const fs::path dir = scratch("simulate");
  CommandFlags f;
  f.config_path = write_config(dir, kJordanSa);
  std::ostringstream out, err;
  f.out_dir = (dir / "a").string();
  ASSERT_EQ(run_command("simulate", f, out, err), 0) << err.str();
  f.out_dir = (dir / "b").string();
  ASSERT_EQ(run_command("simulate", f, out, err), 0) << err.str();
  EXPECT_EQ(slurp(dir / "a" / "trajectory.csv"), slurp(dir / "b" / "trajectory.csv"));
  EXPECT_EQ(slurp(dir / "a" / "simulate.json"), slurp(dir / "b" / "simulate.json"));
  f.seed = 6;
  f.out_dir = (dir / "c").string();
  ASSERT_EQ(run_command("simulate", f, out, err), 0) << err.str();
  EXPECT_NE(slurp(dir / "a" / "trajectory.csv"), slurp(dir / "c" / "trajectory.csv"));
}

TEST(Commands, ExitCodes) {
  const fs::path dir = scratch("exit");
  CommandFlags f;
  f.out_dir = dir.string();
  std::ostringstream out, err;
  f.config_path = write_config(dir, R"({"model": {"kind": "urn"}, "bogus": 1})");
  EXPECT_EQ(run_command("analyze", f, out, err), 2);
  EXPECT_NE(err.str().find("/bogus"), std::string::npos) << err.str();
  f.config_path = (dir / "missing.json").string();
  EXPECT_EQ(run_command("analyze", f, out, err), 2);
  f.config_path = write_config(dir, kJordanSa);
  EXPECT_EQ(run_command("urn", f, out, err), 2);
}
