#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "urnlab/appendix.hpp"

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int run_cli_suite(const std::string& cli, const fs::path& dir, unsigned threads) {
  fs::create_directories(dir);
  const std::string cmd = "\"" + cli + "\" suite --seed 0 --threads " + std::to_string(threads) + " --out \"" +
                          dir.string() + "\" > \"" + (dir / "stdout.txt").string() + "\" 2> \"" +
                          (dir / "stderr.txt").string() + "\"";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

int determinism(const std::string& cli, const fs::path& work) {
  fs::remove_all(work);
  const int rc1 = run_cli_suite(cli, work / "threads1", 1);
  const int rc4 = run_cli_suite(cli, work / "threads4", 4);
  const fs::path a = work / "threads1" / "suite.json", b = work / "threads4" / "suite.json";
  const bool have = fs::exists(a) && fs::exists(b);
  const bool same = have && slurp(a) == slurp(b);
  const bool codes = (rc1 == 0 || rc1 == 1) && rc1 == rc4;
  std::printf("criterion 13 (suite_determinism): %s  exit codes %d/%d, %s\n", same && codes ? "PASS" : "FAIL", rc1,
              rc4, !have ? "suite.json missing" : same ? "suite.json byte-identical" : "suite.json differs");
  return same && codes ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <1..13> [--cli PATH --workdir DIR] [--seed S] [--threads N]\n");
    return 2;
  }
  const int id = std::atoi(argv[1]);
  std::string cli, workdir = "determinism";
  urnlab::SuiteOptions opt;
  for (int i = 2; i + 1 < argc; i += 2) {
    const std::string k = argv[i];
    if (k == "--cli") cli = argv[i + 1];
    else if (k == "--workdir") workdir = argv[i + 1];
    else if (k == "--seed") opt.seed = std::strtoull(argv[i + 1], nullptr, 10);
    else if (k == "--threads") opt.threads = static_cast<unsigned>(std::atoi(argv[i + 1]));
  }
  if (id == 13) {
    if (cli.empty()) {
      std::fprintf(stderr, "criterion 13 needs --cli\n");
      return 2;
    }
    return determinism(cli, workdir);
  }
  try {
    const urnlab::CriterionResult r = urnlab::run_criterion(id, opt);
    std::cout << urnlab::canonical_json(r.metrics);
    std::printf("criterion %d (%s): %s\n", r.id, r.name.c_str(), r.pass ? "PASS" : "FAIL");
    return r.pass ? 0 : 1;
  } catch (const std::exception& e) {
    std::printf("criterion %d: FAIL  error: %s\n", id, e.what());
    return 1;
  }
}
