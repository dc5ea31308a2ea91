#include <CLI11.hpp>
#include <iostream>
#include <map>

#include "urnlab/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"urnlab: stochastic approximation and urn model asymptotics"};
  app.require_subcommand(1, 1);
  urnlab::CommandFlags flags;
  std::string config, out, format;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  const std::map<std::string, std::string> help{
      {"analyze", "regime and limiting covariance of the configured model"},
      {"simulate", "one trajectory of the configured model"},
      {"urn", "one urn trajectory (model kind urn)"},
      {"gauss", "one path of the Gaussian approximation (model kind gauss)"},
      {"ode", "integrate the urn ODE from the configured starts (model kind ode)"},
      {"verify", "Monte Carlo check of the predicted covariance and normality"},
      {"suite", "built-in golden criteria; exit 1 if any fails"}};
  for (const auto& name : urnlab::subcommands()) {
    auto* sub = app.add_subcommand(name, help.at(name));
    sub->add_option("--config", config, "JSON config document");
    sub->add_option("--out", out, "output directory");
    sub->add_option("--seed", seed, "RNG seed (overrides the config and URNLAB_SEED)");
    sub->add_option("--threads", threads, "worker threads for replicates; results do not depend on it")
        ->check(CLI::PositiveNumber);
    sub->add_option("--format", format, "json, csv or both")->check(CLI::IsMember({"json", "csv", "both"}));
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  CLI::App* sub = app.get_subcommands().front();
  if (sub->count("--config")) flags.config_path = config;
  if (sub->count("--out")) flags.out_dir = out;
  if (sub->count("--seed")) flags.seed = seed;
  if (sub->count("--format")) flags.format = format;
  flags.threads = threads;
  return urnlab::run_command(sub->get_name(), flags, std::cout, std::cerr);
}
