#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace urnlab {

struct CommandFlags {
  std::optional<std::string> config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  std::optional<std::string> format;  // json | csv | both
};

const std::vector<std::string>& subcommands();

/// Exit code: 0 success, 1 verification failure, 2 configuration or input error.
int run_command(const std::string& subcommand, const CommandFlags& flags, std::ostream& out, std::ostream& err);

}  // namespace urnlab
