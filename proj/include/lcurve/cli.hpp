#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lcurve/config.hpp"

namespace lcurve::cli {

enum class Command { simulate, verify, theory, cf_train, cf_eval, accumulate, ingest_summary, plot };
std::string_view to_string(Command c);
std::optional<Command> parse_command(std::string_view name);

struct RunConfig {
  Command command = Command::simulate;
  /// Empty: defaults only.
  std::filesystem::path config_path;
  std::filesystem::path out_dir = "out";
  std::optional<std::uint64_t> seed;
  /// key=value, applied after the file in order.
  std::vector<std::string> overrides;
  std::optional<std::string> ratings;
  std::optional<int> threads;
};

struct Resolved {
  RunConfig run;
  config::Settings settings;
  std::string run_id;
};

/// Defaults, then the config file, then --set overrides, then the dedicated
/// flags. Validated; throws ConfigError or IoError.
Resolved parse_config(const RunConfig& rc);

struct Artifacts {
  std::filesystem::path out_dir;
  std::vector<std::filesystem::path> files;
};

/// Output directory for a run: `base` unless it already holds a manifest for
/// this command, in which case a run-<UTC time>-s<seed> subdirectory is used.
std::filesystem::path resolve_out_dir(const std::filesystem::path& base, Command c, std::uint64_t seed);

/// Runs the command and writes its artifacts. Module errors propagate.
/// Progress and warnings go to `log`.
Artifacts execute(const Resolved& r, std::ostream& log);

struct Failure {
  int exit_code = 1;
  std::string kind;
};
/// 2 config/argument/precondition, 3 numerical, 4 I/O or bad input data.
Failure classify(std::exception_ptr e);

/// One machine-parsable line (no trailing newline):
/// error code=<n> kind=<kind> module=<m> command=<c> run_id=<id> message="<text>"
std::string error_line(const Failure& f, std::string_view module, std::string_view command, std::string_view run_id,
                       std::string_view message);

/// parse_config + execute with error mapping. Returns the exit status.
int run(const RunConfig& rc, std::ostream& out, std::ostream& err);

/// Full argument-vector front end (args[0] is the program name).
int main(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace lcurve::cli
