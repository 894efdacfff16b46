#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lcurve/cf.hpp"
#include "lcurve/kernels.hpp"
#include "lcurve/mlens.hpp"
#include "lcurve/trajectory.hpp"

// Flat `key = value` settings with dotted namespaces (higham.conv_tol).
// '#' starts a comment line. Every key has a type and a default; values are
// stored in canonical text form so manifests are stable.
namespace lcurve::config {

inline constexpr std::string_view kToolVersion = "1.0.0";

enum class ValueType { integer, unsigned_integer, real, boolean, text, family, isa };
std::string_view type_name(ValueType t);

struct KeySpec {
  std::string_view key;
  ValueType type;
  std::string_view default_value;
};

/// All recognised keys, in manifest order.
std::span<const KeySpec> keys();

struct Entry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

/// Throws ConfigError ("line N: ...") on malformed lines.
std::vector<Entry> parse_text(std::istream& in);
/// Throws IoError when the file cannot be read.
std::vector<Entry> parse_file(const std::filesystem::path& path);
/// "key=value" as given to --set.
Entry parse_assignment(std::string_view text);

class Settings {
 public:
  Settings();

  /// Unknown key: ConfigError listing valid keys. Bad value: ConfigError
  /// naming the expected type.
  void set(std::string_view key, std::string_view value);
  void apply(const std::vector<Entry>& entries);

  const std::string& raw(std::string_view key) const;
  std::int64_t integer(std::string_view key) const;
  std::uint64_t unsigned_integer(std::string_view key) const;
  double real(std::string_view key) const;
  bool boolean(std::string_view key) const;

  /// Replace simd=auto by the variant detected on this machine.
  void resolve_simd();

  TrajectoryConfig trajectory() const;
  RegimeOptions regime() const;
  cf::Hyperparams hyperparams() const;
  mlens::AccumulationConfig accumulation() const;
  mlens::SyntheticConfig synthetic() const;

  /// Runs every module validator; failures become ConfigError.
  void validate() const;

  /// Key = value lines in keys() order.
  std::string dump() const;

  friend bool operator==(const Settings&, const Settings&) = default;

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

/// Stable 16-hex-digit identifier of (command, resolved settings).
std::string run_id(std::string_view command, const Settings& s);

/// Settings dump preceded by comment lines carrying the tool version,
/// command and run id. Reading it back with parse_text yields the same settings.
std::string manifest(std::string_view command, const Settings& s);

}  // namespace lcurve::config
