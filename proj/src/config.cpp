#include "lcurve/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>

#include <boost/algorithm/string/trim.hpp>
#include <fmt/format.h>

#include "lcurve/errors.hpp"

namespace lcurve::config {

namespace {

constexpr std::array kKeys{
    KeySpec{"K", ValueType::integer, "100"},
    KeySpec{"N", ValueType::integer, "100"},
    KeySpec{"seed", ValueType::unsigned_integer, "1"},
    KeySpec{"threads", ValueType::integer, "1"},
    KeySpec{"simd", ValueType::isa, "auto"},
    KeySpec{"family", ValueType::family, "student_t"},
    KeySpec{"mean", ValueType::real, "0.5"},
    KeySpec{"sigma", ValueType::real, "0.1"},
    KeySpec{"dof", ValueType::real, "1000"},
    KeySpec{"shape1", ValueType::real, "2"},
    KeySpec{"shape2", ValueType::real, "2"},
    KeySpec{"log_sigma", ValueType::real, "0.5"},
    KeySpec{"higham.conv_tol", ValueType::real, "1e-07"},
    KeySpec{"higham.max_iter", ValueType::integer, "200"},
    KeySpec{"higham.min_eig", ValueType::real, "1e-08"},
    KeySpec{"condvar.pivot_tol", ValueType::real, "1e-10"},
    KeySpec{"condvar.audit_interval", ValueType::integer, "25"},
    KeySpec{"condvar.audit_tol", ValueType::real, "1e-08"},
    KeySpec{"regime.band_mult", ValueType::real, "2"},
    KeySpec{"regime.smooth_window", ValueType::integer, "5"},
    KeySpec{"regime.mse_floor", ValueType::real, "1e-06"},
    KeySpec{"regime.min_run", ValueType::integer, "2"},
    KeySpec{"verify.k_max", ValueType::integer, "10"},
    KeySpec{"theory.rho_bar", ValueType::real, "0.5"},
    KeySpec{"theory.k_max", ValueType::integer, "99"},
    KeySpec{"cf.n_factors", ValueType::integer, "100"},
    KeySpec{"cf.n_epochs", ValueType::integer, "20"},
    KeySpec{"cf.lr", ValueType::real, "0.005"},
    KeySpec{"cf.reg", ValueType::real, "0.02"},
    KeySpec{"cf.init_std", ValueType::real, "0.1"},
    KeySpec{"cf.clip_min", ValueType::real, "1"},
    KeySpec{"cf.clip_max", ValueType::real, "5"},
    KeySpec{"cf.clip_predictions", ValueType::boolean, "true"},
    KeySpec{"cf.model", ValueType::text, ""},
    KeySpec{"acc.outer_iterations", ValueType::integer, "20"},
    KeySpec{"acc.checkpoint_step", ValueType::integer, "100"},
    KeySpec{"acc.checkpoint_max", ValueType::integer, "2000"},
    KeySpec{"acc.threshold", ValueType::integer, "100"},
    KeySpec{"acc.rootn_c", ValueType::real, "100"},
    KeySpec{"ratings", ValueType::text, ""},
    KeySpec{"synthetic.n_users", ValueType::integer, "1000"},
    KeySpec{"synthetic.n_items", ValueType::integer, "300"},
    KeySpec{"synthetic.rank", ValueType::integer, "5"},
    KeySpec{"synthetic.density", ValueType::real, "0.1"},
    KeySpec{"synthetic.min_per_user", ValueType::integer, "2"},
    KeySpec{"synthetic.popularity_exponent", ValueType::real, "1"},
    KeySpec{"synthetic.noise", ValueType::real, "0.1"},
    KeySpec{"synthetic.interaction_std", ValueType::real, "0.8"},
    KeySpec{"synthetic.bias_std", ValueType::real, "0.3"},
    KeySpec{"synthetic.base", ValueType::real, "3.5"},
    KeySpec{"plot.input", ValueType::text, ""},
};

const KeySpec* find_key(std::string_view key) {
  for (const auto& k : kKeys) {
    if (k.key == key) return &k;
  }
  return nullptr;
}

std::string valid_key_list() {
  std::string out;
  for (const auto& k : kKeys) {
    if (!out.empty()) out += ", ";
    out += k.key;
  }
  return out;
}

std::string trim(std::string_view s) { return boost::algorithm::trim_copy(std::string(s)); }

[[noreturn]] void type_error(std::string_view key, ValueType t, std::string_view value) {
  throw ConfigError(fmt::format("key '{}' expects {}, got '{}'", key, type_name(t), value));
}

template <class T>
bool parse_whole(std::string_view s, T& out) {
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && p == end;
}

std::string canonical(const KeySpec& k, std::string_view value) {
  switch (k.type) {
    case ValueType::integer: {
      std::int64_t v = 0;
      if (!parse_whole(value, v)) type_error(k.key, k.type, value);
      return fmt::format("{}", v);
    }
    case ValueType::unsigned_integer: {
      std::uint64_t v = 0;
      if (!parse_whole(value, v)) type_error(k.key, k.type, value);
      return fmt::format("{}", v);
    }
    case ValueType::real: {
      double v = 0;
      if (!parse_whole(value, v) || !std::isfinite(v)) type_error(k.key, k.type, value);
      return fmt::format("{}", v);
    }
    case ValueType::boolean:
      if (value == "true" || value == "1" || value == "yes" || value == "on") return "true";
      if (value == "false" || value == "0" || value == "no" || value == "off") return "false";
      type_error(k.key, k.type, value);
    case ValueType::text:
      if (value.find_first_of("\r\n") != std::string_view::npos) type_error(k.key, k.type, value);
      return std::string(value);
    case ValueType::family:
      try {
        return std::string(to_string(parse_family(value)));
      } catch (const ArgumentError& e) {
        throw ConfigError(fmt::format("key '{}': {}", k.key, e.what()));
      }
    case ValueType::isa:
      if (value == "auto") return "auto";
      if (auto isa = kernels::parse_isa(value)) return std::string(kernels::to_string(*isa));
      type_error(k.key, k.type, value);
  }
  type_error(k.key, k.type, value);
}

int as_int(std::int64_t v, std::string_view key) {
  if (v < INT32_MIN || v > INT32_MAX) throw ConfigError(fmt::format("key '{}' out of range: {}", key, v));
  return static_cast<int>(v);
}

}  // namespace

std::string_view type_name(ValueType t) {
  switch (t) {
    case ValueType::integer: return "integer";
    case ValueType::unsigned_integer: return "non-negative integer";
    case ValueType::real: return "real number";
    case ValueType::boolean: return "boolean (true/false)";
    case ValueType::text: return "text";
    case ValueType::family: return "family (student_t, beta_recentered, lognormal_recentered, point_mass)";
    case ValueType::isa: return "simd variant (auto, scalar, avx2)";
  }
  return "?";
}

std::span<const KeySpec> keys() { return kKeys; }

std::vector<Entry> parse_text(std::istream& in) {
  std::vector<Entry> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("line {}: expected key = value", n));
    Entry e{trim(std::string_view(t).substr(0, eq)), trim(std::string_view(t).substr(eq + 1)), n};
    if (e.key.empty()) throw ConfigError(fmt::format("line {}: empty key", n));
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<Entry> parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open config file '{}'", path.string()));
  try {
    return parse_text(in);
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

Entry parse_assignment(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos) throw ConfigError(fmt::format("override '{}' is not key=value", text));
  Entry e{trim(text.substr(0, eq)), trim(text.substr(eq + 1)), 0};
  if (e.key.empty()) throw ConfigError(fmt::format("override '{}' has an empty key", text));
  return e;
}

Settings::Settings() {
  for (const auto& k : kKeys) values_.emplace(std::string(k.key), std::string(k.default_value));
}

void Settings::set(std::string_view key, std::string_view value) {
  const KeySpec* k = find_key(key);
  if (!k) throw ConfigError(fmt::format("unknown key '{}'; valid keys: {}", key, valid_key_list()));
  values_.find(key)->second = canonical(*k, value);
}

void Settings::apply(const std::vector<Entry>& entries) {
  for (const auto& e : entries) {
    try {
      set(e.key, e.value);
    } catch (const ConfigError& err) {
      if (e.line == 0) throw;
      throw ConfigError(fmt::format("line {}: {}", e.line, err.what()));
    }
  }
}

const std::string& Settings::raw(std::string_view key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(fmt::format("unknown key '{}'", key));
  return it->second;
}

std::int64_t Settings::integer(std::string_view key) const {
  std::int64_t v = 0;
  if (!parse_whole(std::string_view(raw(key)), v)) type_error(key, ValueType::integer, raw(key));
  return v;
}

std::uint64_t Settings::unsigned_integer(std::string_view key) const {
  std::uint64_t v = 0;
  if (!parse_whole(std::string_view(raw(key)), v)) type_error(key, ValueType::unsigned_integer, raw(key));
  return v;
}

double Settings::real(std::string_view key) const {
  double v = 0;
  if (!parse_whole(std::string_view(raw(key)), v)) type_error(key, ValueType::real, raw(key));
  return v;
}

bool Settings::boolean(std::string_view key) const { return raw(key) == "true"; }

void Settings::resolve_simd() {
  if (raw("simd") == "auto") values_.find("simd")->second = std::string(kernels::to_string(kernels::detect()));
}

TrajectoryConfig Settings::trajectory() const {
  TrajectoryConfig c;
  c.K = as_int(integer("K"), "K");
  c.N = as_int(integer("N"), "N");
  c.base_seed = unsigned_integer("seed");
  c.threads = as_int(integer("threads"), "threads");
  c.spec.family = parse_family(raw("family"));
  c.spec.mean = real("mean");
  c.spec.sigma = real("sigma");
  c.spec.dof = real("dof");
  c.spec.shape1 = real("shape1");
  c.spec.shape2 = real("shape2");
  c.spec.log_sigma = real("log_sigma");
  c.projection.conv_tol = real("higham.conv_tol");
  c.projection.max_iter = as_int(integer("higham.max_iter"), "higham.max_iter");
  c.projection.min_eig = real("higham.min_eig");
  c.conditioning.pivot_tol = real("condvar.pivot_tol");
  c.conditioning.audit_interval = as_int(integer("condvar.audit_interval"), "condvar.audit_interval");
  c.conditioning.audit_tol = real("condvar.audit_tol");
  return c;
}

RegimeOptions Settings::regime() const {
  RegimeOptions r;
  r.band_multiplier = real("regime.band_mult");
  r.smoothing_window = as_int(integer("regime.smooth_window"), "regime.smooth_window");
  r.mse_floor = real("regime.mse_floor");
  r.min_run = as_int(integer("regime.min_run"), "regime.min_run");
  return r;
}

cf::Hyperparams Settings::hyperparams() const {
  cf::Hyperparams h;
  h.n_factors = as_int(integer("cf.n_factors"), "cf.n_factors");
  h.n_epochs = as_int(integer("cf.n_epochs"), "cf.n_epochs");
  h.learning_rate = real("cf.lr");
  h.regularization = real("cf.reg");
  h.init_std = real("cf.init_std");
  h.clip_min = real("cf.clip_min");
  h.clip_max = real("cf.clip_max");
  h.clip_predictions = boolean("cf.clip_predictions");
  return h;
}

mlens::AccumulationConfig Settings::accumulation() const {
  mlens::AccumulationConfig a;
  a.outer_iterations = as_int(integer("acc.outer_iterations"), "acc.outer_iterations");
  a.checkpoint_step = as_int(integer("acc.checkpoint_step"), "acc.checkpoint_step");
  a.checkpoint_max = as_int(integer("acc.checkpoint_max"), "acc.checkpoint_max");
  a.popularity_threshold = as_int(integer("acc.threshold"), "acc.threshold");
  a.rootn_constant = real("acc.rootn_c");
  a.hp = hyperparams();
  a.base_seed = unsigned_integer("seed");
  a.threads = as_int(integer("threads"), "threads");
  return a;
}

mlens::SyntheticConfig Settings::synthetic() const {
  mlens::SyntheticConfig s;
  s.n_users = as_int(integer("synthetic.n_users"), "synthetic.n_users");
  s.n_items = as_int(integer("synthetic.n_items"), "synthetic.n_items");
  s.rank = as_int(integer("synthetic.rank"), "synthetic.rank");
  s.density = real("synthetic.density");
  s.min_per_user = as_int(integer("synthetic.min_per_user"), "synthetic.min_per_user");
  s.popularity_exponent = real("synthetic.popularity_exponent");
  s.noise = real("synthetic.noise");
  s.interaction_std = real("synthetic.interaction_std");
  s.bias_std = real("synthetic.bias_std");
  s.base = real("synthetic.base");
  return s;
}

void Settings::validate() const {
  try {
    trajectory().validate();
    regime();
    hyperparams().validate();
    accumulation().validate();
    synthetic().validate();
    if (integer("verify.k_max") < 1) throw ConfigError("verify.k_max must be >= 1");
    if (integer("theory.k_max") < 1) throw ConfigError("theory.k_max must be >= 1");
    const double rho = real("theory.rho_bar");
    if (!(rho >= 0.0 && rho < 1.0)) throw ConfigError("theory.rho_bar must lie in [0, 1)");
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
}

std::string Settings::dump() const {
  std::string out;
  for (const auto& k : kKeys) out += fmt::format("{} = {}\n", k.key, raw(k.key));
  return out;
}

std::string run_id(std::string_view command, const Settings& s) {
  // FNV-1a over the canonical text.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&](std::string_view text) {
    for (unsigned char c : text) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  feed(command);
  feed("\n");
  // Worker count never changes results, so it stays out of the id.
  for (const auto& k : kKeys) {
    if (k.key != "threads") feed(fmt::format("{} = {}\n", k.key, s.raw(k.key)));
  }
  return fmt::format("{:016x}", h);
}

std::string manifest(std::string_view command, const Settings& s) {
  return fmt::format("# lcurve manifest\n# version: {}\n# command: {}\n# run_id: {}\n# rerun: lcurve {} --config <this file> --out <dir>\n{}",
                     kToolVersion, command, run_id(command, s), command, s.dump());
}

}  // namespace lcurve::config
