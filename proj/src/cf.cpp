#include "lcurve/cf.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <boost/random/normal_distribution.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "lcurve/errors.hpp"
#include "lcurve/kernels.hpp"
#include "lcurve/rng.hpp"

namespace lcurve::cf {

void Hyperparams::validate() const {
  if (n_factors < 0) throw ArgumentError(fmt::format("cf.n_factors must be >= 0, got {}", n_factors));
  if (n_epochs < 1) throw ArgumentError(fmt::format("cf.n_epochs must be >= 1, got {}", n_epochs));
  if (!(learning_rate > 0.0)) throw ArgumentError(fmt::format("cf.lr must be > 0, got {}", learning_rate));
  if (!(regularization >= 0.0)) throw ArgumentError(fmt::format("cf.reg must be >= 0, got {}", regularization));
  if (!(init_std >= 0.0)) throw ArgumentError(fmt::format("cf.init_std must be >= 0, got {}", init_std));
  if (!(clip_min < clip_max)) {
    throw ArgumentError(fmt::format("cf clip range must satisfy min < max, got [{}, {}]", clip_min, clip_max));
  }
}

std::string_view to_string(PredictionTier t) {
  switch (t) {
    case PredictionTier::full: return "full";
    case PredictionTier::user_bias_only: return "user_bias_only";
    case PredictionTier::item_bias_only: return "item_bias_only";
    case PredictionTier::constant_only: return "constant_only";
  }
  return "unknown";
}

std::span<const double> SvdModel::user_factor(int u) const {
  return {user_factors.data() + static_cast<std::size_t>(u) * n_factors, static_cast<std::size_t>(n_factors)};
}
std::span<const double> SvdModel::item_factor(int i) const {
  return {item_factors.data() + static_cast<std::size_t>(i) * n_factors, static_cast<std::size_t>(n_factors)};
}
std::span<double> SvdModel::user_factor(int u) {
  return {user_factors.data() + static_cast<std::size_t>(u) * n_factors, static_cast<std::size_t>(n_factors)};
}
std::span<double> SvdModel::item_factor(int i) {
  return {item_factors.data() + static_cast<std::size_t>(i) * n_factors, static_cast<std::size_t>(n_factors)};
}

bool operator==(const SvdModel& a, const SvdModel& b) {
  return a.alpha == b.alpha && a.n_factors == b.n_factors && a.clip_min == b.clip_min && a.clip_max == b.clip_max &&
         a.clip_predictions == b.clip_predictions && a.user_ids == b.user_ids && a.item_ids == b.item_ids &&
         a.user_bias == b.user_bias && a.item_bias == b.item_bias && a.user_factors == b.user_factors &&
         a.item_factors == b.item_factors;
}

double sgd_step(double rating, double alpha, double& user_bias, double& item_bias, std::span<double> user_factor,
                std::span<double> item_factor, double lr, double reg) {
  const double err = rating - (alpha + user_bias + item_bias + kernels::dot(user_factor, item_factor));
  user_bias += lr * (err - reg * user_bias);
  item_bias += lr * (err - reg * item_bias);
  kernels::sgd_pair_update(user_factor, item_factor, err, lr, reg);
  return err;
}

namespace {

int intern(std::unordered_map<std::int64_t, int>& index, std::vector<std::int64_t>& ids, std::int64_t id) {
  auto [it, inserted] = index.try_emplace(id, static_cast<int>(ids.size()));
  if (inserted) ids.push_back(id);
  return it->second;
}

bool all_finite(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

SvdModel train(std::span<const Rating> train_set, const Hyperparams& hp, std::uint64_t seed,
               const EpochObserver& observer) {
  hp.validate();
  if (train_set.empty()) throw ArgumentError("cf::train: empty training set");

  SvdModel m;
  m.n_factors = hp.n_factors;
  m.clip_min = hp.clip_min;
  m.clip_max = hp.clip_max;
  m.clip_predictions = hp.clip_predictions;

  std::vector<std::pair<int, int>> dense;
  dense.reserve(train_set.size());
  double sum = 0.0;
  for (std::size_t n = 0; n < train_set.size(); ++n) {
    const Rating& r = train_set[n];
    if (!(r.value >= hp.clip_min && r.value <= hp.clip_max)) {
      throw ArgumentError(fmt::format("cf::train: rating {} at position {} outside [{}, {}]", r.value, n,
                                      hp.clip_min, hp.clip_max));
    }
    dense.emplace_back(intern(m.user_index, m.user_ids, r.user), intern(m.item_index, m.item_ids, r.item));
    sum += r.value;
  }
  m.alpha = sum / static_cast<double>(train_set.size());

  const std::size_t nf = static_cast<std::size_t>(hp.n_factors);
  m.user_bias.assign(m.user_ids.size(), 0.0);
  m.item_bias.assign(m.item_ids.size(), 0.0);
  m.user_factors.resize(m.user_ids.size() * nf);
  m.item_factors.resize(m.item_ids.size() * nf);
  RngStream rng(seed, 0);
  boost::random::normal_distribution<double> init(0.0, hp.init_std);
  if (hp.init_std > 0.0) {
    for (double& f : m.user_factors) f = init(rng);
    for (double& f : m.item_factors) f = init(rng);
  } else {
    std::fill(m.user_factors.begin(), m.user_factors.end(), 0.0);
    std::fill(m.item_factors.begin(), m.item_factors.end(), 0.0);
  }

  for (int epoch = 0; epoch < hp.n_epochs; ++epoch) {
    double sq = 0.0;
    for (std::size_t n = 0; n < train_set.size(); ++n) {
      const auto [u, i] = dense[n];
      const double err = sgd_step(train_set[n].value, m.alpha, m.user_bias[static_cast<std::size_t>(u)],
                                  m.item_bias[static_cast<std::size_t>(i)], m.user_factor(u), m.item_factor(i),
                                  hp.learning_rate, hp.regularization);
      sq += err * err;
    }
    if (!std::isfinite(sq) || !all_finite(m.user_bias) || !all_finite(m.item_bias) ||
        !all_finite(m.user_factors) || !all_finite(m.item_factors)) {
      throw DivergenceError(fmt::format("cf::train diverged in epoch {}", epoch + 1), epoch + 1);
    }
    if (observer) observer(epoch, sq / static_cast<double>(train_set.size()));
  }
  return m;
}

Prediction predict(const SvdModel& model, std::int64_t user, std::int64_t item) {
  const auto u = model.user_index.find(user);
  const auto i = model.item_index.find(item);
  const bool has_u = u != model.user_index.end();
  const bool has_i = i != model.item_index.end();
  Prediction p;
  p.value = model.alpha;
  if (has_u && has_i) {
    p.tier = PredictionTier::full;
    p.value += model.user_bias[static_cast<std::size_t>(u->second)] +
               model.item_bias[static_cast<std::size_t>(i->second)] +
               kernels::dot(model.user_factor(u->second), model.item_factor(i->second));
  } else if (has_u) {
    p.tier = PredictionTier::user_bias_only;
    p.value += model.user_bias[static_cast<std::size_t>(u->second)];
  } else if (has_i) {
    p.tier = PredictionTier::item_bias_only;
    p.value += model.item_bias[static_cast<std::size_t>(i->second)];
  } else {
    p.tier = PredictionTier::constant_only;
  }
  if (model.clip_predictions) p.value = std::clamp(p.value, model.clip_min, model.clip_max);
  return p;
}

Evaluation evaluate_rmse(const SvdModel& model, std::span<const Rating> holdout) {
  if (holdout.empty()) throw ArgumentError("evaluate_rmse: empty holdout");
  double sq = 0.0;
  std::size_t full = 0;
  for (const Rating& r : holdout) {
    const Prediction p = predict(model, r.user, r.item);
    const double e = r.value - p.value;
    sq += e * e;
    full += p.tier == PredictionTier::full ? 1 : 0;
  }
  Evaluation ev;
  ev.count = holdout.size();
  ev.rmse = std::sqrt(sq / static_cast<double>(holdout.size()));
  ev.share_full = static_cast<double>(full) / static_cast<double>(holdout.size());
  return ev;
}

namespace {

constexpr std::string_view kMagic = "lcurve-svd-model";
constexpr int kFormatVersion = 1;

void write_block(std::ostream& out, std::string_view name, const std::vector<std::int64_t>& ids,
                 const std::vector<double>& bias, const std::vector<double>& factors, std::size_t nf) {
  fmt::print(out, "{} {}\n", name, ids.size());
  for (std::size_t e = 0; e < ids.size(); ++e) {
    fmt::print(out, "{} {}", ids[e], bias[e]);
    for (std::size_t f = 0; f < nf; ++f) fmt::print(out, " {}", factors[e * nf + f]);
    out << '\n';
  }
}

template <typename T>
T expect_value(std::istream& in, std::string_view what) {
  T v{};
  if (!(in >> v)) throw ValidationError(fmt::format("model file: cannot read {}", what));
  return v;
}

void expect_word(std::istream& in, std::string_view word) {
  std::string got;
  if (!(in >> got) || got != word) {
    throw ValidationError(fmt::format("model file: expected '{}', found '{}'", word, got));
  }
}

// operator>> on double rejects "inf"/"nan"; parse through strtod.
double read_double(std::istream& in, std::string_view what) {
  std::string tok = expect_value<std::string>(in, what);
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0') throw ValidationError(fmt::format("model file: bad number '{}' for {}", tok, what));
  return v;
}

void read_block(std::istream& in, std::string_view name, std::vector<std::int64_t>& ids,
                std::unordered_map<std::int64_t, int>& index, std::vector<double>& bias, std::vector<double>& factors,
                std::size_t nf) {
  expect_word(in, name);
  const auto count = expect_value<std::size_t>(in, name);
  ids.resize(count);
  bias.resize(count);
  factors.resize(count * nf);
  for (std::size_t e = 0; e < count; ++e) {
    ids[e] = expect_value<std::int64_t>(in, "id");
    bias[e] = read_double(in, "bias");
    for (std::size_t f = 0; f < nf; ++f) factors[e * nf + f] = read_double(in, "factor");
    if (!index.emplace(ids[e], static_cast<int>(e)).second) {
      throw ValidationError(fmt::format("model file: duplicate {} id {}", name, ids[e]));
    }
  }
}

}  // namespace

void save_model(const SvdModel& model, std::ostream& out) {
  const auto nf = static_cast<std::size_t>(model.n_factors);
  fmt::print(out, "{} {}\n", kMagic, kFormatVersion);
  fmt::print(out, "alpha {}\n", model.alpha);
  fmt::print(out, "n_factors {}\n", model.n_factors);
  fmt::print(out, "clip {} {} {}\n", model.clip_min, model.clip_max, model.clip_predictions ? 1 : 0);
  write_block(out, "users", model.user_ids, model.user_bias, model.user_factors, nf);
  write_block(out, "items", model.item_ids, model.item_bias, model.item_factors, nf);
  out << "end\n";
}

void save_model(const SvdModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  save_model(model, out);
  if (!out) throw IoError(fmt::format("write to '{}' failed", path.string()));
}

SvdModel load_model(std::istream& in) {
  expect_word(in, kMagic);
  const int version = expect_value<int>(in, "version");
  if (version != kFormatVersion) throw ValidationError(fmt::format("model file: unsupported version {}", version));
  SvdModel m;
  expect_word(in, "alpha");
  m.alpha = read_double(in, "alpha");
  expect_word(in, "n_factors");
  m.n_factors = expect_value<int>(in, "n_factors");
  if (m.n_factors < 0) throw ValidationError("model file: negative n_factors");
  expect_word(in, "clip");
  m.clip_min = read_double(in, "clip_min");
  m.clip_max = read_double(in, "clip_max");
  m.clip_predictions = expect_value<int>(in, "clip flag") != 0;
  const auto nf = static_cast<std::size_t>(m.n_factors);
  read_block(in, "users", m.user_ids, m.user_index, m.user_bias, m.user_factors, nf);
  read_block(in, "items", m.item_ids, m.item_index, m.item_bias, m.item_factors, nf);
  expect_word(in, "end");
  return m;
}

SvdModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  return load_model(in);
}

}  // namespace lcurve::cf
