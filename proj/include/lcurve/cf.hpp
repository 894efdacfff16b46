#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace lcurve::cf {

struct Rating {
  std::int64_t user = 0;
  std::int64_t item = 0;
  double value = 0.0;
};

struct Hyperparams {
  int n_factors = 100;
  int n_epochs = 20;
  double learning_rate = 0.005;
  double regularization = 0.02;
  double init_std = 0.1;
  double clip_min = 1.0;
  double clip_max = 5.0;
  /// Clip predictions into [clip_min, clip_max]. Off gives raw scores.
  bool clip_predictions = true;

  void validate() const;
};

enum class PredictionTier { full, user_bias_only, item_bias_only, constant_only };
std::string_view to_string(PredictionTier t);

/// r_hat = alpha + b_user + b_item + <f_user, f_item>.
/// Factors are stored row-major: entity i owns [i*n_factors, (i+1)*n_factors).
struct SvdModel {
  double alpha = 0.0;
  int n_factors = 0;
  double clip_min = 1.0;
  double clip_max = 5.0;
  bool clip_predictions = true;
  /// External ids in dense-index order.
  std::vector<std::int64_t> user_ids;
  std::vector<std::int64_t> item_ids;
  std::unordered_map<std::int64_t, int> user_index;
  std::unordered_map<std::int64_t, int> item_index;
  std::vector<double> user_bias;
  std::vector<double> item_bias;
  std::vector<double> user_factors;
  std::vector<double> item_factors;

  std::span<const double> user_factor(int u) const;
  std::span<const double> item_factor(int i) const;
  std::span<double> user_factor(int u);
  std::span<double> item_factor(int i);

  friend bool operator==(const SvdModel& a, const SvdModel& b);
};

/// Per-epoch observer: (epoch index, training mse measured during the pass).
using EpochObserver = std::function<void(int, double)>;

/// One SGD update of a single rating. Returns the pre-update error r - r_hat.
/// Every right-hand side reads pre-update values.
double sgd_step(double rating, double alpha, double& user_bias, double& item_bias, std::span<double> user_factor,
                std::span<double> item_factor, double lr, double reg);

/// Fit by plain SGD, ratings visited in input order each epoch. alpha is the
/// training mean; biases start at 0; factors ~ Normal(0, init_std) drawn for
/// users (first-appearance order) then items from RngStream(seed, 0).
/// Throws ArgumentError on empty input or ratings outside the clip range,
/// DivergenceError when a parameter becomes non-finite.
SvdModel train(std::span<const Rating> train_set, const Hyperparams& hp, std::uint64_t seed,
               const EpochObserver& observer = {});

struct Prediction {
  double value = 0.0;
  PredictionTier tier = PredictionTier::constant_only;
};

Prediction predict(const SvdModel& model, std::int64_t user, std::int64_t item);

struct Evaluation {
  double rmse = 0.0;
  double share_full = 0.0;
  std::size_t count = 0;
};

/// Throws ArgumentError on an empty holdout.
Evaluation evaluate_rmse(const SvdModel& model, std::span<const Rating> holdout);

/// Text container, see docs/model_format.md. Numbers are written in
/// shortest round-trip form so save/load is exact.
void save_model(const SvdModel& model, std::ostream& out);
void save_model(const SvdModel& model, const std::filesystem::path& path);
/// Malformed content throws ValidationError; an unreadable path throws IoError.
SvdModel load_model(std::istream& in);
SvdModel load_model(const std::filesystem::path& path);

}  // namespace lcurve::cf
