#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lcurve/cf.hpp"
#include "lcurve/rng.hpp"

namespace lcurve::mlens {

struct RatingRow {
  std::int64_t user = 0;
  std::int64_t item = 0;
  int rating = 0;
  std::int64_t timestamp = 0;

  friend bool operator==(const RatingRow&, const RatingRow&) = default;
};

struct RatingsDataset {
  std::vector<RatingRow> rows;
};

/// Integer ratings 1..5, positive ids, no repeated (user, item). Throws ValidationError.
void validate(const RatingsDataset& ds);

std::vector<cf::Rating> to_ratings(std::span<const RatingRow> rows);

/// UserID::MovieID::Rating::Timestamp per line; blank lines skipped.
/// Throws ParseError (1-based line) or ValidationError.
RatingsDataset parse_movielens(std::istream& in);
/// Throws IoError when the file cannot be opened.
RatingsDataset load_movielens(const std::filesystem::path& path);

struct Distribution {
  double mean = 0, min = 0, p25 = 0, p50 = 0, p75 = 0, max = 0;
};

struct DatasetSummary {
  Distribution rating;
  Distribution per_user;
  Distribution per_item;
  std::size_t n_ratings = 0;
  std::size_t n_users = 0;
  std::size_t n_items = 0;
  int threshold = 100;
  std::size_t items_at_threshold = 0;
};

/// Percentiles use the lower convention: sorted[floor(p * (n - 1))].
/// Throws ArgumentError on an empty dataset.
DatasetSummary summarize(const RatingsDataset& ds, int threshold = 100);

struct HoldoutSplit {
  std::vector<RatingRow> train_pool;
  std::vector<RatingRow> holdout;
};

/// One uniformly chosen rating per user (users visited in ascending id order)
/// goes to the holdout; train_pool keeps the remaining rows in input order.
/// Throws ValidationError when a user has fewer than two ratings.
HoldoutSplit make_holdout(const RatingsDataset& ds, RngStream& rng);

struct AccumulationConfig {
  int outer_iterations = 20;
  int checkpoint_step = 100;
  int checkpoint_max = 2000;
  int popularity_threshold = 100;
  double rootn_constant = 100.0;
  cf::Hyperparams hp;
  std::uint64_t base_seed = 1;
  int threads = 1;

  void validate() const;
  std::vector<int> checkpoints() const;
};

struct CheckpointReport {
  int iteration = 0;
  int k_prime = 0;
  double rmse = 0;
  double share_full = 0;
  std::int64_t n_users = 0;
  std::int64_t n_items = 0;
  std::int64_t n_ratings = 0;
  double rootn_baseline = 0;
};

/// Holdout, shuffled training pool and checkpoint cut points of one outer
/// iteration. Row t of `shuffled` carries fake timestamp t.
struct IterationPlan {
  int iteration = 0;
  std::vector<RatingRow> holdout;
  std::vector<RatingRow> shuffled;
  struct Cut {
    int k_prime = 0;
    /// Training set = shuffled[0, rows).
    std::size_t rows = 0;
  };
  std::vector<Cut> cuts;
  /// Some checkpoints were unreachable and dropped.
  bool truncated = false;
};

IterationPlan plan_iteration(const RatingsDataset& ds, const AccumulationConfig& cfg, int iteration);

struct IterationResult {
  int iteration = 0;
  bool failed = false;
  std::string error;
  bool truncated = false;
  std::vector<CheckpointReport> reports;
};

/// Runs every outer iteration (in parallel over cfg.threads). A diverging
/// model marks its iteration failed; the batch continues.
std::vector<IterationResult> run_accumulation(const RatingsDataset& ds, const AccumulationConfig& cfg);

/// Trains and scores one checkpoint of a plan. Model seed is derived from
/// (base_seed, iteration).
CheckpointReport run_checkpoint(const IterationPlan& plan, const IterationPlan::Cut& cut,
                                const AccumulationConfig& cfg);

struct AggregateRow {
  int k_prime = 0;
  int iterations = 0;
  double mean_rmse = 0, stderr_rmse = 0;
  double mean_share_full = 0, stderr_share_full = 0;
  double mean_n_users = 0, stderr_n_users = 0;
  double mean_n_items = 0, stderr_n_items = 0;
  double mean_n_ratings = 0, stderr_n_ratings = 0;
  double mean_rootn = 0;
};

/// Means and standard errors across iterations, aligned on k_prime.
/// Throws ArgumentError when no report is given.
std::vector<AggregateRow> aggregate_reports(std::span<const CheckpointReport> reports);
/// Skips failed iterations; throws ArgumentError when none succeeded.
std::vector<AggregateRow> aggregate_reports(const std::vector<IterationResult>& results);

inline constexpr std::string_view kIterationCsvHeader =
    "iteration,k_prime,rmse,share_full,n_users,n_items,n_ratings,rootn_baseline";
inline constexpr std::string_view kAggregateCsvHeader =
    "k_prime,mean_rmse,stderr_rmse,mean_share_full,mean_n_users,mean_n_items,mean_n_ratings,mean_rootn";

void write_iteration_csv(std::ostream& out, const std::vector<IterationResult>& results);
std::vector<CheckpointReport> read_iteration_csv(std::istream& in);
void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows);

// Synthetic data ------------------------------------------------------------

/// Low-rank ratings: base + user bias + item bias + <u, v> + Normal(0, noise),
/// clamped to [1, 5]. Each user rates round(density * n_items) items (at least
/// min_per_user), drawn without replacement with weight (rank+1)^-exponent
/// over items; exponent 0 is uniform.
struct SyntheticConfig {
  int n_users = 1000;
  int n_items = 300;
  int rank = 5;
  double density = 0.1;
  int min_per_user = 2;
  double popularity_exponent = 1.0;
  double noise = 0.1;
  double interaction_std = 0.8;
  double bias_std = 0.3;
  double base = 3.5;

  void validate() const;
};

/// Continuous ratings in user-major order.
std::vector<cf::Rating> synthetic_ratings(const SyntheticConfig& cfg, std::uint64_t seed);

/// Same generator rounded to integers; timestamps are row positions.
RatingsDataset synthetic_dataset(const SyntheticConfig& cfg, std::uint64_t seed);

}  // namespace lcurve::mlens
