#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "lcurve/condvar.hpp"
#include "lcurve/nearcorr.hpp"
#include "lcurve/randcorr.hpp"

namespace lcurve {

struct TrajectoryConfig {
  int K = 100;
  int N = 100;
  DistributionSpec spec;
  std::uint64_t base_seed = 1;
  ProjectionConfig projection;
  ConditioningOptions conditioning;
  int threads = 1;

  void validate() const;
};

/// Everything one run of the simulation loop produces.
struct TrajectoryPath {
  int index = 0;
  int target = -1;
  /// Predictors in the order they were added.
  std::vector<int> order;
  /// mse[k-1] = sigma^2_{y|x_k}, k = 1..steps.
  std::vector<double> mse;
  bool repaired = false;
  bool repair_converged = true;
  int repair_iterations = 0;
  /// Off-diagonal correlations actually used (after repair), upper triangle row-major.
  std::vector<double> correlations;
};

/// Draw, repair if needed, pick the target, then add predictors one at a time
/// in uniformly random order. Stream id = i. `steps` caps k (default K-1).
TrajectoryPath run_trajectory_detailed(const TrajectoryConfig& cfg, int i, std::optional<int> steps = {},
                                       std::uint64_t stream_offset = 0);

std::vector<double> run_trajectory(const TrajectoryConfig& cfg, int i);

struct Quantiles {
  double min = 0, p05 = 0, p25 = 0, p50 = 0, p75 = 0, p95 = 0, max = 0;
  double mean = 0, variance = 0;
  std::size_t count = 0;
};

/// Lower-interpolation quantiles (index floor(p*(n-1)) of the sorted values).
Quantiles summarize_values(std::vector<double> values);

struct TrajectoryResult {
  int K = 0;
  int N = 0;
  std::vector<std::vector<double>> mse_paths;
  std::vector<double> mean_curve;
  std::vector<double> stderr_curve;
  int repaired_count = 0;
  int nonconverged_count = 0;
  Quantiles corrected_offdiag_summary;
};

/// Mean and standard error (sample sd / sqrt(N); 0 for N = 1) per k.
TrajectoryResult aggregate_paths(std::vector<std::vector<double>> paths);

/// N trajectories over cfg.threads workers, reduced in index order so the
/// result does not depend on scheduling.
TrajectoryResult run_simulation(const TrajectoryConfig& cfg);

enum class Regime { decreasing_returns, increasing_returns, flat };
std::string_view to_string(Regime r);

struct RegimeOptions {
  double band_multiplier = 2.0;
  int smoothing_window = 5;
  /// Lower bound on the band so exact-arithmetic ties read as flat.
  double band_floor = 1e-12;
  /// A path at or below this mse has hit the zero bound; sign-change
  /// detection stops before the first k where any path does.
  double mse_floor = 1e-6;
  /// Consecutive same-sign points outside the band needed to count as a regime.
  int min_run = 2;
};

/// Curvature of the mean mse curve. Index j of second_diffs / regimes
/// corresponds to k = j + 2 (centered on the middle point of the stencil).
struct RegimeReport {
  std::vector<double> first_diffs;
  std::vector<double> second_diffs;
  std::vector<double> band;
  std::vector<Regime> regimes;
  std::vector<double> smoothed_second_diffs;
  std::vector<double> smoothed_band;
  /// Smoothed points considered for sign changes: those whose window ends
  /// before any path reaches mse_floor.
  int analysis_end = 0;
  /// Sign changes between runs (length >= min_run) of the smoothed second
  /// difference lying outside its band.
  int sign_changes = 0;
  /// Index into smoothed_second_diffs where the first sign change lands.
  std::optional<int> first_sign_change;
  /// Exactly one change, from positive (convex mse) to negative (concave mse).
  bool single_positive_to_negative = false;
};

RegimeReport classify_returns(const TrajectoryResult& result, const RegimeOptions& opts = {});

struct RecursionRecord {
  int k = 0;
  double lhs = 0;     ///< mean R^2_{y|x_k}
  double rhs = 0;     ///< k * Var(rho) * mean 1/(1 - R^2_{y|x_{k-1}})
  double lhs_se = 0;
  double rhs_se = 0;
  double combined_se = 0;
  bool pass = false;
};

struct RecursionReport {
  int trajectories = 0;
  double var_rho = 0;
  double var_rho_se = 0;
  std::vector<RecursionRecord> records;
  /// k = 1: mean R^2 against Var(rho) from the same draws.
  bool k1_pass = false;

  bool all_pass() const;
};

/// Both sides of the mean-zero recursion over cfg.N fresh trajectories
/// (stream ids disjoint from run_simulation's). Throws PreconditionError
/// unless cfg.spec.mean == 0.
RecursionReport verify_recursion(const TrajectoryConfig& cfg, int k_max);

/// Explained variance at the averages for an equicorrelated system:
/// R^2(k) = k rho^2 / (1 + (k-1) rho), k = 1..k_max.
std::vector<double> theory_mean_curve(double rho_bar, int k_max);

/// rho / (1 + (k-2) rho), k >= 2.
double partial_correlation_at_mean(double rho_bar, int k);

}  // namespace lcurve
