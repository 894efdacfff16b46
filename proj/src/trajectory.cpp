#include "lcurve/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/random/uniform_int_distribution.hpp>
#include <fmt/format.h>

#include "lcurve/errors.hpp"
#include "lcurve/parallel.hpp"

namespace lcurve {

void TrajectoryConfig::validate() const {
  if (K < 2) throw ArgumentError(fmt::format("K must be >= 2, got {}", K));
  if (N < 1) throw ArgumentError(fmt::format("N must be >= 1, got {}", N));
  if (threads < 1) throw ArgumentError(fmt::format("threads must be >= 1, got {}", threads));
  spec.validate();
  projection.validate();
  conditioning.validate();
}

namespace {

int uniform_index(RngStream& rng, int n) {
  boost::random::uniform_int_distribution<int> d(0, n - 1);
  return d(rng);
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Sample sd / sqrt(n); 0 when n < 2.
double standard_error(const std::vector<double>& v) {
  const std::size_t n = v.size();
  if (n < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
}

}  // namespace

TrajectoryPath run_trajectory_detailed(const TrajectoryConfig& cfg, int i, std::optional<int> steps,
                                       std::uint64_t stream_offset) {
  if (i < 0) throw ArgumentError(fmt::format("trajectory index must be >= 0, got {}", i));
  const int k_max = steps.value_or(cfg.K - 1);
  if (k_max < 0 || k_max > cfg.K - 1) throw ArgumentError(fmt::format("steps must lie in [0, {}]", cfg.K - 1));

  try {
    RngStream rng(cfg.base_seed, stream_offset + static_cast<std::uint64_t>(i));
    TrajectoryPath path;
    path.index = i;

    CorrelationMatrix sigma = draw_correlation_matrix(cfg.K, cfg.spec, rng);
    if (sigma.pd_status != PdStatus::positive_definite) {
      NearestCorrelationResult fixed = nearest_correlation(sigma.entries, cfg.projection);
      sigma = std::move(fixed.matrix);
      path.repaired = true;
      path.repair_converged = fixed.converged;
      path.repair_iterations = fixed.iterations;
    }
    path.correlations = off_diagonal(sigma.entries);

    path.target = uniform_index(rng, cfg.K);
    std::vector<int> remaining;
    remaining.reserve(static_cast<std::size_t>(cfg.K - 1));
    for (int v = 0; v < cfg.K; ++v) {
      if (v != path.target) remaining.push_back(v);
    }

    ConditioningState state = init_conditioning(sigma, path.target);
    path.mse.reserve(static_cast<std::size_t>(k_max));
    for (int k = 1; k <= k_max; ++k) {
      const int pick = uniform_index(rng, static_cast<int>(remaining.size()));
      const int var = remaining[static_cast<std::size_t>(pick)];
      remaining.erase(remaining.begin() + pick);
      path.order.push_back(var);
      state = extend_conditioning(std::move(state), sigma, var, cfg.conditioning);
      path.mse.push_back(state.mse);
    }
    return path;
  } catch (const DegenerateSpecError& e) {
    throw DegenerateSpecError(fmt::format("trajectory {}: {}", i, e.what()));
  } catch (const NumericalError& e) {
    throw NumericalError(fmt::format("trajectory {}: {}", i, e.what()));
  }
}

std::vector<double> run_trajectory(const TrajectoryConfig& cfg, int i) {
  cfg.validate();
  if (i >= cfg.N) throw ArgumentError(fmt::format("trajectory index {} outside [0, {})", i, cfg.N));
  return run_trajectory_detailed(cfg, i).mse;
}

Quantiles summarize_values(std::vector<double> values) {
  Quantiles q;
  q.count = values.size();
  if (values.empty()) return q;
  std::sort(values.begin(), values.end());
  auto at = [&](double p) {
    return values[static_cast<std::size_t>(std::floor(p * static_cast<double>(values.size() - 1)))];
  };
  q.min = values.front();
  q.max = values.back();
  q.p05 = at(0.05);
  q.p25 = at(0.25);
  q.p50 = at(0.50);
  q.p75 = at(0.75);
  q.p95 = at(0.95);
  q.mean = mean_of(values);
  if (values.size() > 1) {
    double ss = 0.0;
    for (double x : values) ss += (x - q.mean) * (x - q.mean);
    q.variance = ss / static_cast<double>(values.size() - 1);
  }
  return q;
}

TrajectoryResult aggregate_paths(std::vector<std::vector<double>> paths) {
  if (paths.empty()) throw ArgumentError("aggregate_paths needs at least one path");
  const std::size_t len = paths.front().size();
  for (const auto& p : paths) {
    if (p.size() != len) throw ArgumentError("aggregate_paths: paths differ in length");
  }
  TrajectoryResult r;
  r.K = static_cast<int>(len) + 1;
  r.N = static_cast<int>(paths.size());
  r.mean_curve.resize(len);
  r.stderr_curve.resize(len);
  std::vector<double> column(paths.size());
  for (std::size_t k = 0; k < len; ++k) {
    for (std::size_t i = 0; i < paths.size(); ++i) column[i] = paths[i][k];
    r.mean_curve[k] = mean_of(column);
    r.stderr_curve[k] = standard_error(column);
  }
  r.mse_paths = std::move(paths);
  return r;
}

TrajectoryResult run_simulation(const TrajectoryConfig& cfg) {
  cfg.validate();
  std::vector<TrajectoryPath> paths(static_cast<std::size_t>(cfg.N));
  parallel_for(paths.size(), cfg.threads,
               [&](std::size_t i) { paths[i] = run_trajectory_detailed(cfg, static_cast<int>(i)); });

  std::vector<std::vector<double>> curves;
  curves.reserve(paths.size());
  std::vector<double> pooled;
  int repaired = 0;
  int nonconverged = 0;
  for (auto& p : paths) {
    repaired += p.repaired ? 1 : 0;
    nonconverged += p.repair_converged ? 0 : 1;
    pooled.insert(pooled.end(), p.correlations.begin(), p.correlations.end());
    curves.push_back(std::move(p.mse));
  }
  TrajectoryResult r = aggregate_paths(std::move(curves));
  r.K = cfg.K;
  r.repaired_count = repaired;
  r.nonconverged_count = nonconverged;
  r.corrected_offdiag_summary = summarize_values(std::move(pooled));
  return r;
}

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::decreasing_returns: return "decreasing_returns";
    case Regime::increasing_returns: return "increasing_returns";
    case Regime::flat: return "flat";
  }
  return "unknown";
}

namespace {

// Centered moving average, window truncated at the ends.
std::vector<double> smooth(const std::vector<double>& v, int window) {
  const int half = window / 2;
  const int n = static_cast<int>(v.size());
  std::vector<double> out(v.size());
  for (int j = 0; j < n; ++j) {
    const int lo = std::max(0, j - half);
    const int hi = std::min(n - 1, j + half);
    double s = 0.0;
    for (int t = lo; t <= hi; ++t) s += v[static_cast<std::size_t>(t)];
    out[static_cast<std::size_t>(j)] = s / static_cast<double>(hi - lo + 1);
  }
  return out;
}

std::vector<double> second_differences(const std::vector<double>& m) {
  std::vector<double> d;
  for (std::size_t j = 0; j + 2 < m.size(); ++j) d.push_back(m[j + 2] - 2.0 * m[j + 1] + m[j]);
  return d;
}

}  // namespace

RegimeReport classify_returns(const TrajectoryResult& result, const RegimeOptions& opts) {
  const auto& m = result.mean_curve;
  if (m.size() < 3) throw ArgumentError("classify_returns needs K >= 4");
  RegimeReport rep;
  for (std::size_t j = 0; j + 1 < m.size(); ++j) rep.first_diffs.push_back(m[j + 1] - m[j]);
  rep.second_diffs = second_differences(m);
  rep.smoothed_second_diffs = smooth(rep.second_diffs, opts.smoothing_window);

  // Standard errors come from the per-path statistics, which share the
  // trajectory-level noise of the mean curve.
  const std::size_t nd = rep.second_diffs.size();
  std::vector<std::vector<double>> per_path_raw(nd), per_path_smooth(nd);
  for (const auto& path : result.mse_paths) {
    const auto d2 = second_differences(path);
    const auto s2 = smooth(d2, opts.smoothing_window);
    for (std::size_t j = 0; j < nd; ++j) {
      per_path_raw[j].push_back(d2[j]);
      per_path_smooth[j].push_back(s2[j]);
    }
  }
  rep.band.resize(nd);
  rep.smoothed_band.resize(nd);
  rep.regimes.resize(nd);
  for (std::size_t j = 0; j < nd; ++j) {
    rep.band[j] = std::max(opts.band_multiplier * standard_error(per_path_raw[j]), opts.band_floor);
    rep.smoothed_band[j] = std::max(opts.band_multiplier * standard_error(per_path_smooth[j]), opts.band_floor);
    const double d = rep.second_diffs[j];
    rep.regimes[j] = d > rep.band[j]    ? Regime::decreasing_returns
                     : d < -rep.band[j] ? Regime::increasing_returns
                                        : Regime::flat;
  }

  std::size_t floor_k = m.size();
  for (const auto& path : result.mse_paths) {
    for (std::size_t k = 0; k < path.size() && k < floor_k; ++k) {
      if (path[k] <= opts.mse_floor) {
        floor_k = k;
        break;
      }
    }
  }
  // d2[j] reads curve points j..j+2; its smoothed value reads d2[j-half..j+half].
  const auto half = static_cast<std::size_t>(opts.smoothing_window / 2);
  std::size_t end = 0;
  while (end < nd && end + 2 + half < floor_k) ++end;
  rep.analysis_end = static_cast<int>(end);

  int last_sign = 0;
  int first_change_from = 0;
  std::size_t j = 0;
  while (j < end) {
    auto sign_at = [&](std::size_t t) {
      const double s = rep.smoothed_second_diffs[t];
      return s > rep.smoothed_band[t] ? 1 : (s < -rep.smoothed_band[t] ? -1 : 0);
    };
    const int sign = sign_at(j);
    std::size_t run_end = j + 1;
    while (run_end < end && sign_at(run_end) == sign) ++run_end;
    if (sign != 0 && static_cast<int>(run_end - j) >= opts.min_run) {
      if (last_sign != 0 && sign != last_sign) {
        if (rep.sign_changes == 0) {
          rep.first_sign_change = static_cast<int>(j);
          first_change_from = last_sign;
        }
        ++rep.sign_changes;
      }
      last_sign = sign;
    }
    j = run_end;
  }
  rep.single_positive_to_negative = rep.sign_changes == 1 && first_change_from == 1;
  return rep;
}

bool RecursionReport::all_pass() const {
  return k1_pass && std::all_of(records.begin(), records.end(), [](const RecursionRecord& r) { return r.pass; });
}

RecursionReport verify_recursion(const TrajectoryConfig& cfg, int k_max) {
  cfg.validate();
  if (cfg.spec.mean != 0.0) {
    throw PreconditionError(
        fmt::format("verify_recursion requires a mean-zero correlation distribution, got mean={}", cfg.spec.mean));
  }
  if (k_max < 1 || k_max > cfg.K - 1) {
    throw ArgumentError(fmt::format("k_max must lie in [1, {}], got {}", cfg.K - 1, k_max));
  }

  // Disjoint from the stream ids used by run_simulation.
  constexpr std::uint64_t kFreshStreams = std::uint64_t{1} << 40;
  std::vector<TrajectoryPath> paths(static_cast<std::size_t>(cfg.N));
  parallel_for(paths.size(), cfg.threads, [&](std::size_t i) {
    paths[i] = run_trajectory_detailed(cfg, static_cast<int>(i), k_max, kFreshStreams);
  });

  RecursionReport rep;
  rep.trajectories = cfg.N;

  // Var(rho): pooled over every correlation actually used; its standard
  // error from the spread of the per-trajectory variances.
  std::vector<double> per_traj_var;
  double sum = 0.0, sum_sq = 0.0;
  std::size_t count = 0;
  for (const auto& p : paths) {
    const Quantiles q = summarize_values(p.correlations);
    per_traj_var.push_back(q.variance);
    for (double r : p.correlations) {
      sum += r;
      sum_sq += r * r;
    }
    count += p.correlations.size();
  }
  const double pooled_mean = sum / static_cast<double>(count);
  rep.var_rho = (sum_sq - static_cast<double>(count) * pooled_mean * pooled_mean) / static_cast<double>(count - 1);
  rep.var_rho_se = standard_error(per_traj_var);

  const std::size_t n = paths.size();
  std::vector<double> r2_k(n), inv_prev(n), paired(n);
  for (int k = 1; k <= k_max; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      const double r2 = 1.0 - paths[i].mse[static_cast<std::size_t>(k - 1)];
      const double prev_mse = k == 1 ? 1.0 : paths[i].mse[static_cast<std::size_t>(k - 2)];
      r2_k[i] = r2;
      inv_prev[i] = 1.0 / prev_mse;
      paired[i] = r2 - k * rep.var_rho * inv_prev[i];
    }
    RecursionRecord rec;
    rec.k = k;
    rec.lhs = mean_of(r2_k);
    const double mean_inv = mean_of(inv_prev);
    rec.rhs = k * rep.var_rho * mean_inv;
    rec.lhs_se = standard_error(r2_k);
    const double var_term = k * mean_inv * rep.var_rho_se;
    const double inv_term = k * rep.var_rho * standard_error(inv_prev);
    rec.rhs_se = std::sqrt(var_term * var_term + inv_term * inv_term);
    // Both sides come from the same draws; the paired difference carries the
    // shared noise once.
    const double paired_se = standard_error(paired);
    rec.combined_se = std::sqrt(paired_se * paired_se + var_term * var_term);
    rec.pass = std::abs(rec.lhs - rec.rhs) <= 3.0 * rec.combined_se;
    rep.records.push_back(rec);
  }
  const auto& first = rep.records.front();
  const double k1_se = std::sqrt(first.lhs_se * first.lhs_se + rep.var_rho_se * rep.var_rho_se);
  rep.k1_pass = std::abs(first.lhs - rep.var_rho) <= 3.0 * k1_se;
  return rep;
}

std::vector<double> theory_mean_curve(double rho_bar, int k_max) {
  if (!(rho_bar >= 0.0 && rho_bar < 1.0)) {
    throw ArgumentError(fmt::format("rho_bar must lie in [0, 1), got {}", rho_bar));
  }
  if (k_max < 1) throw ArgumentError("k_max must be >= 1");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(k_max));
  for (int k = 1; k <= k_max; ++k) out.push_back(k * rho_bar * rho_bar / (1.0 + (k - 1) * rho_bar));
  return out;
}

double partial_correlation_at_mean(double rho_bar, int k) {
  if (!(rho_bar >= 0.0 && rho_bar < 1.0)) {
    throw ArgumentError(fmt::format("rho_bar must lie in [0, 1), got {}", rho_bar));
  }
  if (k < 2) throw ArgumentError(fmt::format("partial correlation needs k >= 2, got {}", k));
  return rho_bar / (1.0 + (k - 2) * rho_bar);
}

}  // namespace lcurve
