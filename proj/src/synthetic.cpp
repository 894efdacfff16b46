#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/random/normal_distribution.hpp>
#include <fmt/format.h>

#include "lcurve/errors.hpp"
#include "lcurve/mlens.hpp"

namespace lcurve::mlens {

void SyntheticConfig::validate() const {
  if (n_users < 1 || n_items < 1) throw ArgumentError("synthetic: n_users and n_items must be >= 1");
  if (rank < 1) throw ArgumentError("synthetic: rank must be >= 1");
  if (!(density > 0.0 && density <= 1.0)) throw ArgumentError("synthetic: density must lie in (0, 1]");
  if (min_per_user < 1 || min_per_user > n_items) throw ArgumentError("synthetic: min_per_user must lie in [1, n_items]");
  if (!(popularity_exponent >= 0.0)) throw ArgumentError("synthetic: popularity_exponent must be >= 0");
  if (!(noise >= 0.0) || !(interaction_std >= 0.0) || !(bias_std >= 0.0)) {
    throw ArgumentError("synthetic: noise, interaction_std and bias_std must be >= 0");
  }
}

std::vector<cf::Rating> synthetic_ratings(const SyntheticConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  RngStream rng(seed, 0);
  boost::random::normal_distribution<double> std_normal(0.0, 1.0);

  // var(<u, v>) = rank * s^4 for iid Normal(0, s) entries.
  const double s = std::pow(cfg.interaction_std * cfg.interaction_std / cfg.rank, 0.25);
  const auto nu = static_cast<std::size_t>(cfg.n_users), ni = static_cast<std::size_t>(cfg.n_items),
             r = static_cast<std::size_t>(cfg.rank);
  std::vector<double> uf(nu * r), vf(ni * r), ub(nu), ib(ni);
  for (double& x : uf) x = s * std_normal(rng);
  for (double& x : vf) x = s * std_normal(rng);
  for (double& x : ub) x = cfg.bias_std * std_normal(rng);
  for (double& x : ib) x = cfg.bias_std * std_normal(rng);

  std::vector<double> log_weight(ni);
  for (std::size_t j = 0; j < ni; ++j) log_weight[j] = -cfg.popularity_exponent * std::log(static_cast<double>(j + 1));

  const auto per_user = std::max<std::size_t>(static_cast<std::size_t>(cfg.min_per_user),
                                              static_cast<std::size_t>(std::lround(cfg.density * cfg.n_items)));
  const std::size_t take = std::min(per_user, ni);

  std::vector<cf::Rating> out;
  out.reserve(nu * take);
  std::vector<std::pair<double, std::size_t>> keys(ni);
  for (std::size_t u = 0; u < nu; ++u) {
    // Weighted sampling without replacement: keep the largest log(U)/w.
    for (std::size_t j = 0; j < ni; ++j) {
      const double uni = std::max(rng.uniform01(), 0x1.0p-60);
      keys[j] = {std::log(uni) / std::exp(log_weight[j]), j};
    }
    std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(take), keys.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
    std::vector<std::size_t> items(take);
    for (std::size_t t = 0; t < take; ++t) items[t] = keys[t].second;
    std::sort(items.begin(), items.end());
    for (std::size_t j : items) {
      double v = cfg.base + ub[u] + ib[j] + cfg.noise * std_normal(rng);
      for (std::size_t f = 0; f < r; ++f) v += uf[u * r + f] * vf[j * r + f];
      out.push_back({static_cast<std::int64_t>(u + 1), static_cast<std::int64_t>(j + 1), std::clamp(v, 1.0, 5.0)});
    }
  }
  return out;
}

RatingsDataset synthetic_dataset(const SyntheticConfig& cfg, std::uint64_t seed) {
  const std::vector<cf::Rating> ratings = synthetic_ratings(cfg, seed);
  RatingsDataset ds;
  ds.rows.reserve(ratings.size());
  for (std::size_t t = 0; t < ratings.size(); ++t) {
    const auto& r = ratings[t];
    ds.rows.push_back({r.user, r.item, static_cast<int>(std::lround(r.value)), static_cast<std::int64_t>(t)});
  }
  return ds;
}

}  // namespace lcurve::mlens
