#include "lcurve/mlens.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <boost/random/uniform_int_distribution.hpp>
#include <fmt/format.h>

#include "lcurve/csv.hpp"
#include "lcurve/errors.hpp"
#include "lcurve/parallel.hpp"

namespace lcurve::mlens {

namespace {

struct PairHash {
  std::size_t operator()(const std::pair<std::int64_t, std::int64_t>& p) const noexcept {
    return std::hash<std::int64_t>{}(static_cast<std::int64_t>(mix64(static_cast<std::uint64_t>(p.first))) ^ p.second);
  }
};

template <typename T>
bool parse_int(std::string_view s, T& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

void validate(const RatingsDataset& ds) {
  std::unordered_set<std::pair<std::int64_t, std::int64_t>, PairHash> seen;
  seen.reserve(ds.rows.size());
  for (std::size_t n = 0; n < ds.rows.size(); ++n) {
    const RatingRow& r = ds.rows[n];
    if (r.user <= 0 || r.item <= 0) {
      throw ValidationError(fmt::format("row {}: ids must be positive (user {}, item {})", n + 1, r.user, r.item));
    }
    if (r.rating < 1 || r.rating > 5) {
      throw ValidationError(fmt::format("row {}: rating {} outside 1..5", n + 1, r.rating));
    }
    if (!seen.emplace(r.user, r.item).second) {
      throw ValidationError(fmt::format("row {}: duplicate rating for user {} item {}", n + 1, r.user, r.item));
    }
  }
}

std::vector<cf::Rating> to_ratings(std::span<const RatingRow> rows) {
  std::vector<cf::Rating> out;
  out.reserve(rows.size());
  for (const RatingRow& r : rows) out.push_back({r.user, r.item, static_cast<double>(r.rating)});
  return out;
}

RatingsDataset parse_movielens(std::istream& in) {
  RatingsDataset ds;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string_view> parts;
    std::string_view rest(line);
    for (;;) {
      const auto pos = rest.find("::");
      parts.push_back(rest.substr(0, pos));
      if (pos == std::string_view::npos) break;
      rest.remove_prefix(pos + 2);
    }
    if (parts.size() != 4) {
      throw ParseError(fmt::format("expected 4 '::'-separated fields, found {}", parts.size()), lineno);
    }
    RatingRow r;
    if (!parse_int(parts[0], r.user)) throw ParseError(fmt::format("bad user id '{}'", parts[0]), lineno);
    if (!parse_int(parts[1], r.item)) throw ParseError(fmt::format("bad movie id '{}'", parts[1]), lineno);
    if (!parse_int(parts[2], r.rating)) throw ParseError(fmt::format("bad rating '{}'", parts[2]), lineno);
    if (!parse_int(parts[3], r.timestamp)) throw ParseError(fmt::format("bad timestamp '{}'", parts[3]), lineno);
    ds.rows.push_back(r);
  }
  validate(ds);
  return ds;
}

RatingsDataset load_movielens(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open ratings file '{}'", path.string()));
  return parse_movielens(in);
}

namespace {

Distribution describe(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  Distribution d;
  auto at = [&](double p) { return v[static_cast<std::size_t>(std::floor(p * static_cast<double>(v.size() - 1)))]; };
  d.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  d.min = v.front();
  d.max = v.back();
  d.p25 = at(0.25);
  d.p50 = at(0.50);
  d.p75 = at(0.75);
  return d;
}

}  // namespace

DatasetSummary summarize(const RatingsDataset& ds, int threshold) {
  if (ds.rows.empty()) throw ArgumentError("summarize: empty dataset");
  std::map<std::int64_t, double> per_user, per_item;
  std::vector<double> ratings;
  ratings.reserve(ds.rows.size());
  for (const RatingRow& r : ds.rows) {
    ratings.push_back(r.rating);
    per_user[r.user] += 1.0;
    per_item[r.item] += 1.0;
  }
  auto values = [](const std::map<std::int64_t, double>& m) {
    std::vector<double> v;
    v.reserve(m.size());
    for (const auto& [id, c] : m) v.push_back(c);
    return v;
  };
  DatasetSummary s;
  s.rating = describe(std::move(ratings));
  s.per_user = describe(values(per_user));
  s.per_item = describe(values(per_item));
  s.n_ratings = ds.rows.size();
  s.n_users = per_user.size();
  s.n_items = per_item.size();
  s.threshold = threshold;
  s.items_at_threshold = static_cast<std::size_t>(
      std::count_if(per_item.begin(), per_item.end(), [&](const auto& kv) { return kv.second >= threshold; }));
  return s;
}

HoldoutSplit make_holdout(const RatingsDataset& ds, RngStream& rng) {
  std::map<std::int64_t, std::vector<std::size_t>> by_user;
  for (std::size_t n = 0; n < ds.rows.size(); ++n) by_user[ds.rows[n].user].push_back(n);
  std::vector<char> held(ds.rows.size(), 0);
  HoldoutSplit split;
  split.holdout.reserve(by_user.size());
  for (const auto& [user, rows] : by_user) {
    if (rows.size() < 2) {
      throw ValidationError(fmt::format("make_holdout: user {} has {} rating(s); need at least 2", user, rows.size()));
    }
    boost::random::uniform_int_distribution<std::size_t> pick(0, rows.size() - 1);
    const std::size_t chosen = rows[pick(rng)];
    held[chosen] = 1;
    split.holdout.push_back(ds.rows[chosen]);
  }
  split.train_pool.reserve(ds.rows.size() - split.holdout.size());
  for (std::size_t n = 0; n < ds.rows.size(); ++n) {
    if (!held[n]) split.train_pool.push_back(ds.rows[n]);
  }
  return split;
}

void AccumulationConfig::validate() const {
  if (outer_iterations < 1) throw ArgumentError("acc.outer_iterations must be >= 1");
  if (checkpoint_step < 1) throw ArgumentError("acc.checkpoint_step must be >= 1");
  if (checkpoint_max < checkpoint_step) throw ArgumentError("acc.checkpoint_max must be >= acc.checkpoint_step");
  if (popularity_threshold < 1) throw ArgumentError("acc.threshold must be >= 1");
  if (!(rootn_constant > 0.0)) throw ArgumentError("acc.rootn_c must be > 0");
  if (threads < 1) throw ArgumentError("threads must be >= 1");
  hp.validate();
}

std::vector<int> AccumulationConfig::checkpoints() const {
  std::vector<int> out;
  for (int k = checkpoint_step; k <= checkpoint_max; k += checkpoint_step) out.push_back(k);
  return out;
}

IterationPlan plan_iteration(const RatingsDataset& ds, const AccumulationConfig& cfg, int iteration) {
  RngStream rng(cfg.base_seed, static_cast<std::uint64_t>(iteration));
  HoldoutSplit split = make_holdout(ds, rng);
  IterationPlan plan;
  plan.iteration = iteration;
  plan.holdout = std::move(split.holdout);
  plan.shuffled = std::move(split.train_pool);
  for (std::size_t n = plan.shuffled.size(); n > 1; --n) {
    boost::random::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::swap(plan.shuffled[n - 1], plan.shuffled[pick(rng)]);
  }
  for (std::size_t t = 0; t < plan.shuffled.size(); ++t) plan.shuffled[t].timestamp = static_cast<std::int64_t>(t);

  // crossing[c] = first fake timestamp at which c+1 items have reached the threshold.
  std::unordered_map<std::int64_t, int> counts;
  std::vector<std::size_t> crossing;
  for (std::size_t t = 0; t < plan.shuffled.size(); ++t) {
    if (++counts[plan.shuffled[t].item] == cfg.popularity_threshold) crossing.push_back(t);
  }
  for (int k : cfg.checkpoints()) {
    if (static_cast<std::size_t>(k) > crossing.size()) {
      plan.truncated = true;
      break;
    }
    plan.cuts.push_back({k, crossing[static_cast<std::size_t>(k - 1)] + 1});
  }
  return plan;
}

CheckpointReport run_checkpoint(const IterationPlan& plan, const IterationPlan::Cut& cut,
                                const AccumulationConfig& cfg) {
  const std::span<const RatingRow> rows(plan.shuffled.data(), cut.rows);
  const std::vector<cf::Rating> train_set = to_ratings(rows);
  const cf::SvdModel model =
      cf::train(train_set, cfg.hp, derive_seed(cfg.base_seed, static_cast<std::uint64_t>(plan.iteration)));
  const std::vector<cf::Rating> holdout = to_ratings(plan.holdout);
  const cf::Evaluation ev = cf::evaluate_rmse(model, holdout);

  CheckpointReport rep;
  rep.iteration = plan.iteration;
  rep.k_prime = cut.k_prime;
  rep.rmse = ev.rmse;
  rep.share_full = ev.share_full;
  rep.n_users = static_cast<std::int64_t>(model.user_ids.size());
  rep.n_items = static_cast<std::int64_t>(model.item_ids.size());
  rep.n_ratings = static_cast<std::int64_t>(cut.rows);
  rep.rootn_baseline = cfg.rootn_constant / std::sqrt(static_cast<double>(cut.rows));
  return rep;
}

std::vector<IterationResult> run_accumulation(const RatingsDataset& ds, const AccumulationConfig& cfg) {
  cfg.validate();
  std::vector<IterationResult> results(static_cast<std::size_t>(cfg.outer_iterations));
  parallel_for(results.size(), cfg.threads, [&](std::size_t i) {
    IterationResult& res = results[i];
    res.iteration = static_cast<int>(i);
    const IterationPlan plan = plan_iteration(ds, cfg, res.iteration);
    res.truncated = plan.truncated;
    try {
      for (const auto& cut : plan.cuts) res.reports.push_back(run_checkpoint(plan, cut, cfg));
    } catch (const DivergenceError& e) {
      res.failed = true;
      res.error = e.what();
      res.reports.clear();
    }
  });
  return results;
}

namespace {

struct Accum {
  std::vector<double> rmse, share, users, items, ratings, rootn;
};

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stderr_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1)) / std::sqrt(static_cast<double>(v.size()));
}

}  // namespace

std::vector<AggregateRow> aggregate_reports(std::span<const CheckpointReport> reports) {
  if (reports.empty()) throw ArgumentError("aggregate_reports: no successful iterations");
  // Iteration order within each k' follows input order, which callers keep sorted.
  std::map<int, Accum> by_k;
  for (const auto& r : reports) {
    Accum& a = by_k[r.k_prime];
    a.rmse.push_back(r.rmse);
    a.share.push_back(r.share_full);
    a.users.push_back(static_cast<double>(r.n_users));
    a.items.push_back(static_cast<double>(r.n_items));
    a.ratings.push_back(static_cast<double>(r.n_ratings));
    a.rootn.push_back(r.rootn_baseline);
  }
  std::vector<AggregateRow> out;
  for (const auto& [k, a] : by_k) {
    AggregateRow row;
    row.k_prime = k;
    row.iterations = static_cast<int>(a.rmse.size());
    row.mean_rmse = mean(a.rmse);
    row.stderr_rmse = stderr_of(a.rmse);
    row.mean_share_full = mean(a.share);
    row.stderr_share_full = stderr_of(a.share);
    row.mean_n_users = mean(a.users);
    row.stderr_n_users = stderr_of(a.users);
    row.mean_n_items = mean(a.items);
    row.stderr_n_items = stderr_of(a.items);
    row.mean_n_ratings = mean(a.ratings);
    row.stderr_n_ratings = stderr_of(a.ratings);
    row.mean_rootn = mean(a.rootn);
    out.push_back(row);
  }
  return out;
}

std::vector<AggregateRow> aggregate_reports(const std::vector<IterationResult>& results) {
  std::vector<CheckpointReport> flat;
  for (const auto& r : results) {
    if (!r.failed) flat.insert(flat.end(), r.reports.begin(), r.reports.end());
  }
  return aggregate_reports(flat);
}

void write_iteration_csv(std::ostream& out, const std::vector<IterationResult>& results) {
  out << kIterationCsvHeader << '\n';
  for (const auto& res : results) {
    for (const auto& r : res.reports) {
      csv::write_row(out, {csv::number(r.iteration), csv::number(r.k_prime), csv::number(r.rmse),
                           csv::number(r.share_full), csv::number(r.n_users), csv::number(r.n_items),
                           csv::number(r.n_ratings), csv::number(r.rootn_baseline)});
    }
  }
}

std::vector<CheckpointReport> read_iteration_csv(std::istream& in) {
  const csv::Table t = csv::read(in);
  const std::size_t c_it = t.column("iteration"), c_k = t.column("k_prime"), c_rmse = t.column("rmse"),
                    c_share = t.column("share_full"), c_u = t.column("n_users"), c_i = t.column("n_items"),
                    c_n = t.column("n_ratings"), c_root = t.column("rootn_baseline");
  std::vector<CheckpointReport> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::size_t line = r + 2;
    CheckpointReport rep;
    rep.iteration = static_cast<int>(csv::to_int(row[c_it], line));
    rep.k_prime = static_cast<int>(csv::to_int(row[c_k], line));
    rep.rmse = csv::to_double(row[c_rmse], line);
    rep.share_full = csv::to_double(row[c_share], line);
    rep.n_users = csv::to_int(row[c_u], line);
    rep.n_items = csv::to_int(row[c_i], line);
    rep.n_ratings = csv::to_int(row[c_n], line);
    rep.rootn_baseline = csv::to_double(row[c_root], line);
    out.push_back(rep);
  }
  return out;
}

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << kAggregateCsvHeader << '\n';
  for (const auto& r : rows) {
    csv::write_row(out, {csv::number(r.k_prime), csv::number(r.mean_rmse), csv::number(r.stderr_rmse),
                         csv::number(r.mean_share_full), csv::number(r.mean_n_users), csv::number(r.mean_n_items),
                         csv::number(r.mean_n_ratings), csv::number(r.mean_rootn)});
  }
}

}  // namespace lcurve::mlens
