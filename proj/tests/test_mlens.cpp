#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "lcurve/errors.hpp"
#include "lcurve/mlens.hpp"

using namespace lcurve;
using namespace lcurve::mlens;

namespace {

RatingsDataset parse(const std::string& text) {
  std::istringstream in(text);
  return parse_movielens(in);
}

SyntheticConfig desk_config() {
  SyntheticConfig c;  // 1000 x 300, power-law popularity
  return c;
}

AccumulationConfig desk_accumulation(int iterations = 3) {
  AccumulationConfig a;
  a.outer_iterations = iterations;
  a.checkpoint_step = 10;
  a.checkpoint_max = 50;
  a.popularity_threshold = 20;
  a.hp.n_factors = 10;
  a.hp.n_epochs = 5;
  return a;
}

std::set<std::pair<std::int64_t, std::int64_t>> keys(std::span<const RatingRow> rows) {
  std::set<std::pair<std::int64_t, std::int64_t>> s;
  for (const auto& r : rows) s.emplace(r.user, r.item);
  return s;
}

}  // namespace

TEST_CASE("parse examples") {
  const auto ds = parse("1::1193::5::978300760\n");
  REQUIRE(ds.rows.size() == 1);
  CHECK(ds.rows[0] == RatingRow{1, 1193, 5, 978300760});
  CHECK(parse("").rows.empty());
  CHECK(parse("\n1::2::3::4\r\n\n").rows.size() == 1);
}

TEST_CASE("parse errors carry the line number") {
  try {
    parse("1::1193::5\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 1);
  }
  try {
    parse("1::1::5::0\n2::x::5::0\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse("1::1::5::0\n1::1::4::1\n"), ValidationError);
  CHECK_THROWS_AS(parse("1::1::6::0\n"), ValidationError);
  CHECK_THROWS_AS(parse("0::1::3::0\n"), ValidationError);
  CHECK_THROWS_AS(load_movielens("/nonexistent/ratings.dat"), IoError);
}

TEST_CASE("summary") {
  const auto s = summarize(parse("1::1::1::0\n1::2::5::0\n"));
  CHECK(s.rating.mean == 3.0);
  CHECK(s.per_user.mean == 2.0);
  CHECK(s.n_users == 1);
  CHECK(s.n_items == 2);
  CHECK_THROWS_AS(summarize(RatingsDataset{}), ArgumentError);

  // Lower percentile convention on counts {1, 2, 3, 4}: p25 = sorted[0], p50 = sorted[1].
  const auto t = summarize(parse("1::1::3::0\n2::1::3::0\n2::2::3::0\n3::1::3::0\n3::2::3::0\n3::3::3::0\n"
                                 "4::1::3::0\n4::2::3::0\n4::3::3::0\n4::4::3::0\n"),
                           3);
  CHECK(t.per_user.p25 == 1.0);
  CHECK(t.per_user.p50 == 2.0);
  CHECK(t.per_user.p75 == 3.0);
  CHECK(t.per_user.max == 4.0);
  CHECK(t.items_at_threshold == 2);  // items 1 (4 ratings) and 2 (3 ratings)
}

TEST_CASE("holdout basics") {
  const auto ds = synthetic_dataset(desk_config(), 1);
  RngStream a(5, 0), b(5, 0);
  const auto s1 = make_holdout(ds, a);
  const auto s2 = make_holdout(ds, b);
  CHECK(s1.holdout == s2.holdout);
  CHECK(s1.holdout.size() == 1000);
  CHECK(s1.holdout.size() + s1.train_pool.size() == ds.rows.size());
  std::set<std::int64_t> users;
  for (const auto& r : s1.holdout) users.insert(r.user);
  CHECK(users.size() == 1000);
  const auto h = keys(s1.holdout), t = keys(s1.train_pool);
  for (const auto& k : h) CHECK(t.count(k) == 0);

  CHECK_THROWS_AS(
      [] {
        RngStream r(1, 0);
        make_holdout(parse("1::1::3::0\n1::2::3::0\n2::1::3::0\n"), r);
      }(),
      ValidationError);
}

TEST_CASE("holdout choice is uniform within a user") {
  const auto ds = parse("1::10::3::0\n1::20::3::0\n1::30::3::0\n");
  std::array<int, 3> hits{};
  const int n = 10000;
  for (int s = 0; s < n; ++s) {
    RngStream r(static_cast<std::uint64_t>(s), 0);
    const auto split = make_holdout(ds, r);
    hits[static_cast<std::size_t>(split.holdout[0].item / 10 - 1)]++;
  }
  const double sd = std::sqrt(n * (1.0 / 3) * (2.0 / 3));
  for (int h : hits) CHECK(std::abs(h - n / 3.0) <= 3 * sd);
}

TEST_CASE("accumulation config") {
  AccumulationConfig a;
  CHECK(a.checkpoints().size() == 20);
  CHECK(a.checkpoints().front() == 100);
  CHECK(a.checkpoints().back() == 2000);
  a.checkpoint_max = 50;
  CHECK_THROWS_AS(a.validate(), ArgumentError);
}

TEST_CASE("checkpoint cuts follow the popularity count") {
  // threshold 1, step 1: the k-th checkpoint is where the k-th distinct item first appears.
  RatingsDataset ds;
  std::int64_t t = 0;
  for (int u = 1; u <= 30; ++u) {
    for (int i = 1; i <= 6; ++i) ds.rows.push_back({u, (u + i) % 12 + 1, 3, t++});
  }
  AccumulationConfig cfg;
  cfg.outer_iterations = 1;
  cfg.checkpoint_step = 1;
  cfg.checkpoint_max = 12;
  cfg.popularity_threshold = 1;
  const auto plan = plan_iteration(ds, cfg, 0);
  REQUIRE(plan.cuts.size() == 12);
  std::set<std::int64_t> seen;
  std::size_t k = 0;
  for (std::size_t row = 0; row < plan.shuffled.size() && k < 12; ++row) {
    CHECK(plan.shuffled[row].timestamp == static_cast<std::int64_t>(row));
    if (seen.insert(plan.shuffled[row].item).second) {
      CHECK(plan.cuts[k].rows == row + 1);
      ++k;
    }
  }
}

TEST_CASE("training sets nest and never contain the holdout") {
  const auto ds = synthetic_dataset(desk_config(), 2);
  const auto cfg = desk_accumulation();
  for (int it = 0; it < 3; ++it) {
    const auto plan = plan_iteration(ds, cfg, it);
    const auto held = keys(plan.holdout);
    std::size_t prev = 0;
    for (const auto& cut : plan.cuts) {
      CHECK(cut.rows >= prev);
      prev = cut.rows;
      // Items at threshold within the cut reach k'.
      std::map<std::int64_t, int> counts;
      for (std::size_t r = 0; r < cut.rows; ++r) counts[plan.shuffled[r].item]++;
      int popular = 0;
      for (const auto& [item, c] : counts) popular += c >= cfg.popularity_threshold;
      CHECK(popular >= cut.k_prime);
    }
    for (const auto& r : plan.shuffled) CHECK(held.count({r.user, r.item}) == 0);
  }
}

TEST_CASE("unreachable checkpoints truncate") {
  SyntheticConfig small;
  small.n_users = 100;
  small.n_items = 40;
  auto cfg = desk_accumulation(1);
  cfg.checkpoint_max = 200;
  const auto plan = plan_iteration(synthetic_dataset(small, 1), cfg, 0);
  CHECK(plan.truncated);
  CHECK(plan.cuts.size() < cfg.checkpoints().size());
}

TEST_CASE("accumulation reports and aggregation") {
  const auto ds = synthetic_dataset(desk_config(), 3);
  auto cfg = desk_accumulation();
  const auto results = run_accumulation(ds, cfg);
  REQUIRE(results.size() == 3);
  for (const auto& it : results) {
    REQUIRE_FALSE(it.failed);
    REQUIRE(it.reports.size() == 5);
    for (std::size_t c = 0; c < it.reports.size(); ++c) {
      const auto& r = it.reports[c];
      CHECK(r.rootn_baseline == doctest::Approx(100.0 / std::sqrt(static_cast<double>(r.n_ratings))));
      if (c) {
        CHECK(r.n_ratings >= it.reports[c - 1].n_ratings);
        CHECK(r.n_users >= it.reports[c - 1].n_users);
        CHECK(r.n_items >= it.reports[c - 1].n_items);
      }
    }
  }
  const auto agg = aggregate_reports(results);
  REQUIRE(agg.size() == 5);
  CHECK(agg[0].k_prime == 10);
  CHECK(agg[0].iterations == 3);

  cfg.threads = 3;
  const auto threaded = run_accumulation(ds, cfg);
  for (std::size_t i = 0; i < results.size(); ++i) {
    for (std::size_t c = 0; c < results[i].reports.size(); ++c) {
      CHECK(results[i].reports[c].rmse == threaded[i].reports[c].rmse);
    }
  }
}

TEST_CASE("aggregation edge cases") {
  std::vector<CheckpointReport> one{{0, 10, 0.9, 0.5, 10, 20, 100, 10.0}};
  const auto a = aggregate_reports(one);
  CHECK(a[0].mean_rmse == 0.9);
  CHECK(a[0].stderr_rmse == 0.0);
  std::vector<CheckpointReport> twins{{0, 10, 0.9, 0.5, 10, 20, 100, 10.0}, {1, 10, 0.9, 0.5, 10, 20, 100, 10.0}};
  CHECK(aggregate_reports(twins)[0].stderr_rmse == 0.0);
  CHECK_THROWS_AS(aggregate_reports(std::span<const CheckpointReport>{}), ArgumentError);
  std::vector<IterationResult> failed{{0, true, "boom", false, {}}};
  CHECK_THROWS_AS(aggregate_reports(failed), ArgumentError);
}

TEST_CASE("per-iteration CSV round trips through the aggregate") {
  const auto results = run_accumulation(synthetic_dataset(desk_config(), 4), desk_accumulation());
  std::stringstream ss;
  write_iteration_csv(ss, results);
  CHECK(ss.str().rfind(std::string(kIterationCsvHeader) + "\n", 0) == 0);
  const auto reread = read_iteration_csv(ss);
  const auto a = aggregate_reports(results), b = aggregate_reports(reread);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(std::abs(a[i].mean_rmse - b[i].mean_rmse) <= 1e-12);
    CHECK(std::abs(a[i].stderr_rmse - b[i].stderr_rmse) <= 1e-12);
    CHECK(std::abs(a[i].mean_n_ratings - b[i].mean_n_ratings) <= 1e-12);
  }
  std::stringstream agg;
  write_aggregate_csv(agg, a);
  std::string header;
  std::getline(agg, header);
  CHECK(header == kAggregateCsvHeader);
}

TEST_CASE("synthetic generator") {
  SyntheticConfig c;
  c.n_users = 50;
  c.n_items = 40;
  c.density = 0.25;
  const auto a = synthetic_ratings(c, 1);
  CHECK(a.size() == 50u * 10);
  for (const auto& r : a) CHECK((r.value >= 1.0 && r.value <= 5.0));
  const auto b = synthetic_ratings(c, 1);
  CHECK(std::equal(a.begin(), a.end(), b.begin(),
                   [](const auto& x, const auto& y) { return x.user == y.user && x.item == y.item && x.value == y.value; }));
  const auto ds = synthetic_dataset(c, 1);
  CHECK_NOTHROW(validate(ds));

  // Popularity falls with item rank.
  const auto big = synthetic_dataset(desk_config(), 1);
  const auto s = summarize(big);
  std::map<std::int64_t, int> counts;
  for (const auto& r : big.rows) counts[r.item]++;
  CHECK(counts[1] > counts[150]);
  CHECK(counts[10] > counts[290]);
  CHECK(s.n_users == 1000);

  c.density = 0;
  CHECK_THROWS_AS(c.validate(), ArgumentError);
}
