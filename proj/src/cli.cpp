#include "lcurve/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/chrono.h>
#include <fmt/format.h>
#include <json.hpp>

#include "lcurve/csv.hpp"
#include "lcurve/errors.hpp"
#include "lcurve/rng.hpp"
#include "lcurve/svg.hpp"

namespace lcurve::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr std::array kCommands{
    std::pair{Command::simulate, "simulate"},     std::pair{Command::verify, "verify"},
    std::pair{Command::theory, "theory"},         std::pair{Command::cf_train, "cf_train"},
    std::pair{Command::cf_eval, "cf_eval"},       std::pair{Command::accumulate, "accumulate"},
    std::pair{Command::ingest_summary, "ingest_summary"}, std::pair{Command::plot, "plot"},
};

// Stream id for the cf_train/cf_eval holdout split; far from the per-iteration
// streams used by accumulate.
constexpr std::uint64_t kHoldoutStream = 1ULL << 48;
constexpr std::uint64_t kSyntheticTag = 0x5717;

std::string_view describe(Command c) {
  switch (c) {
    case Command::simulate: return "run N trajectories and classify the mean mse curvature";
    case Command::verify: return "check the mean-zero recursion for k <= verify.k_max";
    case Command::theory: return "closed-form curve for an equicorrelated system";
    case Command::cf_train: return "train the biased SVD model";
    case Command::cf_eval: return "hold-out RMSE of a saved model against a bias-only baseline";
    case Command::accumulate: return "RMSE as training data accumulates over checkpoints";
    case Command::ingest_summary: return "ratings-file summary statistics";
    case Command::plot: return "SVG charts from the CSV files in plot.input";
  }
  return "";
}

std::string_view module_of(Command c) {
  switch (c) {
    case Command::simulate:
    case Command::verify:
    case Command::theory: return "trajectory";
    case Command::cf_train:
    case Command::cf_eval: return "cf";
    case Command::accumulate:
    case Command::ingest_summary: return "mlens";
    case Command::plot: return "cli";
  }
  return "cli";
}

class Writer {
 public:
  Writer(fs::path dir, std::ostream& log) : dir_(std::move(dir)), log_(log) {}

  void write(const std::string& name, const std::string& content) {
    const fs::path p = dir_ / name;
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError(fmt::format("cannot open '{}' for writing", p.string()));
    f << content;
    f.close();
    if (!f) throw IoError(fmt::format("failed writing '{}'", p.string()));
    files_.push_back(p);
    log_ << "wrote " << p.string() << '\n';
  }

  const fs::path& dir() const { return dir_; }
  std::vector<fs::path> files() const { return files_; }

 private:
  fs::path dir_;
  std::ostream& log_;
  std::vector<fs::path> files_;
};

csv::Table read_csv_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}'", p.string()));
  try {
    return csv::read(in);
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("in '{}'", p.string()), e.line());
  }
}

mlens::RatingsDataset load_dataset(const config::Settings& s) {
  const std::string& path = s.raw("ratings");
  if (!path.empty()) return mlens::load_movielens(path);
  return mlens::synthetic_dataset(s.synthetic(), derive_seed(s.unsigned_integer("seed"), kSyntheticTag));
}

mlens::HoldoutSplit holdout_for(const mlens::RatingsDataset& ds, std::uint64_t seed) {
  RngStream rng(seed, kHoldoutStream);
  return mlens::make_holdout(ds, rng);
}

json quantiles_json(const Quantiles& q) {
  return json{{"count", q.count}, {"min", q.min},   {"p05", q.p05}, {"p25", q.p25},
              {"p50", q.p50},     {"p75", q.p75},   {"p95", q.p95}, {"max", q.max},
              {"mean", q.mean},   {"variance", q.variance}};
}

// Commands ------------------------------------------------------------------

void cmd_simulate(const Resolved& r, Writer& w, std::ostream& log) {
  const TrajectoryConfig cfg = r.settings.trajectory();
  const TrajectoryResult res = run_simulation(cfg);
  const RegimeReport rep = classify_returns(res, r.settings.regime());

  std::ostringstream paths;
  paths << "run_id,trajectory,k,mse\n";
  for (std::size_t i = 0; i < res.mse_paths.size(); ++i) {
    for (std::size_t k = 0; k < res.mse_paths[i].size(); ++k) {
      csv::write_row(paths, {r.run_id, csv::number(static_cast<std::int64_t>(i)), csv::number(static_cast<std::int64_t>(k + 1)),
                             csv::number(res.mse_paths[i][k])});
    }
  }
  w.write("trajectories.csv", paths.str());

  std::ostringstream summary;
  summary << "k,mean_mse,stderr,regime\n";
  for (std::size_t k = 0; k < res.mean_curve.size(); ++k) {
    // regimes[j] sits at k = j + 2 (1-based).
    std::string regime = "na";
    if (k >= 1 && k - 1 < rep.regimes.size()) regime = std::string(to_string(rep.regimes[k - 1]));
    csv::write_row(summary, {csv::number(static_cast<std::int64_t>(k + 1)), csv::number(res.mean_curve[k]),
                             csv::number(res.stderr_curve[k]), regime});
  }
  w.write("summary.csv", summary.str());

  bool non_increasing = true;
  for (std::size_t k = 1; k < res.mean_curve.size(); ++k) non_increasing &= res.mean_curve[k] <= res.mean_curve[k - 1] + 1e-12;
  json report{
      {"run_id", r.run_id},
      {"K", res.K},
      {"N", res.N},
      {"repaired", res.repaired_count},
      {"repair_nonconverged", res.nonconverged_count},
      {"corrected_offdiagonal", quantiles_json(res.corrected_offdiag_summary)},
      {"mean_curve_non_increasing", non_increasing},
      {"final_mean_mse", res.mean_curve.empty() ? 0.0 : res.mean_curve.back()},
      {"regime",
       {{"analysis_end_k", rep.analysis_end + 1},
        {"sign_changes", rep.sign_changes},
        {"first_sign_change_k", rep.first_sign_change ? json(*rep.first_sign_change + 2) : json(nullptr)},
        {"single_positive_to_negative", rep.single_positive_to_negative}}},
  };
  w.write("report.json", report.dump(2) + "\n");
  log << fmt::format("simulate: {} trajectories, {} repaired, sign changes {}\n", res.N, res.repaired_count,
                     rep.sign_changes);
}

void cmd_verify(const Resolved& r, Writer& w, std::ostream& log) {
  const RecursionReport rep = verify_recursion(r.settings.trajectory(), static_cast<int>(r.settings.integer("verify.k_max")));
  std::ostringstream out;
  out << "k,lhs,rhs,lhs_se,rhs_se,combined_se,pass\n";
  for (const auto& rec : rep.records) {
    csv::write_row(out, {csv::number(rec.k), csv::number(rec.lhs), csv::number(rec.rhs), csv::number(rec.lhs_se),
                         csv::number(rec.rhs_se), csv::number(rec.combined_se), rec.pass ? "true" : "false"});
  }
  w.write("recursion.csv", out.str());
  json report{{"run_id", r.run_id},     {"trajectories", rep.trajectories}, {"var_rho", rep.var_rho},
              {"var_rho_se", rep.var_rho_se}, {"k1_pass", rep.k1_pass},   {"all_pass", rep.all_pass()}};
  w.write("report.json", report.dump(2) + "\n");
  log << fmt::format("verify: {} trajectories, all within band: {}\n", rep.trajectories, rep.all_pass());
}

void cmd_theory(const Resolved& r, Writer& w, std::ostream&) {
  const double rho = r.settings.real("theory.rho_bar");
  const int k_max = static_cast<int>(r.settings.integer("theory.k_max"));
  const std::vector<double> r2 = theory_mean_curve(rho, k_max);
  std::ostringstream out;
  out << "k,r2,mse,partial_correlation\n";
  for (int k = 1; k <= k_max; ++k) {
    csv::write_row(out, {csv::number(k), csv::number(r2[k - 1]), csv::number(1.0 - r2[k - 1]),
                         k >= 2 ? csv::number(partial_correlation_at_mean(rho, k)) : std::string()});
  }
  w.write("theory.csv", out.str());
}

void cmd_cf_train(const Resolved& r, Writer& w, std::ostream& log) {
  const auto seed = r.settings.unsigned_integer("seed");
  const mlens::RatingsDataset ds = load_dataset(r.settings);
  const mlens::HoldoutSplit split = holdout_for(ds, seed);
  const std::vector<cf::Rating> train_set = mlens::to_ratings(split.train_pool);
  std::ostringstream epochs;
  epochs << "epoch,train_mse\n";
  const cf::SvdModel model = cf::train(train_set, r.settings.hyperparams(), seed, [&](int e, double mse) {
    csv::write_row(epochs, {csv::number(e), csv::number(mse)});
  });
  std::ostringstream m;
  cf::save_model(model, m);
  w.write("model.txt", m.str());
  w.write("train_log.csv", epochs.str());
  log << fmt::format("cf_train: {} training ratings, {} users, {} items\n", train_set.size(), model.user_ids.size(),
                     model.item_ids.size());
}

void cmd_cf_eval(const Resolved& r, Writer& w, std::ostream& log) {
  const auto seed = r.settings.unsigned_integer("seed");
  fs::path model_path = r.settings.raw("cf.model");
  if (model_path.empty()) model_path = r.run.out_dir / "model.txt";
  const cf::SvdModel model = cf::load_model(model_path);
  const mlens::RatingsDataset ds = load_dataset(r.settings);
  const mlens::HoldoutSplit split = holdout_for(ds, seed);
  const std::vector<cf::Rating> holdout = mlens::to_ratings(split.holdout);
  const cf::Evaluation ev = cf::evaluate_rmse(model, holdout);

  cf::Hyperparams base_hp = r.settings.hyperparams();
  base_hp.n_factors = 0;
  const std::vector<cf::Rating> train_set = mlens::to_ratings(split.train_pool);
  const cf::Evaluation base = cf::evaluate_rmse(cf::train(train_set, base_hp, seed), holdout);

  std::ostringstream out;
  out << "rmse,share_full,count,baseline_rmse\n";
  csv::write_row(out, {csv::number(ev.rmse), csv::number(ev.share_full), csv::number(static_cast<std::int64_t>(ev.count)),
                       csv::number(base.rmse)});
  w.write("evaluation.csv", out.str());
  log << fmt::format("cf_eval: rmse {:.6f} (bias-only {:.6f}) over {} holdout ratings\n", ev.rmse, base.rmse, ev.count);
}

void cmd_accumulate(const Resolved& r, Writer& w, std::ostream& log) {
  const mlens::RatingsDataset ds = load_dataset(r.settings);
  const mlens::AccumulationConfig cfg = r.settings.accumulation();
  const std::vector<mlens::IterationResult> results = mlens::run_accumulation(ds, cfg);
  std::size_t ok = 0;
  for (const auto& it : results) {
    if (it.failed) {
      log << fmt::format("warning: iteration {} failed: {}\n", it.iteration, it.error);
      continue;
    }
    ++ok;
    if (it.truncated) {
      log << fmt::format("warning: iteration {} reached only {} of {} checkpoints\n", it.iteration, it.reports.size(),
                         cfg.checkpoints().size());
    }
  }
  if (ok == 0) {
    throw NumericalError(fmt::format("all {} outer iterations failed; first: {}", results.size(),
                                     results.empty() ? std::string("none run") : results.front().error));
  }
  std::ostringstream iters;
  mlens::write_iteration_csv(iters, results);
  w.write("accumulate_iterations.csv", iters.str());
  std::ostringstream agg;
  mlens::write_aggregate_csv(agg, mlens::aggregate_reports(results));
  w.write("accumulate_aggregate.csv", agg.str());
}

void cmd_ingest(const Resolved& r, Writer& w, std::ostream& log) {
  const mlens::RatingsDataset ds = load_dataset(r.settings);
  const mlens::DatasetSummary s = mlens::summarize(ds, static_cast<int>(r.settings.integer("acc.threshold")));
  std::ostringstream out;
  out << "quantity,mean,min,p25,p50,p75,max\n";
  auto row = [&](const char* name, const mlens::Distribution& d) {
    csv::write_row(out, {name, csv::number(d.mean), csv::number(d.min), csv::number(d.p25), csv::number(d.p50),
                         csv::number(d.p75), csv::number(d.max)});
  };
  row("rating", s.rating);
  row("ratings_per_user", s.per_user);
  row("ratings_per_item", s.per_item);
  w.write("ingest_summary.csv", out.str());
  std::ostringstream counts;
  counts << "n_ratings,n_users,n_items,threshold,items_at_threshold\n";
  csv::write_row(counts, {csv::number(static_cast<std::int64_t>(s.n_ratings)), csv::number(static_cast<std::int64_t>(s.n_users)),
                          csv::number(static_cast<std::int64_t>(s.n_items)), csv::number(s.threshold),
                          csv::number(static_cast<std::int64_t>(s.items_at_threshold))});
  w.write("ingest_counts.csv", counts.str());
  log << fmt::format("ingest_summary: {} ratings, {} users, {} items\n", s.n_ratings, s.n_users, s.n_items);
}

// Plotting reads the CSVs only.

std::map<std::int64_t, svg::Series> grouped_series(const csv::Table& t, std::string_view group, std::string_view x,
                                                   std::string_view y) {
  const std::size_t gc = t.column(group), xc = t.column(x), yc = t.column(y);
  std::map<std::int64_t, svg::Series> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    auto& s = out[csv::to_int(t.rows[i][gc], i + 2)];
    s.x.push_back(csv::to_double(t.rows[i][xc], i + 2));
    s.y.push_back(csv::to_double(t.rows[i][yc], i + 2));
  }
  return out;
}

svg::Series column_series(const csv::Table& t, std::string_view x, std::string_view y) {
  const std::size_t xc = t.column(x), yc = t.column(y);
  svg::Series s;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    if (t.rows[i][yc].empty()) continue;
    s.x.push_back(csv::to_double(t.rows[i][xc], i + 2));
    s.y.push_back(csv::to_double(t.rows[i][yc], i + 2));
  }
  return s;
}

void add_traces(svg::Chart& chart, std::map<std::int64_t, svg::Series> traces) {
  for (auto& [id, s] : traces) {
    s.stroke = "#c8c8c8";
    s.width = 0.6;
    chart.series.push_back(std::move(s));
  }
}

void cmd_plot(const Resolved& r, Writer& w, std::ostream&) {
  fs::path in = r.settings.raw("plot.input");
  if (in.empty()) in = r.run.out_dir;
  int charts = 0;

  if (fs::exists(in / "summary.csv")) {
    svg::Chart c{"Learning trajectories", "k (predictors)", "MSE", 640, 420, {}};
    if (fs::exists(in / "trajectories.csv")) {
      add_traces(c, grouped_series(read_csv_file(in / "trajectories.csv"), "trajectory", "k", "mse"));
    }
    svg::Series mean = column_series(read_csv_file(in / "summary.csv"), "k", "mean_mse");
    mean.width = 2.5;
    mean.label = "mean";
    c.series.push_back(std::move(mean));
    w.write("trajectories.svg", svg::render(c));
    ++charts;
  }
  if (fs::exists(in / "theory.csv")) {
    svg::Chart c{"Equicorrelated mean curve", "k (predictors)", "MSE", 640, 420, {}};
    svg::Series s = column_series(read_csv_file(in / "theory.csv"), "k", "mse");
    s.width = 2.5;
    s.label = "theory";
    c.series.push_back(std::move(s));
    w.write("theory.svg", svg::render(c));
    ++charts;
  }
  if (fs::exists(in / "accumulate_aggregate.csv")) {
    svg::Chart c{"Hold-out RMSE by checkpoint", "k' (items at popularity threshold)", "RMSE", 640, 420, {}};
    if (fs::exists(in / "accumulate_iterations.csv")) {
      add_traces(c, grouped_series(read_csv_file(in / "accumulate_iterations.csv"), "iteration", "k_prime", "rmse"));
    }
    const csv::Table agg = read_csv_file(in / "accumulate_aggregate.csv");
    svg::Series mean = column_series(agg, "k_prime", "mean_rmse");
    mean.width = 2.5;
    mean.label = "mean";
    c.series.push_back(std::move(mean));
    svg::Series rootn = column_series(agg, "k_prime", "mean_rootn");
    rootn.stroke = "#1f5fbf";
    rootn.width = 1.5;
    rootn.dashed = true;
    rootn.label = "root-N baseline";
    c.series.push_back(std::move(rootn));
    w.write("accumulate_rmse.svg", svg::render(c));
    ++charts;
  }
  if (charts == 0) {
    throw IoError(fmt::format("plot: no summary.csv, theory.csv or accumulate_aggregate.csv in '{}'", in.string()));
  }
}

std::string escape_message(std::string_view m) {
  std::string out;
  for (char c : m) {
    if (c == '\n' || c == '\r') out += ' ';
    else if (c == '"' || c == '\\') out += '\\', out += c;
    else out += c;
  }
  return out;
}

}  // namespace

std::string_view to_string(Command c) {
  for (const auto& [cmd, name] : kCommands) {
    if (cmd == c) return name;
  }
  return "?";
}

std::optional<Command> parse_command(std::string_view name) {
  for (const auto& [cmd, n] : kCommands) {
    if (n == name) return cmd;
  }
  return std::nullopt;
}

Resolved parse_config(const RunConfig& rc) {
  Resolved r{rc, {}, {}};
  if (!rc.config_path.empty()) r.settings.apply(config::parse_file(rc.config_path));
  for (const auto& o : rc.overrides) {
    const config::Entry e = config::parse_assignment(o);
    r.settings.set(e.key, e.value);
  }
  if (rc.seed) r.settings.set("seed", std::to_string(*rc.seed));
  if (rc.ratings) r.settings.set("ratings", *rc.ratings);
  if (rc.threads) r.settings.set("threads", std::to_string(*rc.threads));
  r.settings.resolve_simd();
  r.settings.validate();
  r.run_id = config::run_id(to_string(rc.command), r.settings);
  return r;
}

fs::path resolve_out_dir(const fs::path& base, Command c, std::uint64_t seed) {
  const std::string manifest = fmt::format("manifest_{}.txt", to_string(c));
  if (!fs::exists(base / manifest)) return base;
  const auto now = std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
  const std::string stem = fmt::format("run-{:%Y%m%dT%H%M%SZ}-s{}", now, seed);
  fs::path p = base / stem;
  for (int n = 2; fs::exists(p / manifest); ++n) p = base / fmt::format("{}-{}", stem, n);
  return p;
}

Artifacts execute(const Resolved& r, std::ostream& log) {
  const auto isa = kernels::parse_isa(r.settings.raw("simd"));
  if (!isa || !kernels::available(*isa)) {
    throw ConfigError(fmt::format("simd variant '{}' is not available on this machine", r.settings.raw("simd")));
  }
  kernels::select(*isa);

  const fs::path dir = resolve_out_dir(r.run.out_dir, r.run.command, r.settings.unsigned_integer("seed"));
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("cannot create output directory '{}': {}", dir.string(), ec.message()));
  Writer w(dir, log);

  switch (r.run.command) {
    case Command::simulate: cmd_simulate(r, w, log); break;
    case Command::verify: cmd_verify(r, w, log); break;
    case Command::theory: cmd_theory(r, w, log); break;
    case Command::cf_train: cmd_cf_train(r, w, log); break;
    case Command::cf_eval: cmd_cf_eval(r, w, log); break;
    case Command::accumulate: cmd_accumulate(r, w, log); break;
    case Command::ingest_summary: cmd_ingest(r, w, log); break;
    case Command::plot: cmd_plot(r, w, log); break;
  }
  // Last, so an interrupted run never looks complete.
  w.write(fmt::format("manifest_{}.txt", to_string(r.run.command)), config::manifest(to_string(r.run.command), r.settings));
  return {w.dir(), w.files()};
}

Failure classify(std::exception_ptr e) {
  try {
    std::rethrow_exception(e);
  } catch (const ConfigError&) {
    return {2, "config"};
  } catch (const PreconditionError&) {
    return {2, "precondition"};
  } catch (const DegenerateSpecError&) {
    return {2, "degenerate_spec"};
  } catch (const ArgumentError&) {
    return {2, "argument"};
  } catch (const CLI::Error&) {
    return {2, "usage"};
  } catch (const DivergenceError&) {
    return {3, "divergence"};
  } catch (const NumericalError&) {
    return {3, "numerical"};
  } catch (const ParseError&) {
    return {4, "parse"};
  } catch (const ValidationError&) {
    return {4, "validation"};
  } catch (const IoError&) {
    return {4, "io"};
  } catch (const fs::filesystem_error&) {
    return {4, "io"};
  } catch (const std::invalid_argument&) {
    return {2, "argument"};
  } catch (...) {
    return {1, "internal"};
  }
}

std::string error_line(const Failure& f, std::string_view module, std::string_view command, std::string_view run_id,
                       std::string_view message) {
  return fmt::format("error code={} kind={} module={} command={} run_id={} message=\"{}\"", f.exit_code, f.kind, module,
                     command, run_id.empty() ? "-" : run_id, escape_message(message));
}

namespace {

std::string what_of(std::exception_ptr e) {
  try {
    std::rethrow_exception(e);
  } catch (const std::exception& x) {
    return x.what();
  } catch (...) {
    return "unknown error";
  }
}

}  // namespace

int run(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  const std::string_view command = to_string(rc.command);
  Resolved r;
  try {
    r = parse_config(rc);
  } catch (...) {
    const auto e = std::current_exception();
    err << error_line(classify(e), "cli", command, "", what_of(e)) << '\n';
    return classify(e).exit_code;
  }
  try {
    const Artifacts a = execute(r, out);
    out << "output " << a.out_dir.string() << '\n';
    return 0;
  } catch (...) {
    const auto e = std::current_exception();
    err << error_line(classify(e), module_of(rc.command), command, r.run_id, what_of(e)) << '\n';
    return classify(e).exit_code;
  }
}

int main(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Learning-curve simulation and recommender accumulation experiments", "lcurve"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(config::kToolVersion));

  RunConfig rc;
  std::string config_path, out_dir = "out", ratings;
  std::uint64_t seed = 0;
  int threads = 1;
  std::vector<std::string> overrides;
  std::vector<CLI::App*> subs;
  for (const auto& [cmd, name] : kCommands) {
    CLI::App* sub = app.add_subcommand(name, std::string(describe(cmd)));
    sub->add_option("--config", config_path, "key = value settings file");
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "base seed (overrides the file)");
    sub->add_option("--set", overrides, "key=value override (repeatable)")->take_all();
    sub->add_option("--ratings", ratings, "MovieLens ratings file ('::' separated)");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    subs.push_back(sub);
  }

  std::vector<std::string> argv_rev(args.rbegin(), args.rend() - 1);
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << config::kToolVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << error_line({2, "usage"}, "cli", "-", "", e.what()) << '\n';
    return 2;
  }

  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    rc.command = kCommands[i].first;
    rc.config_path = config_path;
    rc.out_dir = out_dir;
    rc.overrides = overrides;
    if (subs[i]->count("--seed")) rc.seed = seed;
    if (subs[i]->count("--ratings")) rc.ratings = ratings;
    if (subs[i]->count("--threads")) rc.threads = threads;
  }
  return run(rc, out, err);
}

}  // namespace lcurve::cli
