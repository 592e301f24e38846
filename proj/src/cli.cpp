#include "recal/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "recal/dataset_io.hpp"
#include "recal/errors.hpp"
#include "recal/harness.hpp"

namespace recal::cli {

namespace fs = std::filesystem;

namespace {

struct RunConfig {
  std::string data;
  std::string forecasts;
  std::string format = "meanvar";
  std::string recalibrator = "mos-t";
  std::string out = ".";
  std::size_t window = 25;
  bool loo = false;
  bool detrend = false;
  std::size_t bootstrap_k = 50;
  std::uint64_t seed = 0;
  std::vector<double> levels = kDefaultCoverageLevels;
  std::size_t threads = 1;
  std::size_t max_evals = 10000;
  double tolerance = 1e-10;
  std::size_t restarts = 1;
  std::vector<std::size_t> windows = {30, 50, 100, 400};
  std::vector<std::string> recalibrators = {"ngr-plugin", "ngr-bootstrap"};

  // synth
  std::string generator = "mos";
  double a = 0.0, b = 1.0, c = 1.0, d = 0.5;
  double m_mean = 0.0, m_var = 1.0;
  double v_shift = 0.25, v_shape = 2.0, v_scale = 0.5;
  std::size_t n = 200;
};

/// Collects output files in memory and publishes them together.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}

  std::ostringstream& file(const std::string& name) {
    files_.emplace_back(name, std::ostringstream{});
    return files_.back().second;
  }

  void commit() {
    fs::create_directories(dir_);
    std::vector<fs::path> staged;
    try {
      for (auto& [name, body] : files_) {
        const fs::path tmp = dir_ / (name + ".tmp");
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        staged.push_back(tmp);
        f << body.str();
        f.close();
        if (!f) throw InputError("failed writing " + tmp.string());
      }
      for (std::size_t i = 0; i < files_.size(); ++i) fs::rename(staged[i], dir_ / files_[i].first);
    } catch (...) {
      std::error_code ec;
      for (const auto& p : staged) fs::remove(p, ec);
      throw;
    }
  }

 private:
  fs::path dir_;
  std::vector<std::pair<std::string, std::ostringstream>> files_;
};

std::string join_numbers(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + format_number(xs[i]);
  return out;
}

void echo_config(std::ostream& o, const std::string& command, const RunConfig& cfg) {
  o << "# recal " << command << '\n';
  if (command == "synth") {
    o << "# generator = " << cfg.generator << "\n# a = " << format_number(cfg.a) << "\n# b = "
      << format_number(cfg.b) << "\n# c = " << format_number(cfg.c);
    if (cfg.generator == "ngr") o << "\n# d = " << format_number(cfg.d);
    o << "\n# m_mean = " << format_number(cfg.m_mean) << "\n# m_var = " << format_number(cfg.m_var)
      << "\n# v_shift = " << format_number(cfg.v_shift) << "\n# v_shape = " << format_number(cfg.v_shape)
      << "\n# v_scale = " << format_number(cfg.v_scale) << "\n# n = " << cfg.n << "\n# seed = " << cfg.seed
      << '\n';
    return;
  }
  o << "# data = " << cfg.data << "\n# format = " << cfg.format << '\n';
  if (command == "predict") o << "# forecasts = " << cfg.forecasts << '\n';
  if (command == "sweep") {
    o << "# recalibrators = ";
    for (std::size_t i = 0; i < cfg.recalibrators.size(); ++i) o << (i ? "," : "") << cfg.recalibrators[i];
    o << "\n# windows = ";
    for (std::size_t i = 0; i < cfg.windows.size(); ++i) o << (i ? "," : "") << cfg.windows[i];
    o << '\n';
  } else {
    o << "# recalibrator = " << cfg.recalibrator << '\n';
  }
  if (command == "evaluate") {
    o << "# mode = " << (cfg.loo ? "leave-one-out" : "rolling-window") << '\n';
    if (!cfg.loo) o << "# window = " << cfg.window << '\n';
  }
  o << "# detrend = " << (cfg.detrend ? "true" : "false") << "\n# bootstrap_k = " << cfg.bootstrap_k
    << "\n# seed = " << cfg.seed << "\n# max_evals = " << cfg.max_evals
    << "\n# tolerance = " << format_number(cfg.tolerance) << "\n# restarts = " << cfg.restarts << '\n';
  if (command == "evaluate") o << "# levels = " << join_numbers(cfg.levels) << '\n';
}

CvPlan make_plan(const RunConfig& cfg, const std::string& recalibrator) {
  CvPlan plan;
  plan.mode = cfg.loo ? CvMode::LeaveOneOut : CvMode::RollingWindow;
  plan.window = cfg.window;
  plan.base_seed = cfg.seed;
  plan.recalibrator = parse_recalibrator(recalibrator);
  plan.bootstrap_k = cfg.bootstrap_k;
  plan.detrend = cfg.detrend;
  plan.ngr.simplex.max_evaluations = cfg.max_evals;
  plan.ngr.simplex.tolerance = cfg.tolerance;
  plan.ngr.restarts = cfg.restarts;
  if (plan.bootstrap_k == 0) throw InputError("--bootstrap-k must be at least 1");
  return plan;
}

std::vector<double> row_times(std::size_t first, std::size_t count) {
  std::vector<double> t(count);
  for (std::size_t i = 0; i < count; ++i) t[i] = static_cast<double>(first + i);
  return t;
}

void write_kv(std::ostream& o, const std::string& key, const std::string& value) {
  o << key << " = " << value << '\n';
}

void write_params(std::ostream& o, const std::string& prefix, const NgrParams& p) {
  write_kv(o, prefix + "a", format_number(p.a));
  write_kv(o, prefix + "b", format_number(p.b));
  write_kv(o, prefix + "c", format_number(p.c));
  write_kv(o, prefix + "d", format_number(p.d));
}

int cmd_fit(const RunConfig& cfg) {
  const Dataset ds = ingest(cfg.data, parse_dataset_format(cfg.format));
  const TrainingSet train = ds.training();
  const CvPlan plan = make_plan(cfg, cfg.recalibrator);
  const FittedRecalibrator fitted = fit_recalibrator(train, row_times(0, train.size()), plan, cfg.seed);

  OutputSet outputs(cfg.out);
  auto& o = outputs.file("fit.txt");
  echo_config(o, "fit", cfg);
  write_kv(o, "recalibrator", cfg.recalibrator);
  write_kv(o, "n", std::to_string(train.size()));
  if (fitted.trends) {
    write_kv(o, "mean_trend.intercept", format_number(fitted.trends->first.intercept));
    write_kv(o, "mean_trend.slope", format_number(fitted.trends->first.slope));
    write_kv(o, "obs_trend.intercept", format_number(fitted.trends->second.intercept));
    write_kv(o, "obs_trend.slope", format_number(fitted.trends->second.slope));
  }
  if (const auto* mos = std::get_if<MosFit>(&fitted.model)) {
    write_kv(o, "a_hat", format_number(mos->a_hat));
    write_kv(o, "b_hat", format_number(mos->b_hat));
    write_kv(o, "c2_hat", format_number(mos->c2_hat));
    write_kv(o, "m_bar", format_number(mos->m_bar));
    write_kv(o, "ss_m", format_number(mos->ss_m));
  } else if (const auto* ngr = std::get_if<NgrFit>(&fitted.model)) {
    write_params(o, "", ngr->params);
    write_kv(o, "log_likelihood", format_number(ngr->log_likelihood));
    write_kv(o, "converged", ngr->converged ? "true" : "false");
    write_kv(o, "iterations", std::to_string(ngr->iterations));
  } else {
    const auto& ens = std::get<BootstrapEnsemble>(fitted.model);
    write_kv(o, "replicates", std::to_string(ens.replicates.size()));
    write_kv(o, "failed_draws", std::to_string(ens.failed_draws));
    write_kv(o, "base_seed", std::to_string(ens.base_seed));
    for (std::size_t k = 0; k < ens.replicates.size(); ++k) {
      write_params(o, "replicate." + std::to_string(k) + ".", ens.replicates[k]);
    }
  }
  outputs.commit();
  return kExitSuccess;
}

int cmd_predict(const RunConfig& cfg) {
  if (cfg.forecasts.empty()) throw InputError("predict needs --forecasts");
  const DatasetFormat format = parse_dataset_format(cfg.format);
  const TrainingSet train = ingest(cfg.data, format).training();
  const Dataset targets = ingest(cfg.forecasts, format, /*allow_missing_obs=*/true);
  const CvPlan plan = make_plan(cfg, cfg.recalibrator);
  const FittedRecalibrator fitted = fit_recalibrator(train, row_times(0, train.size()), plan, cfg.seed);

  static constexpr double kLevels[] = {0.01, 0.25, 0.5, 0.75, 0.99};
  OutputSet outputs(cfg.out);
  auto& o = outputs.file("predictions.csv");
  echo_config(o, "predict", cfg);
  o << "time,q01,q25,q50,q75,q99\n";
  for (std::size_t j = 0; j < targets.size(); ++j) {
    // Forecast rows continue the training time index.
    const PredictiveDist d =
        fitted.predict(targets.means[j], targets.variances[j], static_cast<double>(train.size() + j));
    o << targets.times[j];
    for (double p : kLevels) o << ',' << format_number(quantile(d, p));
    o << '\n';
  }
  outputs.commit();
  return kExitSuccess;
}

int cmd_evaluate(const RunConfig& cfg) {
  for (double level : cfg.levels) {
    if (!(level > 0.0 && level < 1.0)) throw InputError("coverage level " + format_number(level) + " outside (0, 1)");
  }
  const Dataset ds = ingest(cfg.data, parse_dataset_format(cfg.format));
  const TrainingSet data = ds.training();
  const CvPlan plan = make_plan(cfg, cfg.recalibrator);
  const CvResult result = run_cv(data, plan, cfg.threads);
  const CvSummary summary = aggregate(result, cfg.levels);

  OutputSet outputs(cfg.out);
  auto& rec = outputs.file("records.csv");
  echo_config(rec, "evaluate", cfg);
  rec << "index,time,obs,pit,ignorance_bits,crps\n";
  for (const auto& f : result.folds) {
    rec << f.index << ',' << ds.times[f.index] << ',' << format_number(f.obs) << ','
        << format_number(f.record.pit) << ',' << format_number(f.record.ignorance_bits) << ','
        << format_number(f.record.crps) << '\n';
  }

  auto& sum = outputs.file("summary.txt");
  echo_config(sum, "evaluate", cfg);
  write_kv(sum, "recalibrator", cfg.recalibrator);
  write_kv(sum, "fold_count", std::to_string(summary.fold_count));
  write_kv(sum, "failure_count", std::to_string(summary.failure_count));
  write_kv(sum, "mean_ignorance_bits", format_number(summary.mean_ignorance));
  write_kv(sum, "mean_crps", format_number(summary.mean_crps));
  for (const auto& [level, cov] : summary.coverage) {
    write_kv(sum, "coverage." + format_number(level), format_number(cov));
  }
  for (const auto& f : result.failures) {
    write_kv(sum, "failure." + std::to_string(f.index), f.diagnostic);
  }

  auto& hist = outputs.file("pit_histogram.csv");
  echo_config(hist, "evaluate", cfg);
  hist << "bin_lower,bin_upper,count\n";
  for (std::size_t k = 0; k < kPitBins; ++k) {
    hist << format_number(summary.pit.bin_edges[k]) << ',' << format_number(summary.pit.bin_edges[k + 1]) << ','
         << summary.pit.counts[k] << '\n';
  }
  outputs.commit();
  return kExitSuccess;
}

int cmd_synth(const RunConfig& cfg) {
  SyntheticSpec spec;
  if (cfg.generator == "mos") {
    spec.generator = MosGenerator{cfg.a, cfg.b, cfg.c};
  } else if (cfg.generator == "ngr") {
    spec.generator = NgrGenerator{cfg.a, cfg.b, cfg.c, cfg.d};
  } else {
    throw InputError("unknown generator '" + cfg.generator + "' (expected mos or ngr)");
  }
  spec.m_mean = cfg.m_mean;
  spec.m_variance = cfg.m_var;
  spec.v_process = {cfg.v_shift, cfg.v_shape, cfg.v_scale};
  spec.n = cfg.n;
  spec.seed = cfg.seed;
  const TrainingSet data = generate_synthetic(spec);

  OutputSet outputs(cfg.out);
  auto& o = outputs.file("synthetic.csv");
  echo_config(o, "synth", cfg);
  emit_dataset(o, Dataset::from_training(data));
  outputs.commit();
  return kExitSuccess;
}

int cmd_sweep(const RunConfig& cfg) {
  if (cfg.recalibrators.empty() || cfg.windows.empty()) {
    throw InputError("sweep needs at least one recalibrator and one window");
  }
  const TrainingSet data = ingest(cfg.data, parse_dataset_format(cfg.format)).training();

  OutputSet outputs(cfg.out);
  auto& o = outputs.file("sweep.csv");
  echo_config(o, "sweep", cfg);
  o << "window,recalibrator,fold_count,failure_count,mean_ignorance_bits,mean_crps\n";
  for (std::size_t w : cfg.windows) {
    RunConfig at_w = cfg;
    at_w.window = w;
    at_w.loo = false;
    std::vector<CvResult> arms;
    for (const auto& r : cfg.recalibrators) arms.push_back(run_cv(data, make_plan(at_w, r), cfg.threads));
    // Every arm is scored on the folds that succeeded in all arms.
    for (std::size_t k = 1; k < arms.size(); ++k) arms[0] = pair_results(arms[0], arms[k]).first;
    for (std::size_t k = 1; k < arms.size(); ++k) arms[k] = pair_results(arms[k], arms[0]).first;
    for (std::size_t k = 0; k < arms.size(); ++k) {
      const CvSummary s = aggregate(arms[k], {});
      o << w << ',' << cfg.recalibrators[k] << ',' << s.fold_count << ',' << s.failure_count << ','
        << format_number(s.mean_ignorance) << ',' << format_number(s.mean_crps) << '\n';
    }
  }
  outputs.commit();
  return kExitSuccess;
}

void add_common(CLI::App& cmd, RunConfig& cfg, bool needs_data) {
  auto* data = cmd.add_option("--data", cfg.data, "Dataset file (training rows)");
  if (needs_data) data->required();
  cmd.add_option("--format", cfg.format, "Dataset layout")->check(CLI::IsMember({"members", "meanvar"}));
  cmd.add_option("--out", cfg.out, "Output directory");
  cmd.add_option("--seed", cfg.seed, "Base seed for all randomness");
}

void add_model(CLI::App& cmd, RunConfig& cfg) {
  cmd.add_option("--recalibrator", cfg.recalibrator, "mos-plugin | mos-t | ngr-plugin | ngr-bootstrap")
      ->check(CLI::IsMember({"mos-plugin", "mos-t", "ngr-plugin", "ngr-bootstrap"}));
  cmd.add_flag("--detrend", cfg.detrend, "Remove a linear time trend from m and y before fitting");
  cmd.add_option("--bootstrap-k", cfg.bootstrap_k, "Bootstrap replicates");
  cmd.add_option("--max-evals", cfg.max_evals, "Simplex evaluation budget per run");
  cmd.add_option("--tolerance", cfg.tolerance, "Simplex relative function-value tolerance");
  cmd.add_option("--restarts", cfg.restarts, "Simplex restarts from the perturbed optimum");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Ensemble forecast recalibration with parameter uncertainty", "recal"};
  app.require_subcommand(1);

  auto* fit = app.add_subcommand("fit", "Fit a recalibrator on all rows of --data");
  add_common(*fit, cfg, true);
  add_model(*fit, cfg);

  auto* predict = app.add_subcommand("predict", "Forecast quantiles (1, 25, 50, 75, 99%) for --forecasts rows");
  add_common(*predict, cfg, true);
  add_model(*predict, cfg);
  predict->add_option("--forecasts", cfg.forecasts, "Rows to forecast (obs may be NA)")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Out-of-sample scores by cross-validation");
  add_common(*evaluate, cfg, true);
  add_model(*evaluate, cfg);
  evaluate->add_option("--window", cfg.window, "Rolling training window size");
  evaluate->add_flag("--loo", cfg.loo, "Leave-one-out instead of a rolling window");
  evaluate->add_option("--levels", cfg.levels, "Central interval levels for coverage")->delimiter(',');
  evaluate->add_option("--threads", cfg.threads, "Worker threads for folds");

  auto* synth = app.add_subcommand("synth", "Write a synthetic dataset");
  add_common(*synth, cfg, false);
  synth->add_option("--generator", cfg.generator, "mos: y = a + b m + c eps; ngr: y ~ N(a + b m, c + d v)")
      ->check(CLI::IsMember({"mos", "ngr"}));
  synth->add_option("--a", cfg.a);
  synth->add_option("--b", cfg.b);
  synth->add_option("--c", cfg.c, "Noise sd (mos) or variance offset (ngr)");
  synth->add_option("--d", cfg.d, "Variance slope (ngr)");
  synth->add_option("--n", cfg.n, "Number of rows");
  synth->add_option("--m-mean", cfg.m_mean);
  synth->add_option("--m-var", cfg.m_var);
  synth->add_option("--v-shift", cfg.v_shift);
  synth->add_option("--v-shape", cfg.v_shape);
  synth->add_option("--v-scale", cfg.v_scale);

  auto* sweep = app.add_subcommand("sweep", "Scores versus rolling window size");
  add_common(*sweep, cfg, true);
  add_model(*sweep, cfg);
  sweep->add_option("--windows", cfg.windows, "Window sizes")->delimiter(',');
  sweep->add_option("--recalibrators", cfg.recalibrators, "Recalibrators to compare")->delimiter(',');
  sweep->add_option("--threads", cfg.threads, "Worker threads for folds");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitSuccess;
    }
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }

  try {
    if (cfg.threads == 0) throw InputError("--threads must be at least 1");
    if (fit->parsed()) return cmd_fit(cfg);
    if (predict->parsed()) return cmd_predict(cfg);
    if (evaluate->parsed()) return cmd_evaluate(cfg);
    if (synth->parsed()) return cmd_synth(cfg);
    if (sweep->parsed()) return cmd_sweep(cfg);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::Input ? kExitInputError : kExitNumericError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  return kExitInputError;
}

}  // namespace recal::cli
