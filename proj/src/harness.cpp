#include "recal/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>

#include "recal/bootstrap.hpp"
#include "recal/errors.hpp"
#include "recal/mos.hpp"
#include "recal/random.hpp"

namespace recal {

TrainingSet generate_synthetic(const SyntheticSpec& spec) {
  const auto& vp = spec.v_process;
  if (!(spec.m_variance >= 0.0) || !std::isfinite(spec.m_mean)) {
    throw InputError("synthetic ensemble-mean process needs finite mean and non-negative variance");
  }
  if (!(vp.shift >= 0.0) || !(vp.scale >= 0.0) || (vp.scale > 0.0 && !(vp.shape > 0.0))) {
    throw InputError("synthetic variance process needs shift >= 0, scale >= 0 and shape > 0");
  }
  if (const auto* g = std::get_if<MosGenerator>(&spec.generator); g && !(g->c > 0.0)) {
    throw InputError("MOS generator needs c > 0");
  }
  if (const auto* g = std::get_if<NgrGenerator>(&spec.generator); g && (g->c < 0.0 || g->d < 0.0)) {
    throw InputError("NGR generator needs c >= 0 and d >= 0");
  }

  RandomStream rng(spec.seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::optional<std::gamma_distribution<double>> gamma;
  if (vp.scale > 0.0) gamma.emplace(vp.shape, vp.scale);

  std::vector<ForecastRecord> rows;
  rows.reserve(spec.n);
  for (std::size_t t = 0; t < spec.n; ++t) {
    ForecastRecord r;
    r.mean = spec.m_mean + std::sqrt(spec.m_variance) * z(rng);
    r.variance = vp.shift + (gamma ? (*gamma)(rng) : 0.0);
    const double eps = z(rng);
    if (const auto* g = std::get_if<MosGenerator>(&spec.generator)) {
      r.obs = g->a + g->b * r.mean + g->c * eps;
    } else {
      const auto& n = std::get<NgrGenerator>(spec.generator);
      const double s2 = n.c + n.d * r.variance;
      if (!(s2 > 0.0)) throw InputError("NGR generator produced a non-positive variance");
      r.obs = n.a + n.b * r.mean + std::sqrt(s2) * eps;
    }
    rows.push_back(r);
  }
  return TrainingSet(std::move(rows));
}

DetrendResult detrend_linear(std::span<const TimePoint> series) {
  if (series.size() < 3) throw InputError("detrending needs at least 3 points");
  const double n = static_cast<double>(series.size());
  double mt = 0.0, mx = 0.0;
  for (const auto& p : series) {
    mt += p.t;
    mx += p.x;
  }
  mt /= n;
  mx /= n;
  double stt = 0.0, stx = 0.0;
  for (const auto& p : series) {
    stt += (p.t - mt) * (p.t - mt);
    stx += (p.t - mt) * (p.x - mx);
  }
  if (!(stt > 0.0)) throw InputError("detrending needs at least two distinct times");

  DetrendResult out;
  out.trend.slope = stx / stt;
  out.trend.intercept = mx - out.trend.slope * mt;
  out.residuals.reserve(series.size());
  for (const auto& p : series) out.residuals.push_back(p.x - out.trend.at(p.t));
  return out;
}

std::string to_string(Recalibrator r) {
  switch (r) {
    case Recalibrator::MosPlugin: return "mos-plugin";
    case Recalibrator::MosT: return "mos-t";
    case Recalibrator::NgrPlugin: return "ngr-plugin";
    case Recalibrator::NgrBootstrap: return "ngr-bootstrap";
  }
  return "unknown";
}

std::string to_string(CvMode m) {
  return m == CvMode::RollingWindow ? "rolling-window" : "leave-one-out";
}

Recalibrator parse_recalibrator(const std::string& name) {
  for (auto r : {Recalibrator::MosPlugin, Recalibrator::MosT, Recalibrator::NgrPlugin,
                 Recalibrator::NgrBootstrap}) {
    if (to_string(r) == name) return r;
  }
  throw InputError("unknown recalibrator '" + name + "'");
}

std::size_t min_training_size(Recalibrator r) {
  switch (r) {
    case Recalibrator::MosPlugin:
    case Recalibrator::MosT: return kMosMinTraining;
    case Recalibrator::NgrPlugin:
    case Recalibrator::NgrBootstrap: return kNgrMinTraining;
  }
  return kNgrMinTraining;
}

std::vector<Fold> fold_schedule(std::size_t n, const CvPlan& plan) {
  const std::size_t min_train = min_training_size(plan.recalibrator);
  std::vector<Fold> folds;
  if (plan.mode == CvMode::RollingWindow) {
    if (plan.window < min_train) {
      throw InputError("rolling window " + std::to_string(plan.window) + " is below the minimum " +
                       std::to_string(min_train) + " for " + to_string(plan.recalibrator));
    }
    if (n <= plan.window) {
      throw InputError("rolling window " + std::to_string(plan.window) + " leaves no forecast to evaluate in " +
                       std::to_string(n) + " records");
    }
    for (std::size_t i = plan.window; i < n; ++i) {
      Fold f{i, {}};
      f.training.reserve(plan.window);
      for (std::size_t j = i - plan.window; j < i; ++j) f.training.push_back(j);
      folds.push_back(std::move(f));
    }
  } else {
    if (n < min_train + 1) {
      throw InputError("leave-one-out needs at least " + std::to_string(min_train + 1) + " records for " +
                       to_string(plan.recalibrator));
    }
    for (std::size_t i = 0; i < n; ++i) {
      Fold f{i, {}};
      f.training.reserve(n - 1);
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) f.training.push_back(j);
      }
      folds.push_back(std::move(f));
    }
  }
  if (plan.detrend && folds.front().training.size() < 3) {
    throw InputError("detrending needs at least 3 training cases per fold");
  }
  return folds;
}

DetrendedTraining detrend_training(const TrainingSet& train, std::span<const double> times) {
  if (times.size() != train.size()) throw InputError("one time index per training record required");
  std::vector<TimePoint> m_series, y_series;
  m_series.reserve(train.size());
  y_series.reserve(train.size());
  for (std::size_t k = 0; k < train.size(); ++k) {
    m_series.push_back({times[k], train[k].mean});
    y_series.push_back({times[k], train[k].obs});
  }
  const DetrendResult m_fit = detrend_linear(m_series);
  const DetrendResult y_fit = detrend_linear(y_series);
  std::vector<ForecastRecord> rows(train.begin(), train.end());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    rows[k].mean = m_fit.residuals[k];
    rows[k].obs = y_fit.residuals[k];
  }
  return {TrainingSet(std::move(rows)), m_fit.trend, y_fit.trend};
}

PredictiveDist FittedRecalibrator::predict(double m, double v, double t) const {
  double m_star = m;
  if (trends) m_star -= trends->first.at(t);
  PredictiveDist forecast = [&]() -> PredictiveDist {
    switch (kind) {
      case Recalibrator::MosPlugin: return mos_predict_plugin(std::get<MosFit>(model), m_star);
      case Recalibrator::MosT: return mos_predict_t(std::get<MosFit>(model), m_star);
      case Recalibrator::NgrPlugin: return ngr_predict_plugin(std::get<NgrFit>(model), m_star, v);
      case Recalibrator::NgrBootstrap: return bootstrap_predict(std::get<BootstrapEnsemble>(model), m_star, v);
    }
    throw InputError("unknown recalibrator");
  }();
  return trends ? shifted(forecast, trends->second.at(t)) : forecast;
}

FittedRecalibrator fit_recalibrator(const TrainingSet& input, std::span<const double> times,
                                    const CvPlan& plan, std::uint64_t seed) {
  FittedRecalibrator out;
  out.kind = plan.recalibrator;
  TrainingSet detrended;
  if (plan.detrend) {
    DetrendedTraining dt = detrend_training(input, times);
    detrended = std::move(dt.data);
    out.trends.emplace(dt.mean_trend, dt.obs_trend);
  }
  const TrainingSet& train = plan.detrend ? detrended : input;

  switch (plan.recalibrator) {
    case Recalibrator::MosPlugin:
    case Recalibrator::MosT: out.model = fit_mos(train); break;
    case Recalibrator::NgrPlugin: {
      NgrFit fit = fit_ngr(train, plan.ngr);
      if (!fit.converged) {
        throw NumericError("NGR fit did not converge after " + std::to_string(fit.iterations) +
                           " simplex iterations");
      }
      out.model = fit;
      break;
    }
    case Recalibrator::NgrBootstrap:
      out.model = bootstrap_fit(train, plan.bootstrap_k, seed, plan.ngr);
      break;
  }
  return out;
}

PredictiveDist forecast_case(const TrainingSet& data, std::span<const std::size_t> training,
                             std::size_t target, const CvPlan& plan) {
  std::vector<double> times(training.begin(), training.end());
  const ForecastRecord& now = data[target];
  const FittedRecalibrator fitted =
      fit_recalibrator(data.select(training), times, plan, derive_seed(plan.base_seed, target));
  return fitted.predict(now.mean, now.variance, static_cast<double>(target));
}

CvResult run_cv(const TrainingSet& data, const CvPlan& plan, std::size_t threads) {
  const std::vector<Fold> folds = fold_schedule(data.size(), plan);
  using Slot = std::optional<std::variant<FoldOutput, FoldFailure>>;
  std::vector<Slot> slots(folds.size());

  std::atomic<std::size_t> next{0};
  std::exception_ptr fatal;
  std::mutex fatal_mutex;
  auto worker = [&]() {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= folds.size()) return;
      const Fold& f = folds[k];
      try {
        PredictiveDist d = forecast_case(data, f.training, f.index, plan);
        const double y = data[f.index].obs;
        const VerificationRecord rec = verify(d, y);
        slots[k].emplace(FoldOutput{f.index, std::move(d), y, rec});
      } catch (const Error& e) {
        slots[k].emplace(FoldFailure{f.index, e.what()});
      } catch (...) {
        std::lock_guard lock(fatal_mutex);
        if (!fatal) fatal = std::current_exception();
        next.store(folds.size());
        return;
      }
    }
  };

  const std::size_t n_threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(folds.size(), 1));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (fatal) std::rethrow_exception(fatal);

  CvResult out;
  for (auto& s : slots) {
    if (auto* ok = std::get_if<FoldOutput>(&*s)) {
      out.folds.push_back(std::move(*ok));
    } else {
      out.failures.push_back(std::get<FoldFailure>(std::move(*s)));
    }
  }
  return out;
}

std::pair<CvResult, CvResult> pair_results(const CvResult& a, const CvResult& b) {
  auto indices = [](const CvResult& r) {
    std::vector<std::size_t> out;
    for (const auto& f : r.folds) out.push_back(f.index);
    return out;
  };
  const auto ia = indices(a);
  const auto ib = indices(b);
  std::vector<std::size_t> common;
  std::set_intersection(ia.begin(), ia.end(), ib.begin(), ib.end(), std::back_inserter(common));

  std::vector<FoldFailure> failures;
  auto add_failures = [&](const CvResult& r, const std::string& arm) {
    for (const auto& f : r.failures) failures.push_back({f.index, arm + ": " + f.diagnostic});
  };
  add_failures(a, "first");
  add_failures(b, "second");
  std::stable_sort(failures.begin(), failures.end(),
                   [](const FoldFailure& l, const FoldFailure& r) { return l.index < r.index; });
  // One entry per dropped fold.
  failures.erase(std::unique(failures.begin(), failures.end(),
                             [](const FoldFailure& l, const FoldFailure& r) { return l.index == r.index; }),
                 failures.end());

  auto restrict = [&](const CvResult& r) {
    CvResult out;
    for (const auto& f : r.folds) {
      if (std::binary_search(common.begin(), common.end(), f.index)) out.folds.push_back(f);
    }
    out.failures = failures;
    return out;
  };
  return {restrict(a), restrict(b)};
}

CvSummary aggregate(const CvResult& results, std::span<const double> levels) {
  if (results.folds.empty()) {
    throw EmptyResultError("no successful folds to aggregate (" + std::to_string(results.failures.size()) +
                           " failed)");
  }
  CvSummary s;
  s.fold_count = results.folds.size();
  s.failure_count = results.failures.size();

  std::vector<double> pits;
  std::vector<PredictiveDist> dists;
  std::vector<double> ys;
  pits.reserve(s.fold_count);
  dists.reserve(s.fold_count);
  ys.reserve(s.fold_count);
  for (const auto& f : results.folds) {
    s.mean_ignorance += f.record.ignorance_bits;
    s.mean_crps += f.record.crps;
    pits.push_back(f.record.pit);
    dists.push_back(f.forecast);
    ys.push_back(f.obs);
  }
  s.mean_ignorance /= static_cast<double>(s.fold_count);
  s.mean_crps /= static_cast<double>(s.fold_count);
  s.pit = pit_histogram(pits);
  for (double level : levels) s.coverage.emplace_back(level, interval_coverage(dists, ys, level));
  return s;
}

}  // namespace recal
