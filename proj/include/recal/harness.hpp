#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "recal/bootstrap.hpp"
#include "recal/distributions.hpp"
#include "recal/mos.hpp"
#include "recal/ngr.hpp"
#include "recal/training_set.hpp"
#include "recal/verification.hpp"

namespace recal {

// ---------------------------------------------------------------------------
// Synthetic data

/// y = a + b m + c eps, eps ~ Normal(0, 1). `c` is the noise standard deviation.
struct MosGenerator {
  double a = 0.0;
  double b = 1.0;
  double c = 1.0;
};

/// y ~ Normal(a + b m, c + d v).
struct NgrGenerator {
  double a = 0.0;
  double b = 1.0;
  double c = 0.5;
  double d = 0.5;
};

/// Ensemble variances v = shift + Gamma(shape, scale); scale 0 gives v = shift.
struct VarianceProcess {
  double shift = 0.25;
  double shape = 2.0;
  double scale = 0.5;
};

struct SyntheticSpec {
  std::variant<MosGenerator, NgrGenerator> generator = MosGenerator{};
  double m_mean = 0.0;
  double m_variance = 1.0;
  VarianceProcess v_process{};
  std::size_t n = 100;
  std::uint64_t seed = 0;
};

/// Deterministic in `spec.seed`. Throws InputError for an invalid spec.
TrainingSet generate_synthetic(const SyntheticSpec& spec);

// ---------------------------------------------------------------------------
// Detrending

struct LinearTrend {
  double intercept = 0.0;
  double slope = 0.0;

  double at(double t) const noexcept { return intercept + slope * t; }
};

struct DetrendResult {
  std::vector<double> residuals;
  LinearTrend trend;
};

struct TimePoint {
  double t;
  double x;
};

/// Removes the least-squares line in t. Needs at least 3 points and two
/// distinct times; throws InputError otherwise.
DetrendResult detrend_linear(std::span<const TimePoint> series);

// ---------------------------------------------------------------------------
// Cross-validation

enum class CvMode { RollingWindow, LeaveOneOut };
enum class Recalibrator { MosPlugin, MosT, NgrPlugin, NgrBootstrap };

std::string to_string(Recalibrator r);
std::string to_string(CvMode m);
/// Parses "mos-plugin", "mos-t", "ngr-plugin", "ngr-bootstrap".
Recalibrator parse_recalibrator(const std::string& name);

/// Smallest training set the recalibrator can be fitted on.
std::size_t min_training_size(Recalibrator r);

struct CvPlan {
  CvMode mode = CvMode::RollingWindow;
  std::size_t window = 25;  // rolling mode only
  std::uint64_t base_seed = 0;
  Recalibrator recalibrator = Recalibrator::MosT;
  std::size_t bootstrap_k = 50;
  /// Fit a linear trend in time on each training fold, remove it from m and
  /// y, and add the extrapolated y trend back onto the forecast location.
  bool detrend = false;
  NgrOptions ngr{};
};

/// One evaluated forecast and the record positions it was trained on.
struct Fold {
  std::size_t index;
  std::vector<std::size_t> training;
};

/// Rolling: forecast i in [w, n) trained on [i - w, i). Leave-one-out:
/// every i trained on all others. Throws InputError when the plan is
/// inconsistent with the data size or the recalibrator's minimum.
std::vector<Fold> fold_schedule(std::size_t n, const CvPlan& plan);

struct FoldOutput {
  std::size_t index;
  PredictiveDist forecast;
  double obs;
  VerificationRecord record;
};

struct FoldFailure {
  std::size_t index;
  std::string diagnostic;
};

struct CvResult {
  std::vector<FoldOutput> folds;      // ascending index
  std::vector<FoldFailure> failures;  // ascending index
};

struct DetrendedTraining {
  TrainingSet data;
  LinearTrend mean_trend;
  LinearTrend obs_trend;
};

/// Removes separate least-squares time trends from m and y; v is untouched.
DetrendedTraining detrend_training(const TrainingSet& train, std::span<const double> times);

/// A recalibrator fitted on one training set, ready to issue forecasts.
struct FittedRecalibrator {
  Recalibrator kind = Recalibrator::MosT;
  std::variant<MosFit, NgrFit, BootstrapEnsemble> model;
  /// Present when the training data were detrended before fitting.
  std::optional<std::pair<LinearTrend, LinearTrend>> trends;  // (mean, obs)

  /// Forecast for ensemble moments (m, v) at time index t. The time only
  /// matters when trends are present.
  PredictiveDist predict(double m, double v, double t) const;
};

/// Fits the plan's recalibrator. `times` are the training time indices (used
/// only with plan.detrend); `seed` drives bootstrap resampling. With
/// detrending, the t predictive's training mean and spread of m are those of
/// the detrended ensemble means. NGR non-convergence raises NumericError.
FittedRecalibrator fit_recalibrator(const TrainingSet& train, std::span<const double> times,
                                    const CvPlan& plan, std::uint64_t seed);

/// Forecast for record `target` of `data` from a recalibrator trained on the
/// records at `training`. Record positions serve as time indices; the
/// resampling seed is derive_seed(plan.base_seed, target).
PredictiveDist forecast_case(const TrainingSet& data, std::span<const std::size_t> training,
                             std::size_t target, const CvPlan& plan);

/// Runs every fold of the plan. Folds whose fit or scoring raises a library
/// error are recorded in `failures`. Output does not depend on `threads`.
CvResult run_cv(const TrainingSet& data, const CvPlan& plan, std::size_t threads = 1);

/// Restricts both arms to the folds that succeeded in both; the failure lists
/// become the union of both arms' failures.
std::pair<CvResult, CvResult> pair_results(const CvResult& a, const CvResult& b);

struct CvSummary {
  double mean_ignorance = 0.0;
  double mean_crps = 0.0;
  PitHistogram pit;
  std::vector<std::pair<double, double>> coverage;  // (level, fraction covered)
  std::size_t fold_count = 0;
  std::size_t failure_count = 0;
};

inline const std::vector<double> kDefaultCoverageLevels = {0.5, 0.9};

/// Throws EmptyResultError when no fold succeeded.
CvSummary aggregate(const CvResult& results, std::span<const double> levels = kDefaultCoverageLevels);

}  // namespace recal
