#pragma once

#include <cstddef>
#include <functional>

#include "recal/distributions.hpp"
#include "recal/simplex.hpp"
#include "recal/training_set.hpp"

namespace recal {

/// y ~ Normal(a + b m, c + d v). d is always the square of the optimised
/// coordinate, so it is non-negative by construction.
struct NgrParams {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;

  friend bool operator==(const NgrParams&, const NgrParams&) = default;
};

struct NgrFit {
  NgrParams params;
  double log_likelihood = 0.0;  // exact Gaussian log-likelihood at params
  bool converged = false;
  std::size_t iterations = 0;
};

struct NgrOptions {
  SimplexOptions simplex{};
  /// Extra simplex runs started from the perturbed optimum; the better fit wins.
  std::size_t restarts = 1;
};

inline constexpr std::size_t kNgrMinTraining = 4;

/// -sum[log(c + d v_t) + (y_t - a - b m_t)^2 / (c + d v_t)]: the Gaussian
/// log-likelihood with the factor 1/2 and the n log(2 pi) constant dropped.
/// Throws ParameterDomainError if any c + d v_t <= 0.
double ngr_log_likelihood(const NgrParams& params, const TrainingSet& train);

/// Exact Gaussian log-likelihood:
/// 0.5 * ngr_log_likelihood(params, train) - 0.5 * n * log(2 pi).
double ngr_exact_log_likelihood(const NgrParams& params, const TrainingSet& train);

/// Lower bound on c used during fitting: 1e-8 times the sample variance of y.
double ngr_variance_floor(const TrainingSet& train);

/// Maximum-likelihood fit over (a, b, c, delta) with d = delta^2, by
/// Nelder-Mead started from the MOS solution. c is held at or above
/// ngr_variance_floor. Non-convergence is reported through NgrFit::converged.
/// `on_iteration` receives the best exact log-likelihood after each simplex
/// iteration of every run.
NgrFit fit_ngr(const TrainingSet& train, const NgrOptions& opts = {},
               const std::function<void(double)>& on_iteration = {});

/// Normal(a + b m*, c + d v*). Throws DegenerateVarianceError when the
/// predictive variance is not positive.
Normal ngr_predict_plugin(const NgrParams& params, double m_star, double v_star);

inline Normal ngr_predict_plugin(const NgrFit& fit, double m_star, double v_star) {
  return ngr_predict_plugin(fit.params, m_star, v_star);
}

}  // namespace recal
