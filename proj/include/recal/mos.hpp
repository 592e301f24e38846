#pragma once

#include <cstddef>

#include "recal/distributions.hpp"
#include "recal/training_set.hpp"

namespace recal {

/// Fitted single-predictor MOS regression y = a + b m + c eps, together with
/// the training statistics the parameter-uncertainty predictive needs.
struct MosFit {
  double a_hat = 0.0;
  double b_hat = 0.0;
  double c2_hat = 0.0;  // residual variance, n - 2 divisor
  std::size_t n = 0;
  double m_bar = 0.0;
  double ss_m = 0.0;  // sum over training of (m_t - m_bar)^2
};

inline constexpr std::size_t kMosMinTraining = 3;

/// Least-squares intercept and slope with the unbiased residual variance.
/// Throws InsufficientDataError for n < 3 and DegenerateDesignError when all
/// ensemble means coincide.
MosFit fit_mos(const TrainingSet& train);

/// Normal(a + b m*, c^2): parameters treated as known.
Normal mos_predict_plugin(const MosFit& fit, double m_star);

/// 1 + 1/n + (m* - m_bar)^2 / ss_m.
double mos_inflation_factor(const MosFit& fit, double m_star);

/// t_{n-2}(a + b m*, c^2 * inflation): accounts for sampling variability of
/// all three estimates. Shares its location with mos_predict_plugin.
NonStandardizedT mos_predict_t(const MosFit& fit, double m_star);

}  // namespace recal
