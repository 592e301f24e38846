#include "recal/mos.hpp"

#include <string>

#include "recal/errors.hpp"

namespace recal {

namespace {

void require_predictable(const MosFit& fit) {
  if (fit.n < kMosMinTraining || !(fit.ss_m > 0.0)) {
    throw ParameterDomainError("MOS fit is not valid for prediction");
  }
  if (!(fit.c2_hat > 0.0)) {
    throw DegenerateVarianceError("MOS residual variance is zero; predictive distribution is degenerate");
  }
}

}  // namespace

MosFit fit_mos(const TrainingSet& train) {
  if (train.size() < kMosMinTraining) {
    throw InsufficientDataError("MOS needs at least 3 training cases, got " +
                                std::to_string(train.size()));
  }
  const SummaryStats s = summarize(train);
  if (!(s.ss_m > 0.0)) {
    throw DegenerateDesignError("all training ensemble means are identical");
  }

  // s_my / s_m^2 with matching n-1 divisors; the divisor cancels.
  const double nm1 = static_cast<double>(s.n - 1);
  const double s_my = s.sp_my / nm1;
  const double s_m2 = s.ss_m / nm1;

  MosFit fit;
  fit.b_hat = s_my / s_m2;
  fit.a_hat = s.mean_y - fit.b_hat * s.mean_m;
  double rss = 0.0;
  for (const auto& r : train) {
    const double e = r.obs - fit.a_hat - fit.b_hat * r.mean;
    rss += e * e;
  }
  fit.c2_hat = rss / static_cast<double>(s.n - 2);
  fit.n = s.n;
  fit.m_bar = s.mean_m;
  fit.ss_m = s.ss_m;
  return fit;
}

Normal mos_predict_plugin(const MosFit& fit, double m_star) {
  require_predictable(fit);
  return Normal(fit.a_hat + fit.b_hat * m_star, fit.c2_hat);
}

double mos_inflation_factor(const MosFit& fit, double m_star) {
  const double dm = m_star - fit.m_bar;
  return 1.0 + 1.0 / static_cast<double>(fit.n) + dm * dm / fit.ss_m;
}

NonStandardizedT mos_predict_t(const MosFit& fit, double m_star) {
  require_predictable(fit);
  return NonStandardizedT(static_cast<double>(fit.n - 2), fit.a_hat + fit.b_hat * m_star,
                          fit.c2_hat * mos_inflation_factor(fit, m_star));
}

}  // namespace recal
