#include "recal/ngr.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <tuple>

#include "recal/errors.hpp"
#include "recal/mos.hpp"

namespace recal {

namespace {

// Unchecked proportional log-likelihood; -inf when a variance is not positive.
double proportional_ll(double a, double b, double c, double d, const TrainingSet& train) {
  double acc = 0.0;
  for (const auto& r : train) {
    const double s2 = c + d * r.variance;
    if (!(s2 > 0.0)) return -std::numeric_limits<double>::infinity();
    const double e = r.obs - a - b * r.mean;
    acc += std::log(s2) + e * e / s2;
  }
  return -acc;
}

double exact_from_proportional(double ll, std::size_t n) {
  return 0.5 * ll - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

TrainingSet canonical_order(const TrainingSet& train) {
  std::vector<ForecastRecord> rows(train.begin(), train.end());
  std::sort(rows.begin(), rows.end(), [](const ForecastRecord& l, const ForecastRecord& r) {
    return std::tie(l.mean, l.variance, l.obs) < std::tie(r.mean, r.variance, r.obs);
  });
  return TrainingSet(std::move(rows));
}

}  // namespace

double ngr_log_likelihood(const NgrParams& p, const TrainingSet& train) {
  for (const auto& r : train) {
    if (!(p.c + p.d * r.variance > 0.0)) {
      throw ParameterDomainError("NGR variance c + d v is not positive for v = " +
                                 std::to_string(r.variance));
    }
  }
  return proportional_ll(p.a, p.b, p.c, p.d, train);
}

double ngr_exact_log_likelihood(const NgrParams& p, const TrainingSet& train) {
  return exact_from_proportional(ngr_log_likelihood(p, train), train.size());
}

double ngr_variance_floor(const TrainingSet& train) {
  const SummaryStats s = summarize(train);
  const double var_y = s.n > 1 ? s.ss_y / static_cast<double>(s.n - 1) : 0.0;
  return std::max(1e-8 * var_y, std::numeric_limits<double>::min());
}

NgrFit fit_ngr(const TrainingSet& input, const NgrOptions& opts,
               const std::function<void(double)>& on_iteration) {
  if (input.size() < kNgrMinTraining) {
    throw InsufficientDataError("NGR needs at least 4 training cases, got " +
                                std::to_string(input.size()));
  }
  if (input.distinct_means() < 2) {
    throw DegenerateDesignError("all training ensemble means are identical");
  }

  // The likelihood is a sum over cases; a fixed evaluation order makes the
  // fit independent of record order down to the last bit.
  const TrainingSet train = canonical_order(input);
  const std::size_t n = train.size();
  const double floor_c = ngr_variance_floor(train);

  constexpr double kDelta0 = 1e-3;
  constexpr double kFaceBand = 1e-3;
  const MosFit mos = fit_mos(train);
  double mean_v = 0.0;
  for (const auto& r : train) mean_v += r.variance;
  mean_v /= static_cast<double>(n);
  // Start at the d = 0 maximum: MOS coefficients and the /n residual
  // variance, with the small initial spread term taken out of c.
  const double ml_var = mos.c2_hat * static_cast<double>(n - 2) / static_cast<double>(n);
  const double c0 = std::max(ml_var - kDelta0 * kDelta0 * mean_v, floor_c);

  const double scale = std::sqrt(c0);
  const double sd_m = std::sqrt(mos.ss_m / static_cast<double>(n - 1));
  const std::array<double, 4> steps = {
      0.1 * scale,
      0.1 * scale / sd_m,
      0.5 * c0,
      mean_v > 0.0 ? 0.5 * std::sqrt(c0 / mean_v) : 0.1,
  };

  // c is mirrored at the floor rather than clipped: a clipped coordinate
  // leaves a flat region in which the simplex can collapse.
  auto unpack = [floor_c](std::span<const double> x) {
    return NgrParams{x[0], x[1], floor_c + std::abs(x[2] - floor_c), x[3] * x[3]};
  };
  const Objective objective = [&](std::span<const double> x) {
    const NgrParams p = unpack(x);
    return -exact_from_proportional(proportional_ll(p.a, p.b, p.c, p.d, train), n);
  };
  std::function<void(double)> trace;
  if (on_iteration) trace = [&](double f) { on_iteration(-f); };

  SimplexResult best = nelder_mead(objective, {mos.a_hat, mos.b_hat, c0, kDelta0}, steps, opts.simplex, trace);
  std::size_t iterations = best.iterations;

  for (std::size_t r = 0; r < opts.restarts; ++r) {
    const NgrParams at = unpack(best.x);
    std::vector<double> x = {at.a, at.b, at.c, std::sqrt(at.d)};
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double sign = (i + r) % 2 == 0 ? 1.0 : -1.0;
      x[i] = std::abs(x[i]) > steps[i] ? x[i] * (1.0 + 0.1 * sign) : x[i] + 0.1 * sign * steps[i];
    }
    SimplexResult again = nelder_mead(objective, std::move(x), steps, opts.simplex, trace);
    iterations += again.iterations;
    if (again.value < best.value) best = std::move(again);
  }

  // Near the floor the mirrored c coordinate forms a kink that can stall the
  // simplex. Re-optimise (a, b, delta) on the face c = floor and keep it if
  // it is better.
  if (const NgrParams at = unpack(best.x); at.c - floor_c < kFaceBand * c0) {
    const Objective on_face = [&](std::span<const double> x) {
      return objective(std::array<double, 4>{x[0], x[1], floor_c, x[2]});
    };
    const std::array<double, 3> face_steps = {steps[0], steps[1], steps[3]};
    SimplexResult face = nelder_mead(on_face, {at.a, at.b, std::sqrt(at.d)}, face_steps, opts.simplex, trace);
    iterations += face.iterations;
    if (face.value < best.value) {
      best.x = {face.x[0], face.x[1], floor_c, face.x[2]};
      best.value = face.value;
      best.converged = face.converged;
    }
  }

  NgrFit fit;
  fit.params = unpack(best.x);
  fit.log_likelihood = -best.value;
  fit.converged = best.converged;
  fit.iterations = iterations;
  return fit;
}

Normal ngr_predict_plugin(const NgrParams& p, double m_star, double v_star) {
  const double s2 = p.c + p.d * v_star;
  if (!(s2 > 0.0)) {
    throw DegenerateVarianceError("NGR predictive variance c + d v* = " + std::to_string(s2) +
                                  " is not positive");
  }
  return Normal(p.a + p.b * m_star, s2);
}

}  // namespace recal
