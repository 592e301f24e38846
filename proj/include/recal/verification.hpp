#pragma once

#include <array>
#include <cstddef>
#include <span>

#include "recal/distributions.hpp"

namespace recal {

struct VerificationRecord {
  double pit = 0.0;
  double ignorance_bits = 0.0;
  double crps = 0.0;
};

inline constexpr std::size_t kPitBins = 20;

struct PitHistogram {
  std::array<double, kPitBins + 1> bin_edges{};
  std::array<std::size_t, kPitBins> counts{};
  std::size_t n_total = 0;
};

/// -log2 f(y), in bits. Densities are evaluated in log space, so the only
/// way to get +infinity back is a forecast that puts exactly zero density
/// on y.
double ignorance(const PredictiveDist& d, double y);

/// Closed forms for Normal and Normal mixtures; quadrature for the t.
/// Throws UndefinedScoreError for a t with nu <= 1.
double crps(const PredictiveDist& d, double y);

/// Integral of (F(x) - H(x - y))^2 by adaptive Gauss-Kronrod over
/// [quantile(1e-9), quantile(1 - 1e-9)] widened to contain y, split at y.
/// Works for every family and serves as the reference for the closed forms.
/// Throws NumericError if the error estimate misses `rel_tol`.
double crps_quadrature(const PredictiveDist& d, double y, double rel_tol = 1e-8);

/// A(mu, s2) = 2 s phi(mu / s) + mu (2 Phi(mu / s) - 1), the expected
/// absolute value of a Normal(mu, s2) variable.
double crps_a_function(double mu, double sigma2);

/// (ref - new) / ref. Throws InputError unless ref > 0.
double crpss(double mean_crps_ref, double mean_crps_new);

double pit(const PredictiveDist& d, double y);

/// 20 bins of width 0.05; values on an interior edge go to the lower bin.
PitHistogram pit_histogram(std::span<const double> pits);

/// Fraction of observations inside the closed central `level` interval of
/// their forecast.
double interval_coverage(std::span<const PredictiveDist> dists, std::span<const double> ys,
                         double level);

VerificationRecord verify(const PredictiveDist& d, double y);

}  // namespace recal
