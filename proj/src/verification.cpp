#include "recal/verification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "recal/errors.hpp"

namespace recal {

namespace {

constexpr double kLn2 = std::numbers::ln2;

double normal_ignorance(const Normal& n, double y) {
  const double r = y - n.mu();
  return (0.5 * std::log(2.0 * std::numbers::pi * n.sigma2()) + r * r / (2.0 * n.sigma2())) / kLn2;
}

double t_ignorance(const NonStandardizedT& t, double y) {
  const double nu = t.nu();
  const double r = y - t.mu();
  return (-std::lgamma(0.5 * (nu + 1.0)) + std::lgamma(0.5 * nu) +
          0.5 * std::log(std::numbers::pi * nu * t.sigma2()) +
          0.5 * (nu + 1.0) * std::log1p(r * r / (nu * t.sigma2()))) /
         kLn2;
}

double normal_crps(const Normal& n, double y) {
  const double z = (y - n.mu()) / n.sigma();
  return n.sigma() * (z * (2.0 * std_normal_cdf(z) - 1.0) + 2.0 * std_normal_pdf(z) -
                      1.0 / std::sqrt(std::numbers::pi));
}

// Neumaier compensated summation; the mixture double sum has K^2 terms.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    comp_ += std::abs(sum_) >= std::abs(x) ? (sum_ - t) + x : (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double mixture_crps(const NormalMixture& m, double y) {
  const auto& comps = m.components();
  CompensatedSum first;
  for (const auto& c : comps) first.add(c.weight * crps_a_function(y - c.mu, c.sigma2));
  // Symmetric double sum: diagonal once, off-diagonal pairs twice.
  CompensatedSum second;
  for (std::size_t k = 0; k < comps.size(); ++k) {
    const auto& ck = comps[k];
    second.add(ck.weight * ck.weight * crps_a_function(0.0, 2.0 * ck.sigma2));
    for (std::size_t l = k + 1; l < comps.size(); ++l) {
      const auto& cl = comps[l];
      second.add(2.0 * ck.weight * cl.weight * crps_a_function(ck.mu - cl.mu, ck.sigma2 + cl.sigma2));
    }
  }
  return std::max(0.0, first.value() - 0.5 * second.value());
}

}  // namespace

double crps_a_function(double mu, double sigma2) {
  const double s = std::sqrt(sigma2);
  const double z = mu / s;
  return 2.0 * s * std_normal_pdf(z) + mu * (2.0 * std_normal_cdf(z) - 1.0);
}

double ignorance(const PredictiveDist& d, double y) {
  if (const auto* n = std::get_if<Normal>(&d)) return normal_ignorance(*n, y);
  if (const auto* t = std::get_if<NonStandardizedT>(&d)) return t_ignorance(*t, y);
  const double lp = log_pdf(d, y);
  if (lp == -std::numeric_limits<double>::infinity()) {
    return std::numeric_limits<double>::infinity();
  }
  return -lp / kLn2;
}

double crps_quadrature(const PredictiveDist& d, double y, double rel_tol) {
  using Integrator = boost::math::quadrature::gauss_kronrod<double, 31>;
  constexpr unsigned kMaxDepth = 20;
  const double lo = std::min(quantile(d, 1e-9), y);
  const double hi = std::max(quantile(d, 1.0 - 1e-9), y);
  // Substituting x = y +/- unit * sinh(u) compresses heavy tails spanning
  // many orders of magnitude into a short, smooth u-range.
  const double unit = std::max(quantile(d, 0.75) - quantile(d, 0.25), 1e-300);

  double total = 0.0, err = 0.0, l1 = 0.0;
  auto integrate_side = [&](auto&& integrand, double far) {
    if (far == y) return;
    const double dir = far > y ? 1.0 : -1.0;
    const double u_max = std::asinh(std::abs(far - y) / unit);
    auto g = [&](double u) { return integrand(y + dir * unit * std::sinh(u)) * unit * std::cosh(u); };
    double e = 0.0, a = 0.0;
    total += Integrator::integrate(g, 0.0, u_max, kMaxDepth, rel_tol, &e, &a);
    err += e;
    l1 += a;
  };
  integrate_side([&](double x) { const double F = cdf(d, x); return F * F; }, lo);
  integrate_side([&](double x) { const double S = 1.0 - cdf(d, x); return S * S; }, hi);

  if (!std::isfinite(total) || err > rel_tol * l1) {
    std::ostringstream msg;
    msg << "CRPS quadrature did not converge: integral " << total << ", error estimate " << err
        << " on [" << lo << ", " << hi << "] split at y = " << y;
    throw NumericError(msg.str());
  }
  return total;
}

double crps(const PredictiveDist& d, double y) {
  if (const auto* n = std::get_if<Normal>(&d)) return normal_crps(*n, y);
  if (const auto* m = std::get_if<NormalMixture>(&d)) return mixture_crps(*m, y);
  const auto& t = std::get<NonStandardizedT>(d);
  if (!(t.nu() > 1.0)) {
    throw UndefinedScoreError("CRPS of a t distribution needs nu > 1, got nu = " + std::to_string(t.nu()));
  }
  return crps_quadrature(d, y);
}

double crpss(double mean_crps_ref, double mean_crps_new) {
  if (!(mean_crps_ref > 0.0)) {
    throw InputError("CRPSS reference score must be positive");
  }
  return (mean_crps_ref - mean_crps_new) / mean_crps_ref;
}

double pit(const PredictiveDist& d, double y) { return cdf(d, y); }

PitHistogram pit_histogram(std::span<const double> pits) {
  PitHistogram h;
  for (std::size_t k = 0; k <= kPitBins; ++k) {
    h.bin_edges[k] = static_cast<double>(k) / static_cast<double>(kPitBins);
  }
  for (double p : pits) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw InputError("PIT value " + std::to_string(p) + " outside [0, 1]");
    }
    // First upper edge >= p; ties land in the lower bin.
    const auto it = std::lower_bound(h.bin_edges.begin() + 1, h.bin_edges.end(), p);
    const auto bin = static_cast<std::size_t>(it - (h.bin_edges.begin() + 1));
    ++h.counts[std::min(bin, kPitBins - 1)];
  }
  h.n_total = pits.size();
  return h;
}

double interval_coverage(std::span<const PredictiveDist> dists, std::span<const double> ys,
                         double level) {
  if (dists.empty()) throw InputError("interval coverage of an empty forecast list");
  if (dists.size() != ys.size()) {
    throw InputError("interval coverage needs equally many forecasts and observations");
  }
  if (!(level > 0.0 && level < 1.0)) throw InputError("coverage level must lie in (0, 1)");
  std::size_t inside = 0;
  for (std::size_t i = 0; i < dists.size(); ++i) {
    const double lo = quantile(dists[i], 0.5 * (1.0 - level));
    const double hi = quantile(dists[i], 0.5 * (1.0 + level));
    if (ys[i] >= lo && ys[i] <= hi) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(dists.size());
}

VerificationRecord verify(const PredictiveDist& d, double y) {
  return {pit(d, y), ignorance(d, y), crps(d, y)};
}

}  // namespace recal
