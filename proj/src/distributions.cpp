#include "recal/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/erf.hpp>

#include "recal/errors.hpp"

namespace recal {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2*pi))

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) {
    throw ParameterDomainError(std::string(what) + " must be finite");
  }
}

double normal_log_pdf(double mu, double sigma, double x) {
  const double z = (x - mu) / sigma;
  return -0.5 * z * z - std::log(sigma) - kLogSqrt2Pi;
}

double t_log_pdf(const NonStandardizedT& t, double x) {
  const double nu = t.nu();
  const double r = (x - t.mu()) / t.sigma();
  return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
         0.5 * std::log(std::numbers::pi * nu * t.sigma2()) -
         0.5 * (nu + 1.0) * std::log1p(r * r / nu);
}

double mixture_log_pdf(const NormalMixture& m, double x) {
  double peak = -std::numeric_limits<double>::infinity();
  std::vector<double> terms;
  terms.reserve(m.size());
  for (const auto& c : m.components()) {
    if (c.weight <= 0.0) continue;
    const double term = std::log(c.weight) + normal_log_pdf(c.mu, std::sqrt(c.sigma2), x);
    terms.push_back(term);
    peak = std::max(peak, term);
  }
  if (!std::isfinite(peak)) return peak;
  double acc = 0.0;
  for (double term : terms) acc += std::exp(term - peak);
  return peak + std::log(acc);
}

double mixture_cdf(const NormalMixture& m, double x) {
  double acc = 0.0;
  for (const auto& c : m.components()) {
    acc += c.weight * std_normal_cdf((x - c.mu) / std::sqrt(c.sigma2));
  }
  return std::clamp(acc, 0.0, 1.0);
}

double mixture_quantile(const NormalMixture& m, double p) {
  double lo_mu = std::numeric_limits<double>::infinity();
  double hi_mu = -lo_mu;
  double max_sigma = 0.0;
  for (const auto& c : m.components()) {
    lo_mu = std::min(lo_mu, c.mu);
    hi_mu = std::max(hi_mu, c.mu);
    max_sigma = std::max(max_sigma, std::sqrt(c.sigma2));
  }
  double lo = lo_mu - 20.0 * max_sigma;
  double hi = hi_mu + 20.0 * max_sigma;
  // Bisect down to adjacent doubles; the cdf is continuous and monotone.
  for (int iter = 0; iter < 2000; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (mixture_cdf(m, mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::abs(mixture_cdf(m, lo) - p) < std::abs(mixture_cdf(m, hi) - p) ? lo : hi;
}

}  // namespace

Normal::Normal(double mu, double sigma2) : mu_(mu), sigma2_(sigma2) {
  require_finite(mu, "Normal mean");
  require_finite(sigma2, "Normal variance");
  if (!(sigma2 > 0.0)) {
    throw ParameterDomainError("Normal variance must be positive, got " + std::to_string(sigma2));
  }
  sigma_ = std::sqrt(sigma2);
}

NonStandardizedT::NonStandardizedT(double nu, double mu, double sigma2)
    : nu_(nu), mu_(mu), sigma2_(sigma2) {
  require_finite(mu, "t location");
  require_finite(sigma2, "t squared scale");
  if (!(nu > 0.0) || std::isnan(nu)) {
    throw ParameterDomainError("t degrees of freedom must be positive");
  }
  if (!(sigma2 > 0.0)) {
    throw ParameterDomainError("t squared scale must be positive, got " + std::to_string(sigma2));
  }
  sigma_ = std::sqrt(sigma2);
}

NormalMixture::NormalMixture(std::vector<MixtureComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) {
    throw ParameterDomainError("Normal mixture needs at least one component");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < components_.size(); ++k) {
    const auto& c = components_[k];
    require_finite(c.mu, "mixture component mean");
    require_finite(c.sigma2, "mixture component variance");
    if (!(c.weight >= 0.0)) {
      throw ParameterDomainError("mixture weight " + std::to_string(k) + " is negative");
    }
    if (!(c.sigma2 > 0.0)) {
      throw ParameterDomainError("mixture component " + std::to_string(k) +
                                 " has non-positive variance");
    }
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ParameterDomainError("mixture weights sum to " + std::to_string(total) + ", not 1");
  }
}

NormalMixture NormalMixture::equally_weighted(std::span<const Normal> components) {
  std::vector<MixtureComponent> out;
  out.reserve(components.size());
  const double w = components.empty() ? 0.0 : 1.0 / static_cast<double>(components.size());
  for (const auto& n : components) out.push_back({w, n.mu(), n.sigma2()});
  return NormalMixture(std::move(out));
}

double std_normal_pdf(double z) noexcept {
  return std::exp(-0.5 * z * z - kLogSqrt2Pi);
}

double std_normal_cdf(double z) noexcept {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double std_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw ParameterDomainError("quantile level must lie in (0, 1)");
  }
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double central_t_cdf(double nu, double t) {
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double t2 = t * t;
  // Two-sided tail mass P(|T| > |t|) as a regularized incomplete beta,
  // evaluated on whichever argument keeps precision.
  double tail;
  if (nu < 2.0 * t2) {
    tail = boost::math::ibeta(0.5 * nu, 0.5, nu / (nu + t2));
  } else {
    tail = boost::math::ibetac(0.5, 0.5 * nu, t2 / (nu + t2));
  }
  return t < 0.0 ? 0.5 * tail : 1.0 - 0.5 * tail;
}

double log_pdf(const PredictiveDist& d, double x) {
  return std::visit(Overloaded{
                        [x](const Normal& n) { return normal_log_pdf(n.mu(), n.sigma(), x); },
                        [x](const NonStandardizedT& t) { return t_log_pdf(t, x); },
                        [x](const NormalMixture& m) { return mixture_log_pdf(m, x); },
                    },
                    d);
}

double pdf(const PredictiveDist& d, double x) {
  if (const auto* n = std::get_if<Normal>(&d)) {
    return std_normal_pdf((x - n->mu()) / n->sigma()) / n->sigma();
  }
  if (const auto* m = std::get_if<NormalMixture>(&d)) {
    double acc = 0.0;
    for (const auto& c : m->components()) {
      const double s = std::sqrt(c.sigma2);
      acc += c.weight * std_normal_pdf((x - c.mu) / s) / s;
    }
    return acc;
  }
  return std::exp(log_pdf(d, x));
}

double cdf(const PredictiveDist& d, double x) {
  return std::visit(
      Overloaded{
          [x](const Normal& n) { return std_normal_cdf((x - n.mu()) / n.sigma()); },
          [x](const NonStandardizedT& t) { return central_t_cdf(t.nu(), (x - t.mu()) / t.sigma()); },
          [x](const NormalMixture& m) { return mixture_cdf(m, x); },
      },
      d);
}

double quantile(const PredictiveDist& d, double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw ParameterDomainError("quantile level must lie in (0, 1), got " + std::to_string(p));
  }
  return std::visit(
      Overloaded{
          [p](const Normal& n) { return n.mu() + n.sigma() * std_normal_quantile(p); },
          [p](const NonStandardizedT& t) {
            const boost::math::students_t_distribution<double> central(t.nu());
            return t.mu() + t.sigma() * boost::math::quantile(central, p);
          },
          [p](const NormalMixture& m) {
            if (m.size() == 1) {
              const auto& c = m.components().front();
              return c.mu + std::sqrt(c.sigma2) * std_normal_quantile(p);
            }
            return mixture_quantile(m, p);
          },
      },
      d);
}

std::vector<double> sample(const PredictiveDist& d, RandomStream& rng, std::size_t k) {
  std::vector<double> out;
  out.reserve(k);
  std::normal_distribution<double> z(0.0, 1.0);
  std::visit(Overloaded{
                 [&](const Normal& n) {
                   for (std::size_t i = 0; i < k; ++i) out.push_back(n.mu() + n.sigma() * z(rng));
                 },
                 [&](const NonStandardizedT& t) {
                   std::student_t_distribution<double> central(t.nu());
                   for (std::size_t i = 0; i < k; ++i) {
                     out.push_back(t.mu() + t.sigma() * central(rng));
                   }
                 },
                 [&](const NormalMixture& m) {
                   std::vector<double> cumulative;
                   cumulative.reserve(m.size());
                   double acc = 0.0;
                   for (const auto& c : m.components()) cumulative.push_back(acc += c.weight);
                   std::uniform_real_distribution<double> u(0.0, acc);
                   for (std::size_t i = 0; i < k; ++i) {
                     const double draw = u(rng);
                     auto it = std::upper_bound(cumulative.begin(), cumulative.end(), draw);
                     if (it == cumulative.end()) --it;
                     const auto& c = m.components()[static_cast<std::size_t>(it - cumulative.begin())];
                     out.push_back(c.mu + std::sqrt(c.sigma2) * z(rng));
                   }
                 },
             },
             d);
  return out;
}

double mean(const PredictiveDist& d) {
  return std::visit(Overloaded{
                        [](const Normal& n) { return n.mu(); },
                        [](const NonStandardizedT& t) {
                          return t.nu() > 1.0 ? t.mu() : std::numeric_limits<double>::quiet_NaN();
                        },
                        [](const NormalMixture& m) {
                          double acc = 0.0;
                          for (const auto& c : m.components()) acc += c.weight * c.mu;
                          return acc;
                        },
                    },
                    d);
}

double variance(const PredictiveDist& d) {
  return std::visit(Overloaded{
                        [](const Normal& n) { return n.sigma2(); },
                        [](const NonStandardizedT& t) {
                          if (t.nu() <= 2.0) return std::numeric_limits<double>::infinity();
                          return t.sigma2() * t.nu() / (t.nu() - 2.0);
                        },
                        [](const NormalMixture& m) {
                          // Law of total variance.
                          double mu = 0.0;
                          for (const auto& c : m.components()) mu += c.weight * c.mu;
                          double acc = 0.0;
                          for (const auto& c : m.components()) {
                            acc += c.weight * (c.sigma2 + (c.mu - mu) * (c.mu - mu));
                          }
                          return acc;
                        },
                    },
                    d);
}

PredictiveDist shifted(const PredictiveDist& d, double delta) {
  return std::visit(Overloaded{
                        [delta](const Normal& n) -> PredictiveDist {
                          return Normal(n.mu() + delta, n.sigma2());
                        },
                        [delta](const NonStandardizedT& t) -> PredictiveDist {
                          return NonStandardizedT(t.nu(), t.mu() + delta, t.sigma2());
                        },
                        [delta](const NormalMixture& m) -> PredictiveDist {
                          auto comps = m.components();
                          for (auto& c : comps) c.mu += delta;
                          return NormalMixture(std::move(comps));
                        },
                    },
                    d);
}

}  // namespace recal
