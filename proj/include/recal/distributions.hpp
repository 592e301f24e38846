#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "recal/random.hpp"

namespace recal {

/// Normal distribution parametrized by mean and variance. Zero variance is
/// rejected: scores divide by the standard deviation.
class Normal {
 public:
  Normal(double mu, double sigma2);

  double mu() const noexcept { return mu_; }
  double sigma2() const noexcept { return sigma2_; }
  double sigma() const noexcept { return sigma_; }

 private:
  double mu_;
  double sigma2_;
  double sigma_;
};

/// Location-scale Student-t with `nu` degrees of freedom. The second
/// parameter is the squared scale, so t_18(0, 1.1) has sigma = sqrt(1.1).
class NonStandardizedT {
 public:
  NonStandardizedT(double nu, double mu, double sigma2);

  double nu() const noexcept { return nu_; }
  double mu() const noexcept { return mu_; }
  double sigma2() const noexcept { return sigma2_; }
  double sigma() const noexcept { return sigma_; }

 private:
  double nu_;
  double mu_;
  double sigma2_;
  double sigma_;
};

struct MixtureComponent {
  double weight;
  double mu;
  double sigma2;
};

/// Finite mixture of Normals. Weights must be non-negative and sum to one
/// within 1e-12.
class NormalMixture {
 public:
  explicit NormalMixture(std::vector<MixtureComponent> components);

  /// K components of weight 1/K each.
  static NormalMixture equally_weighted(std::span<const Normal> components);

  const std::vector<MixtureComponent>& components() const noexcept { return components_; }
  std::size_t size() const noexcept { return components_.size(); }

 private:
  std::vector<MixtureComponent> components_;
};

using PredictiveDist = std::variant<Normal, NonStandardizedT, NormalMixture>;

double pdf(const PredictiveDist& d, double x);
double log_pdf(const PredictiveDist& d, double x);
double cdf(const PredictiveDist& d, double x);

/// Throws ParameterDomainError unless 0 < p < 1.
double quantile(const PredictiveDist& d, double p);

std::vector<double> sample(const PredictiveDist& d, RandomStream& rng, std::size_t k);

/// Infinite for a t with nu <= 2.
double mean(const PredictiveDist& d);
double variance(const PredictiveDist& d);

/// Same distribution translated by `delta`.
PredictiveDist shifted(const PredictiveDist& d, double delta);

// Standard Normal and central-t building blocks.
double std_normal_pdf(double z) noexcept;
double std_normal_cdf(double z) noexcept;
double std_normal_quantile(double p);
double central_t_cdf(double nu, double t);

}  // namespace recal
