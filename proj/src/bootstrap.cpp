#include "recal/bootstrap.hpp"

#include <string>

#include "recal/errors.hpp"

namespace recal {

std::vector<std::size_t> draw_resample_indices(RandomStream& rng, std::size_t n) {
  std::vector<std::size_t> idx(n);
  if (n == 0) return idx;
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (auto& i : idx) i = pick(rng);
  return idx;
}

BootstrapEnsemble bootstrap_fit(const TrainingSet& train, std::size_t K, std::uint64_t base_seed,
                                const NgrOptions& opts) {
  if (K == 0) throw InputError("bootstrap needs at least one replicate");
  if (train.size() < kNgrMinTraining) {
    throw InsufficientDataError("bootstrap needs at least 4 training cases, got " +
                                std::to_string(train.size()));
  }
  if (train.distinct_means() < 2) {
    throw DegenerateDesignError("all training ensemble means are identical");
  }

  const std::size_t cap = kBootstrapDrawCapFactor * K;
  BootstrapEnsemble ens;
  ens.base_seed = base_seed;
  ens.replicates.reserve(K);
  std::size_t draws = 0;

  for (std::size_t k = 0; k < K; ++k) {
    RandomStream rng = make_stream(base_seed, k);
    while (true) {
      if (draws >= cap) {
        throw BootstrapFailure("bootstrap exceeded " + std::to_string(cap) + " resample draws (" +
                               std::to_string(ens.failed_draws) + " degenerate or non-convergent); " +
                               "training data too small or degenerate");
      }
      ++draws;
      const auto idx = draw_resample_indices(rng, train.size());
      const TrainingSet resample = train.select(idx);
      if (resample.distinct_means() < 2) {
        ++ens.failed_draws;
        continue;
      }
      const NgrFit fit = fit_ngr(resample, opts);
      if (!fit.converged) {
        ++ens.failed_draws;
        continue;
      }
      ens.replicates.push_back(fit.params);
      break;
    }
  }
  return ens;
}

NormalMixture bootstrap_predict(const BootstrapEnsemble& ens, double m_star, double v_star) {
  if (ens.replicates.empty()) throw InputError("bootstrap ensemble is empty");
  const double w = 1.0 / static_cast<double>(ens.replicates.size());
  std::vector<MixtureComponent> comps;
  comps.reserve(ens.replicates.size());
  for (std::size_t k = 0; k < ens.replicates.size(); ++k) {
    const auto& p = ens.replicates[k];
    const double s2 = p.c + p.d * v_star;
    if (!(s2 > 0.0)) {
      throw DegenerateVarianceError("bootstrap replicate " + std::to_string(k) +
                                    " has non-positive predictive variance " + std::to_string(s2));
    }
    comps.push_back({w, p.a + p.b * m_star, s2});
  }
  return NormalMixture(std::move(comps));
}

}  // namespace recal
