#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "recal/distributions.hpp"
#include "recal/ngr.hpp"
#include "recal/random.hpp"
#include "recal/training_set.hpp"

namespace recal {

struct BootstrapEnsemble {
  std::vector<NgrParams> replicates;
  std::size_t failed_draws = 0;
  std::uint64_t base_seed = 0;

  friend bool operator==(const BootstrapEnsemble&, const BootstrapEnsemble&) = default;
};

/// Total resample attempts allowed per requested replicate.
inline constexpr std::size_t kBootstrapDrawCapFactor = 100;

/// n case indices drawn uniformly with replacement.
std::vector<std::size_t> draw_resample_indices(RandomStream& rng, std::size_t n);

/// Predictive bootstrap: K case resamples of the training set, each refitted
/// by fit_ngr. Replicate k draws from make_stream(base_seed, k) only, so it
/// does not depend on K or on the other replicates. Resamples with fewer than
/// two distinct ensemble means, or whose fit fails to converge, are redrawn
/// from the same stream and counted in failed_draws; more than 100 K draws in
/// total raises BootstrapFailure.
BootstrapEnsemble bootstrap_fit(const TrainingSet& train, std::size_t K, std::uint64_t base_seed,
                                const NgrOptions& opts = {});

/// Equally weighted mixture of the K plug-in Normals at (m*, v*).
NormalMixture bootstrap_predict(const BootstrapEnsemble& ens, double m_star, double v_star);

}  // namespace recal
