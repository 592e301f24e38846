#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "oracles.hpp"
#include "recal/bootstrap.hpp"
#include "recal/errors.hpp"
#include "recal/mos.hpp"
#include "recal/random.hpp"

using namespace recal;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

TrainingSet simulate_ngr(std::uint64_t seed, std::size_t n, const NgrParams& p) {
  RandomStream rng(seed);
  std::normal_distribution<double> z;
  std::gamma_distribution<double> g(2.0, 0.5);
  std::vector<ForecastRecord> rows;
  for (std::size_t i = 0; i < n; ++i) {
    const double m = z(rng);
    const double v = 0.25 + g(rng);
    rows.push_back({m, v, p.a + p.b * m + std::sqrt(p.c + p.d * v) * z(rng)});
  }
  return TrainingSet(rows);
}

// Seasonal-scale stand-in: 19 years of a weakly skilful ensemble mean with
// a near-constant ensemble spread.
TrainingSet nao_like() {
  RandomStream rng(1997);
  std::normal_distribution<double> z;
  std::vector<ForecastRecord> rows;
  for (int i = 0; i < 19; ++i) {
    const double m = 0.5 * z(rng);
    const double v = 0.8 + 0.1 * std::abs(z(rng));
    rows.push_back({m, v, 1.2 * m + 0.9 * z(rng)});
  }
  return TrainingSet(rows);
}

}  // namespace

TEST_CASE("resample indices are in range and deterministic", "[bootstrap]") {
  RandomStream a(9), b(9);
  const auto ia = draw_resample_indices(a, 37), ib = draw_resample_indices(b, 37);
  CHECK(ia == ib);
  REQUIRE(ia.size() == 37);
  for (auto i : ia) CHECK(i < 37);
  CHECK(draw_resample_indices(a, 0).empty());
}

TEST_CASE("identity resample reproduces the direct fit", "[bootstrap]") {
  const auto train = simulate_ngr(3, 4, {0, 1, 0.5, 0.5});
  const std::vector<std::size_t> identity = {0, 1, 2, 3};
  std::uint64_t seed = 0;
  for (;; ++seed) {
    RandomStream rng = make_stream(seed, 0);
    if (draw_resample_indices(rng, 4) == identity) break;
  }
  const auto ens = bootstrap_fit(train, 1, seed);
  REQUIRE(ens.replicates.size() == 1);
  const auto direct = fit_ngr(train);
  CHECK(ens.failed_draws == 0);
  CHECK_THAT(ens.replicates[0].a, WithinAbs(direct.params.a, 1e-9));
  CHECK_THAT(ens.replicates[0].b, WithinAbs(direct.params.b, 1e-9));
  CHECK_THAT(ens.replicates[0].c, WithinAbs(direct.params.c, 1e-9));
  CHECK_THAT(ens.replicates[0].d, WithinAbs(direct.params.d, 1e-9));
}

TEST_CASE("bootstrap_fit is deterministic", "[bootstrap][determinism]") {
  const auto train = simulate_ngr(4, 30, {0, 1, 0.5, 0.5});
  const auto e1 = bootstrap_fit(train, 20, 123);
  const auto e2 = bootstrap_fit(train, 20, 123);
  CHECK(e1 == e2);
  CHECK(e1.base_seed == 123);
  CHECK(e1.replicates.size() == 20);
  CHECK_FALSE(bootstrap_fit(train, 20, 124) == e1);
}

TEST_CASE("replicate k does not depend on K", "[bootstrap][determinism]") {
  const auto train = simulate_ngr(5, 25, {0, 1, 0.5, 0.5});
  const auto small = bootstrap_fit(train, 5, 77);
  const auto large = bootstrap_fit(train, 12, 77);
  for (std::size_t k = 0; k < 5; ++k) CHECK(small.replicates[k] == large.replicates[k]);
}

TEST_CASE("degenerate resamples are redrawn and counted", "[bootstrap]") {
  // Three of four cases share an ensemble mean, so about a third of all
  // resamples have a single distinct mean.
  const TrainingSet train({{0, 1, 0.1}, {0, 1.5, -0.4}, {0, 0.7, 0.9}, {1, 1.2, 1.3}});
  const auto ens = bootstrap_fit(train, 40, 2);
  CHECK(ens.replicates.size() == 40);
  CHECK(ens.failed_draws > 0);
  CHECK(bootstrap_fit(train, 40, 2) == ens);
}

TEST_CASE("draw cap raises a bootstrap failure", "[bootstrap][errors]") {
  const auto train = simulate_ngr(6, 20, {0, 1, 0.5, 0.5});
  NgrOptions never;
  never.simplex.max_evaluations = 1;
  CHECK_THROWS_AS(bootstrap_fit(train, 3, 1, never), BootstrapFailure);
}

TEST_CASE("bootstrap_fit preconditions", "[bootstrap][errors]") {
  const auto train = simulate_ngr(7, 20, {0, 1, 0.5, 0.5});
  CHECK_THROWS_AS(bootstrap_fit(train, 0, 1), InputError);
  CHECK_THROWS_AS(bootstrap_fit(simulate_ngr(7, 3, {0, 1, 0.5, 0.5}), 5, 1), InsufficientDataError);
  CHECK_THROWS_AS(bootstrap_fit(TrainingSet({{1, 1, 0}, {1, 1, 1}, {1, 2, 2}, {1, 1, 3}}), 5, 1),
                  DegenerateDesignError);
}

TEST_CASE("single replicate reduces to the plug-in Normal", "[bootstrap][predict]") {
  const auto train = simulate_ngr(8, 30, {0, 1, 0.5, 0.5});
  const auto ens = bootstrap_fit(train, 1, 10);
  const auto mix = bootstrap_predict(ens, 0.7, 1.3);
  const Normal n = ngr_predict_plugin(ens.replicates[0], 0.7, 1.3);
  REQUIRE(mix.size() == 1);
  CHECK(mix.components()[0].weight == 1.0);
  CHECK(mix.components()[0].mu == n.mu());
  CHECK(mix.components()[0].sigma2 == n.sigma2());
  for (double x = -4; x < 4; x += 0.37) CHECK(pdf(mix, x) == pdf(n, x));
}

TEST_CASE("identical replicates give the single Normal", "[bootstrap][predict]") {
  BootstrapEnsemble ens;
  ens.replicates.assign(7, NgrParams{0.2, 1.1, 0.4, 0.3});
  const auto mix = bootstrap_predict(ens, -0.5, 2.0);
  const Normal n = ngr_predict_plugin(NgrParams{0.2, 1.1, 0.4, 0.3}, -0.5, 2.0);
  for (double x = -6; x < 6; x += 0.1) CHECK_THAT(pdf(mix, x), WithinAbs(pdf(n, x), 1e-12));
}

TEST_CASE("predict reports the offending replicate", "[bootstrap][predict][errors]") {
  BootstrapEnsemble ens;
  ens.replicates = {NgrParams{0, 1, 0.5, 0.1}, NgrParams{0, 1, 0.0, 0.2}};
  CHECK_NOTHROW(bootstrap_predict(ens, 0, 1));
  CHECK_THROWS_WITH(bootstrap_predict(ens, 0, 0), Catch::Matchers::ContainsSubstring("replicate 1"));
  CHECK_THROWS_AS(bootstrap_predict(ens, 0, 0), DegenerateVarianceError);
}

TEST_CASE("mixture moments follow the law of total variance", "[bootstrap][property]") {
  const auto train = simulate_ngr(11, 25, {0, 1, 0.5, 0.5});
  const auto ens = bootstrap_fit(train, 50, 3);
  const double m_star = 1.4, v_star = 0.9;
  const auto mix = bootstrap_predict(ens, m_star, v_star);

  double mean_mu = 0, mean_s2 = 0;
  for (const auto& p : ens.replicates) {
    mean_mu += p.a + p.b * m_star;
    mean_s2 += p.c + p.d * v_star;
  }
  const double K = static_cast<double>(ens.replicates.size());
  mean_mu /= K;
  mean_s2 /= K;
  double var_mu = 0;
  for (const auto& p : ens.replicates) var_mu += std::pow(p.a + p.b * m_star - mean_mu, 2);
  var_mu /= K;

  CHECK_THAT(mean(mix), WithinAbs(mean_mu, 1e-12));
  CHECK_THAT(variance(mix), WithinRel(mean_s2 + var_mu, 1e-12));

  RandomStream rng(12);
  const auto xs = sample(mix, rng, 1'000'000);
  const double sm = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double sv = 0;
  for (double x : xs) sv += (x - sm) * (x - sm);
  sv /= static_cast<double>(xs.size() - 1);
  CHECK(std::abs(sm - mean_mu) < 5 * std::sqrt((mean_s2 + var_mu) / 1e6));
  CHECK_THAT(sv, WithinRel(mean_s2 + var_mu, 0.01));
}

TEST_CASE("replicate order does not matter", "[bootstrap][property]") {
  const auto train = simulate_ngr(13, 20, {0, 1, 0.5, 0.5});
  auto ens = bootstrap_fit(train, 30, 8);
  const auto mix = bootstrap_predict(ens, 0.3, 1.0);
  RandomStream rng(14);
  std::shuffle(ens.replicates.begin(), ens.replicates.end(), rng);
  const auto shuffled = bootstrap_predict(ens, 0.3, 1.0);
  for (double x = -4; x < 4; x += 0.25) {
    CHECK_THAT(pdf(shuffled, x), WithinRel(pdf(mix, x), 1e-12));
    CHECK_THAT(cdf(shuffled, x), WithinAbs(cdf(mix, x), 1e-14));
  }
  for (double p : {0.01, 0.25, 0.5, 0.75, 0.99}) CHECK_THAT(quantile(shuffled, p), WithinAbs(quantile(mix, p), 1e-9));
}

TEST_CASE("seasonal-scale mixture is wider with heavier tails than the plug-in", "[bootstrap][property][slow]") {
  const auto train = nao_like();
  const auto fit = fit_ngr(train);
  const auto ens = bootstrap_fit(train, 500, 1997);
  REQUIRE(ens.replicates.size() == 500);

  const auto stats = summarize(train);
  const double sd_m = std::sqrt(stats.ss_m / 18.0);
  const double m_star = stats.mean_m + 2.0 * sd_m;
  const double v_star = 0.85;

  const Normal plug = ngr_predict_plugin(fit, m_star, v_star);
  const auto mix = bootstrap_predict(ens, m_star, v_star);

  // Direct moment oracle: mean component variance plus variance of means.
  double mu_bar = 0, s2_bar = 0;
  for (const auto& c : mix.components()) {
    mu_bar += c.mu / 500.0;
    s2_bar += c.sigma2 / 500.0;
  }
  double spread = 0;
  for (const auto& c : mix.components()) spread += (c.mu - mu_bar) * (c.mu - mu_bar) / 500.0;
  CHECK_THAT(variance(mix), WithinRel(s2_bar + spread, 1e-12));
  CHECK(variance(mix) > plug.sigma2());

  const double lo = quantile(plug, 0.01), hi = quantile(plug, 0.99);
  for (double u = 0.0; u <= 4.0; u += 0.05) {
    CHECK(pdf(mix, hi + u * plug.sigma()) > pdf(plug, hi + u * plug.sigma()));
    CHECK(pdf(mix, lo - u * plug.sigma()) > pdf(plug, lo - u * plug.sigma()));
  }
}

TEST_CASE("bootstrap spread grows away from the training mean, like the t inflation", "[bootstrap][property]") {
  RandomStream rng(15);
  std::normal_distribution<double> z;
  std::vector<ForecastRecord> rows;
  for (int i = 0; i < 20; ++i) {
    const double m = z(rng);
    rows.push_back({m, 1.0, m + z(rng)});
  }
  const TrainingSet train(rows);
  const auto mos = fit_mos(train);
  const auto ens = bootstrap_fit(train, 200, 16);
  const double s_m = std::sqrt(mos.ss_m / 19.0);
  const double centre = variance(bootstrap_predict(ens, mos.m_bar, 1.0));
  const double far = variance(bootstrap_predict(ens, mos.m_bar + 2.5 * s_m, 1.0));
  CHECK(far > centre);
  CHECK(mos_predict_t(mos, mos.m_bar + 2.5 * s_m).sigma2() > mos_predict_t(mos, mos.m_bar).sigma2());
}
