#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "recal/errors.hpp"
#include "recal/mos.hpp"
#include "recal/random.hpp"
#include "recal/verification.hpp"

using namespace recal;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

TrainingSet from_pairs(const std::vector<std::pair<double, double>>& my) {
  std::vector<ForecastRecord> rows;
  for (auto [m, y] : my) rows.push_back({m, 1.0, y});
  return TrainingSet(rows);
}

TrainingSet simulate(RandomStream& rng, std::size_t n, double a, double b, double c) {
  std::normal_distribution<double> z;
  std::vector<ForecastRecord> rows;
  for (std::size_t i = 0; i < n; ++i) {
    const double m = z(rng);
    rows.push_back({m, 0.0, a + b * m + c * z(rng)});
  }
  return TrainingSet(rows);
}

}  // namespace

TEST_CASE("fit_mos on hand-computed sets", "[mos][fit]") {
  const auto exact = fit_mos(from_pairs({{0, 0}, {1, 1}, {2, 2}}));
  CHECK_THAT(exact.a_hat, WithinAbs(0.0, 1e-15));
  CHECK_THAT(exact.b_hat, WithinAbs(1.0, 1e-15));
  CHECK_THAT(exact.c2_hat, WithinAbs(0.0, 1e-15));

  const auto fit = fit_mos(from_pairs({{0, 0}, {1, 2}, {2, 2}}));
  CHECK_THAT(fit.a_hat, WithinAbs(1.0 / 3.0, 1e-15));
  CHECK_THAT(fit.b_hat, WithinAbs(1.0, 1e-15));
  CHECK_THAT(fit.c2_hat, WithinAbs(2.0 / 3.0, 1e-15));
  CHECK(fit.n == 3);
  CHECK_THAT(fit.m_bar, WithinAbs(1.0, 1e-15));
  CHECK_THAT(fit.ss_m, WithinAbs(2.0, 1e-15));

  const auto o = oracle::ols({0, 1, 2}, {0, 2, 2});
  CHECK_THAT(fit.a_hat, WithinAbs(o.a, 1e-14));
  CHECK_THAT(fit.c2_hat, WithinAbs(o.c2, 1e-14));
}

TEST_CASE("fit_mos is translation equivariant in y", "[mos][fit]") {
  RandomStream rng(3);
  const auto train = simulate(rng, 30, 0.3, 0.8, 1.2);
  std::vector<ForecastRecord> moved(train.begin(), train.end());
  for (auto& r : moved) r.obs += 10.0;
  const auto f0 = fit_mos(train), f1 = fit_mos(TrainingSet(moved));
  CHECK_THAT(f1.a_hat - f0.a_hat, WithinAbs(10.0, 1e-12));
  CHECK_THAT(f1.b_hat, WithinAbs(f0.b_hat, 1e-12));
  CHECK_THAT(f1.c2_hat, WithinAbs(f0.c2_hat, 1e-12));
}

TEST_CASE("fit_mos matches normal-equation least squares", "[mos][fit][oracle]") {
  RandomStream rng(2718);
  std::uniform_int_distribution<int> sizes(3, 40);
  std::uniform_real_distribution<double> coef(-3, 3), noise(0.1, 3);
  for (int rep = 0; rep < 100; ++rep) {
    const auto train = simulate(rng, static_cast<std::size_t>(sizes(rng)), coef(rng), coef(rng), noise(rng));
    std::vector<double> m, y;
    for (const auto& r : train) {
      m.push_back(r.mean);
      y.push_back(r.obs);
    }
    const auto o = oracle::ols(m, y);
    const auto f = fit_mos(train);
    CHECK_THAT(f.a_hat, WithinAbs(o.a, 1e-10));
    CHECK_THAT(f.b_hat, WithinAbs(o.b, 1e-10));
    CHECK_THAT(f.c2_hat, WithinAbs(o.c2, 1e-10));
  }
}

TEST_CASE("fit_mos errors", "[mos][errors]") {
  CHECK_THROWS_AS(fit_mos(from_pairs({{0, 0}, {1, 1}})), InsufficientDataError);
  CHECK_THROWS_AS(fit_mos(TrainingSet{}), InsufficientDataError);
  CHECK_THROWS_AS(fit_mos(from_pairs({{2, 0}, {2, 1}, {2, 5}})), DegenerateDesignError);
}

TEST_CASE("plug-in prediction", "[mos][predict]") {
  const MosFit fit{1.0 / 3.0, 1.0, 2.0 / 3.0, 3, 1.0, 2.0};
  const Normal p = mos_predict_plugin(fit, 1.0);
  CHECK_THAT(p.mu(), WithinAbs(4.0 / 3.0, 1e-15));
  CHECK_THAT(p.sigma2(), WithinAbs(2.0 / 3.0, 1e-15));

  const MosFit clim{0.0, 0.0, 1.0, 10, 0.0, 5.0};
  for (double m : {-7.0, 0.0, 3.5}) {
    CHECK(mos_predict_plugin(clim, m).mu() == 0.0);
    CHECK(mos_predict_plugin(clim, m).sigma2() == 1.0);
  }

  const MosFit identity{0.0, 1.0, 0.5, 10, 2.25, 5.0};
  CHECK(mos_predict_plugin(identity, identity.m_bar).mu() == 2.25);

  CHECK_THROWS_AS(mos_predict_plugin(MosFit{0, 1, 0.0, 3, 1, 2}, 1.0), DegenerateVarianceError);
  CHECK_THROWS_AS(mos_predict_t(MosFit{0, 1, 0.0, 3, 1, 2}, 1.0), DegenerateVarianceError);
}

TEST_CASE("t prediction under parameter uncertainty", "[mos][predict]") {
  const MosFit fit{1.0 / 3.0, 1.0, 2.0 / 3.0, 3, 1.0, 2.0};
  const auto t = mos_predict_t(fit, 3.0);
  CHECK(t.nu() == 1.0);
  CHECK_THAT(t.mu(), WithinAbs(10.0 / 3.0, 1e-15));
  CHECK_THAT(t.sigma2(), WithinAbs(20.0 / 9.0, 1e-14));
}

TEST_CASE("inflation factor one training sd from the mean at n = 20", "[mos][inflation]") {
  const double s_m = 1.7;
  const MosFit fit{0.0, 1.0, 1.0, 20, 0.4, 19.0 * s_m * s_m};
  const double factor = mos_inflation_factor(fit, fit.m_bar + s_m);
  CHECK_THAT(factor, WithinAbs(1.0 + 1.0 / 20.0 + 1.0 / 19.0, 1e-12));
  CHECK_THAT(factor, WithinAbs(1.10263, 5e-6));
  const auto t = mos_predict_t(fit, fit.m_bar + s_m);
  CHECK(t.nu() == 18.0);
  CHECK_THAT(t.sigma2(), WithinRel(factor, 1e-15));
}

TEST_CASE("inflation factor bounds and limits", "[mos][inflation][property]") {
  RandomStream rng(8);
  for (int rep = 0; rep < 50; ++rep) {
    const auto fit = fit_mos(simulate(rng, 5 + rep, 0, 1, 1));
    const double floor = 1.0 + 1.0 / static_cast<double>(fit.n);
    CHECK(mos_inflation_factor(fit, fit.m_bar) == floor);
    double prev = floor;
    for (double dm = 0.1; dm < 5; dm += 0.1) {
      const double up = mos_inflation_factor(fit, fit.m_bar + dm);
      const double down = mos_inflation_factor(fit, fit.m_bar - dm);
      CHECK(up > prev);
      CHECK_THAT(up, WithinRel(down, 1e-12));
      CHECK(mos_predict_t(fit, fit.m_bar + dm).sigma2() > mos_predict_t(fit, fit.m_bar + dm - 0.1).sigma2());
      prev = up;
    }
  }
  const MosFit huge{0.0, 1.0, 1.0, 10'000'000, 0.0, 1e7};
  CHECK_THAT(mos_inflation_factor(huge, 0.0), WithinAbs(1.0, 1e-6));
}

TEST_CASE("t and plug-in forecasts share their location", "[mos][predict][property]") {
  RandomStream rng(21);
  const auto fit = fit_mos(simulate(rng, 25, 1, 2, 0.5));
  for (double m = -3; m <= 3; m += 0.5) {
    CHECK(mos_predict_t(fit, m).mu() == mos_predict_plugin(fit, m).mu());
    CHECK(mos_predict_t(fit, m).sigma2() > mos_predict_plugin(fit, m).sigma2());
  }
}

TEST_CASE("held-out PIT: t calibrated, plug-in overconfident", "[mos][calibration][property]") {
  RandomStream rng(20240601);
  std::normal_distribution<double> z;
  std::vector<double> pit_t, pit_plugin;
  for (int rep = 0; rep < 10'000; ++rep) {
    const auto fit = fit_mos(simulate(rng, 20, 0.0, 1.0, 1.0));
    const double m = z(rng);
    const double y = m + z(rng);
    pit_t.push_back(pit(mos_predict_t(fit, m), y));
    pit_plugin.push_back(pit(mos_predict_plugin(fit, m), y));
  }
  CHECK(oracle::ks_uniform_pvalue(pit_t) > 0.01);
  CHECK(oracle::ks_uniform_pvalue(pit_plugin) < 0.01);

  auto outer = [](const std::vector<double>& u) {
    return static_cast<double>(std::count_if(u.begin(), u.end(), [](double p) { return p <= 0.05 || p > 0.95; })) /
           static_cast<double>(u.size());
  };
  CHECK(outer(pit_plugin) > 0.11);
  CHECK(std::abs(outer(pit_t) - 0.10) < 0.01);
}
