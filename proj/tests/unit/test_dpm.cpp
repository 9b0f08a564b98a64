#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "unl/dpm.hpp"
#include "unl/posterior.hpp"

namespace {

using namespace unl;

DpmState fixed_state() {
  DpmState s;
  s.allocations = {0, 0, 1, 2, 2, 2};
  s.sticks = {0.3, 0.5, 1.0};
  s.weights = stick_weights(s.sticks);
  s.means = {-1.0, 0.5, 2.0};
  s.variances = {0.5, 1.0, 2.0};
  return s;
}

TEST(Dpm, StickWeightsSumToOne) {
  const auto w = stick_weights(std::vector<double>{0.3, 0.5, 1.0});
  EXPECT_DOUBLE_EQ(w[0], 0.3);
  EXPECT_DOUBLE_EQ(w[1], 0.35);
  EXPECT_DOUBLE_EQ(w[2], 0.35);
}

TEST(Dpm, AllocationProbabilitiesMatchDirectFormula) {
  const auto s = fixed_state();
  const double y = 0.7;
  const auto lw = allocation_log_weights(s, y);
  double total = 0.0, direct_total = 0.0;
  std::vector<double> direct(3);
  for (int l = 0; l < 3; ++l) {
    direct[l] = s.weights[l] * normal_pdf(y, s.means[l], std::sqrt(s.variances[l]));
    direct_total += direct[l];
    total += std::exp(lw[l]);
  }
  for (int l = 0; l < 3; ++l) EXPECT_NEAR(std::exp(lw[l]) / total, direct[l] / direct_total, 1e-14);
}

TEST(Dpm, StickUpdateHasBetaMeans) {
  const auto base = fixed_state();
  const double alpha = 1.5;
  RngStream rng(31, 0);
  const int n = 100000;
  std::vector<double> sum(2, 0.0);
  for (int i = 0; i < n; ++i) {
    auto s = base;
    update_sticks(s, alpha, rng);
    ASSERT_EQ(s.sticks.back(), 1.0);
    ASSERT_NEAR(std::accumulate(s.weights.begin(), s.weights.end(), 0.0), 1.0, 1e-12);
    sum[0] += s.sticks[0];
    sum[1] += s.sticks[1];
  }
  // counts (2, 1, 3): v1 ~ Beta(3, alpha + 4), v2 ~ Beta(2, alpha + 3)
  const double a1 = 3.0, b1 = alpha + 4.0, a2 = 2.0, b2 = alpha + 3.0;
  auto sd = [](double a, double b) { return std::sqrt(a * b / ((a + b) * (a + b) * (a + b + 1.0))); };
  EXPECT_NEAR(sum[0] / n, a1 / (a1 + b1), 4.0 * sd(a1, b1) / std::sqrt(n));
  EXPECT_NEAR(sum[1] / n, a2 / (a2 + b2), 4.0 * sd(a2, b2) / std::sqrt(n));
}

TEST(Dpm, AtomMeanUpdateIsConjugate) {
  const auto base = fixed_state();
  const std::vector<double> y{-1.2, -0.8, 0.4, 1.5, 2.5, 3.0};
  DpmHyper h;
  h.a_mu = 0.2;
  h.b2_mu = 4.0;
  RngStream rng(32, 0);
  const int n = 100000;
  double sum0 = 0.0;
  for (int i = 0; i < n; ++i) {
    auto s = base;
    update_atoms(s, y, h, rng);
    sum0 += s.means[0];
  }
  const double prec = 1.0 / 4.0 + 2.0 / 0.5;
  const double mean = (0.2 / 4.0 + (-2.0) / 0.5) / prec;
  EXPECT_NEAR(sum0 / n, mean, 4.0 * std::sqrt(1.0 / prec / n));
}

TEST(Dpm, TailWeightCalibration) {
  const double alpha = 1.0;
  const std::size_t L = 20;
  RngStream rng(33, 0);
  const int n = 1000000;
  double s = 0.0, ss = 0.0;
  for (int i = 0; i < n; ++i) {
    double rest = 1.0;
    for (std::size_t l = 0; l < L; ++l) rest *= 1.0 - rng.beta(1.0, alpha);
    s += rest;
    ss += rest * rest;
  }
  const double mean = s / n, se = std::sqrt((ss / n - mean * mean) / n);
  EXPECT_NEAR(mean, std::pow(alpha / (alpha + 1.0), static_cast<double>(L)), 3.0 * se);
  EXPECT_NEAR(std::pow(0.5, 20.0), 9.54e-7, 1e-9);
}

TEST(Dpm, RecoversStandardNormalDensity) {
  RngStream data_rng(34, 0);
  std::vector<double> y(400);
  for (double& v : y) v = data_rng.normal();
  RngStream rng(34, 1);
  const auto draws = fit_dpm(y, DpmHyper{}, 500, 1000, rng);
  ASSERT_EQ(draws.size(), 1000u);
  std::vector<double> at0;
  for (const auto& d : draws) {
    d.validate();
    at0.push_back(mixture_pdf(d, 0.0));
  }
  EXPECT_NEAR(summarize(at0).median, 0.3989, 0.05);
}

TEST(Dpm, SavedWeightsFormSimplex) {
  RngStream data_rng(35, 0);
  std::vector<double> y(100);
  for (double& v : y) v = data_rng.gamma(2.0, 1.0);
  RngStream rng(35, 1);
  for (const auto& d : fit_dpm(y, DpmHyper{}, 50, 200, rng)) {
    ASSERT_EQ(d.components(), 20u);
    double total = 0.0;
    for (double w : d.weights) {
      ASSERT_GE(w, 0.0);
      total += w;
    }
    ASSERT_NEAR(total, 1.0, 1e-12);
    for (double v : d.variances) ASSERT_GT(v, 0.0);
  }
}

TEST(Dpm, SeededFitIsDeterministic) {
  std::vector<double> y;
  for (int i = 0; i < 50; ++i) y.push_back(std::sin(i) + 0.01 * i);
  RngStream a(36, 2), b(36, 2);
  EXPECT_EQ(fit_dpm(y, DpmHyper{}, 20, 30, a), fit_dpm(y, DpmHyper{}, 20, 30, b));
}

TEST(Dpm, RejectsDegenerateInput) {
  RngStream rng(1, 0);
  EXPECT_THROW(fit_dpm(std::vector<double>(5, 1.0), DpmHyper{}, 10, 10, rng), std::invalid_argument);
  EXPECT_THROW(fit_dpm(std::vector<double>(20, 1.0), DpmHyper{}, 10, 10, rng), std::invalid_argument);
  DpmHyper bad;
  bad.alpha = 0.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = DpmHyper{};
  bad.L = 1;
  EXPECT_NO_THROW(bad.validate());
  EXPECT_THROW(bad.validate(2), std::invalid_argument);
}

// With one component the model is y ~ N(mu, s2), mu ~ N(a, b2),
// s2 ~ IG(a_sig, b_sig) on the standardized scale; the oracle integrates s2
// out analytically and mu by quadrature.
TEST(Dpm, SingleComponentMatchesSemiConjugateOracle) {
  RngStream data_rng(37, 0);
  std::vector<double> y(25);
  for (double& v : y) v = 3.0 + 2.0 * data_rng.normal();
  DpmHyper h;
  h.L = 1;
  RngStream rng(37, 1);
  const auto draws = fit_dpm(y, h, 1000, 40000, rng);
  std::vector<double> mu, s2;
  for (const auto& d : draws) {
    mu.push_back(d.means[0]);
    s2.push_back(d.variances[0]);
  }
  const auto oracle = testing_oracles::normal_semi_conjugate(y, h);
  auto check = [](std::span<const double> chain, double target) {
    const double mean = std::accumulate(chain.begin(), chain.end(), 0.0) / chain.size();
    double var = 0.0;
    for (double v : chain) var += (v - mean) * (v - mean);
    var /= chain.size() - 1.0;
    EXPECT_NEAR(mean, target, 3.0 * std::sqrt(var / ess(chain)));
  };
  check(mu, oracle.mean_mu);
  check(s2, oracle.mean_sigma2);
}

TEST(Dpm, DensityFromDrawHasEvaluator) {
  const MixtureDraw d{{0.4, 0.6}, {0.0, 3.0}, {1.0, 0.25}};
  const auto g = make_grid(-8.0, 8.0, 801);
  const auto f = density_from_draw(d, g);
  ASSERT_TRUE(f.evaluator);
  EXPECT_NEAR(f.evaluator(1.234), mixture_pdf(d, 1.234), 1e-15);
  EXPECT_NEAR(simpson(f.values, g.spacing()), 1.0, 1e-10);
  EXPECT_NEAR(mixture_cdf(d, 3.0), 0.4 * std_normal_cdf(3.0) + 0.3, 1e-15);
  const auto F = mixture_cdf_values(d, g);
  EXPECT_NEAR(F[400], mixture_cdf(d, 0.0), 1e-15);
  const auto narrow = make_grid(-1.0, 1.0, 101);
  DrawDensityOptions strict;
  strict.strict = true;
  EXPECT_THROW(density_from_draw(d, narrow, strict), std::domain_error);
  EXPECT_NO_THROW(density_from_draw(d, narrow));
}

}  // namespace
