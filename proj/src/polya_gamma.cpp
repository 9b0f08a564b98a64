#include "unl/polya_gamma.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "unl/numerics.hpp"

namespace unl {

namespace {

constexpr double kTrunc = 0.64;
constexpr int kMaxTerms = 200;

// n-th coefficient of the alternating series for the Jacobi J*(1, 0) density,
// split at the truncation point.
double series_term(int n, double x) {
  const double k = n + 0.5;
  double log_a;
  if (x <= kTrunc) {
    log_a = std::log(std::numbers::pi * k) + 1.5 * std::log(2.0 / (std::numbers::pi * x)) - 2.0 * k * k / x;
  } else {
    log_a = std::log(std::numbers::pi * k) - 0.5 * k * k * std::numbers::pi * std::numbers::pi * x;
  }
  return std::exp(log_a);
}

// Inverse-Gaussian IG(1/z, 1) restricted to (0, kTrunc].
double truncated_inverse_gaussian(double z, RngStream& rng) {
  if (z == 0.0 || 1.0 / z > kTrunc) {
    // Levy-type proposal accepted with probability exp(-z^2 x / 2).
    for (;;) {
      double e1, e2;
      do {
        e1 = rng.exponential();
        e2 = rng.exponential();
      } while (e1 * e1 > 2.0 * e2 / kTrunc);
      const double x = kTrunc / ((1.0 + kTrunc * e1) * (1.0 + kTrunc * e1));
      if (rng.uniform() <= std::exp(-0.5 * z * z * x)) return x;
    }
  }
  const double mu = 1.0 / z;
  for (;;) {
    const double y = rng.normal();
    const double yy = y * y;
    double x = mu + 0.5 * mu * mu * yy - 0.5 * mu * std::sqrt(4.0 * mu * yy + (mu * yy) * (mu * yy));
    if (rng.uniform() > mu / (mu + x)) x = mu * mu / x;
    if (x <= kTrunc) return x;
  }
}

// log of the mixture mass assigned to the inverse-Gaussian piece.
double log_ig_mass(double z) {
  const double root_t = std::sqrt(kTrunc);
  if (z == 0.0) return std::log(2.0) + std::log(2.0) + log_std_normal_cdf(-1.0 / root_t);
  const double lb = -z + log_std_normal_cdf((kTrunc * z - 1.0) / root_t);
  const double la = z + log_std_normal_cdf(-(kTrunc * z + 1.0) / root_t);
  const double top = std::max(la, lb);
  return std::log(2.0) + top + std::log(std::exp(la - top) + std::exp(lb - top));
}

}  // namespace

double sample_pg1(double c, RngStream& rng) {
  if (!std::isfinite(c)) throw std::invalid_argument("sample_pg1: c must be finite");
  const double z = 0.5 * std::abs(c);
  const double k = std::numbers::pi * std::numbers::pi / 8.0 + 0.5 * z * z;
  const double log_p = std::log(std::numbers::pi / (2.0 * k)) - k * kTrunc;
  const double log_q = log_ig_mass(z);
  const double prob_exp = 1.0 / (1.0 + std::exp(log_q - log_p));

  for (;;) {
    const double x = rng.uniform() < prob_exp ? kTrunc + rng.exponential() / k : truncated_inverse_gaussian(z, rng);
    double s = series_term(0, x);
    const double y = rng.uniform() * s;
    for (int n = 1;; ++n) {
      if (n > kMaxTerms) throw std::runtime_error("sample_pg1: alternating series did not settle");
      if (n % 2 == 1) {
        s -= series_term(n, x);
        if (y <= s) return 0.25 * x;
      } else {
        s += series_term(n, x);
        if (y > s) break;
      }
    }
  }
}

double pg1_mean(double c) {
  if (std::abs(c) < 1e-6) return 0.25 - c * c / 96.0;
  return std::tanh(0.5 * c) / (2.0 * c);
}

}  // namespace unl
