#include "unl/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace unl {

namespace {

void apply_policy(std::size_t failures, const EnsembleOptions& options, const char* what) {
  if (failures > 0 && options.policy == NormPolicy::strict) {
    throw std::domain_error(std::string(what) + ": " + std::to_string(failures) +
                            " draw(s) do not integrate to one on the grid; widen the grid");
  }
}

double autocovariance(std::span<const double> x, double mean, std::size_t lag) {
  double acc = 0.0;
  for (std::size_t i = 0; i + lag < x.size(); ++i) acc += (x[i] - mean) * (x[i + lag] - mean);
  return acc / static_cast<double>(x.size());
}

struct Moments {
  double m2, m3, m4;
};

Moments central_moments(std::span<const double> x) {
  if (x.size() < 3) throw std::invalid_argument("statistic: need at least three values");
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  Moments m{0.0, 0.0, 0.0};
  for (double v : x) {
    const double d = v - mean;
    m.m2 += d * d;
    m.m3 += d * d * d;
    m.m4 += d * d * d * d;
  }
  m.m2 /= n;
  m.m3 /= n;
  m.m4 /= n;
  if (!(m.m2 > 0.0)) throw std::invalid_argument("statistic: zero variance");
  return m;
}

}  // namespace

void ScalarEnsemble::validate() const {
  if (draws.size() < 2) throw std::invalid_argument("ensemble '" + label + "' needs at least two draws");
  for (double v : draws) {
    if (!std::isfinite(v)) throw std::invalid_argument("ensemble '" + label + "' has a non-finite draw");
  }
}

std::vector<double> CurveEnsemble::column(std::size_t j) const {
  std::vector<double> out(n_draws);
  for (std::size_t s = 0; s < n_draws; ++s) out[s] = at(s, j);
  return out;
}

void CurveEnsemble::validate() const {
  if (values.size() != n_draws * x.size()) throw std::invalid_argument("curve ensemble: inconsistent dimensions");
  if (n_draws < 2) throw std::invalid_argument("curve ensemble: needs at least two draws");
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("curve ensemble: non-finite value");
  }
}

ScalarEnsemble unl_ensemble(const std::vector<MixtureDraw>& d1, const std::vector<MixtureDraw>& d2,
                            const std::vector<MixtureDraw>& d3, const EvaluationGrid& grid,
                            const EnsembleOptions& options) {
  auto r = kernels::unl_per_draw(d1, d2, d3, grid, options.norm_tolerance, options.exec);
  apply_policy(r.norm_failures, options, "unl_ensemble");
  return {"UNL", std::move(r.values), options.policy == NormPolicy::ignore ? 0 : r.norm_failures};
}

ScalarEnsemble yi3_ensemble(const std::vector<MixtureDraw>& d1, const std::vector<MixtureDraw>& d2,
                            const std::vector<MixtureDraw>& d3, const EvaluationGrid& grid,
                            const EnsembleOptions& options) {
  return {"YI3", kernels::yi3_per_draw(d1, d2, d3, grid, options.exec), 0};
}

CurveEnsemble covariate_unl_ensemble(const FitResult& f1, const FitResult& f2, const FitResult& f3,
                                     const std::vector<CovariateRecord>& x, const EvaluationGrid& grid,
                                     const EnsembleOptions& options) {
  if (x.empty()) throw std::invalid_argument("covariate_unl_ensemble: empty covariate grid");
  const auto r1 = kernels::rows_for(f1, x);
  const auto r2 = kernels::rows_for(f2, x);
  const auto r3 = kernels::rows_for(f3, x);
  auto r = kernels::covariate_unl(r1, r2, r3, grid, options.norm_tolerance, options.exec);
  apply_policy(r.norm_failures, options, "covariate_unl_ensemble");
  return {x, f1.draws.size(), std::move(r.values), options.policy == NormPolicy::ignore ? 0 : r.norm_failures};
}

double quantile(std::span<const double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile: empty input");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile: p must lie in [0, 1]");
  std::vector<double> v(values.begin(), values.end());
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  std::nth_element(v.begin(), v.begin() + static_cast<long>(lo), v.end());
  const double a = v[lo];
  const double b = hi == lo ? a : *std::min_element(v.begin() + static_cast<long>(lo) + 1, v.end());
  return a + (pos - static_cast<double>(lo)) * (b - a);
}

Summary summarize(std::span<const double> draws, double level) {
  if (draws.size() < 2) throw std::invalid_argument("summarize: need at least two draws");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("summarize: level must lie in (0, 1)");
  const double alpha = 1.0 - level;
  Summary s;
  s.median = quantile(draws, 0.5);
  s.lower = quantile(draws, 0.5 * alpha);
  s.upper = quantile(draws, 1.0 - 0.5 * alpha);
  s.mean = std::accumulate(draws.begin(), draws.end(), 0.0) / static_cast<double>(draws.size());
  return s;
}

std::vector<Summary> summarize(const CurveEnsemble& e, double level) {
  e.validate();
  std::vector<Summary> out;
  for (std::size_t j = 0; j < e.x.size(); ++j) out.push_back(summarize(e.column(j), level));
  return out;
}

double compare_prob(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) throw std::invalid_argument("compare_prob: ensembles must have equal nonzero length");
  std::size_t wins = 0;
  for (std::size_t s = 0; s < a.size(); ++s) wins += a[s] > b[s] ? 1 : 0;
  return static_cast<double>(wins) / static_cast<double>(a.size());
}

double spectral_zero(std::span<const double> chain) {
  const std::size_t n = chain.size();
  if (n < 4) throw std::invalid_argument("spectral_zero: chain too short");
  const double mean = std::accumulate(chain.begin(), chain.end(), 0.0) / static_cast<double>(n);
  const double g0 = autocovariance(chain, mean, 0);
  if (!(g0 > 0.0)) throw std::invalid_argument("chain has zero variance");
  double sum = 0.0;
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    const double pair = (k == 0 ? g0 : autocovariance(chain, mean, 2 * k)) + autocovariance(chain, mean, 2 * k + 1);
    if (!(pair > 0.0)) break;
    sum += pair;
  }
  // S(0) = gamma_0 + 2 sum_{t>=1} gamma_t = -gamma_0 + 2 sum_k Gamma_k.
  const double s0 = -g0 + 2.0 * sum;
  // Antithetic chains can give a tiny or negative estimate; cap ESS at n log10 n.
  const double floor_ = g0 / std::log10(static_cast<double>(n));
  return std::max(s0, floor_);
}

double ess(std::span<const double> chain) {
  if (chain.size() < 100) throw std::invalid_argument("ess: chain must have at least 100 values");
  const double n = static_cast<double>(chain.size());
  const double mean = std::accumulate(chain.begin(), chain.end(), 0.0) / n;
  return n * autocovariance(chain, mean, 0) / spectral_zero(chain);
}

double geweke(std::span<const double> chain) {
  if (chain.size() < 100) throw std::invalid_argument("geweke: chain must have at least 100 values");
  const std::size_t n = chain.size();
  const auto first = chain.first(n / 10);
  const auto last = chain.last(n / 2);
  const auto mean = [](std::span<const double> x) {
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  };
  const auto var_of_mean = [](std::span<const double> x) {
    double mu = 0.0;
    for (double v : x) mu += v;
    mu /= static_cast<double>(x.size());
    // A constant segment has no sampling variability of its own.
    double ss = 0.0;
    for (double v : x) ss += (v - mu) * (v - mu);
    if (ss == 0.0) return 0.0;
    return spectral_zero(x) / static_cast<double>(x.size());
  };
  const double v = var_of_mean(first) + var_of_mean(last);
  if (!(v > 0.0)) throw std::invalid_argument("geweke: chain has zero variance");
  return (mean(first) - mean(last)) / std::sqrt(v);
}

double skewness(std::span<const double> x) {
  const auto m = central_moments(x);
  return m.m3 / std::pow(m.m2, 1.5);
}

double kurtosis(std::span<const double> x) {
  const auto m = central_moments(x);
  return m.m4 / (m.m2 * m.m2);
}

double statistic(std::span<const double> x, Statistic stat) {
  return stat == Statistic::skewness ? skewness(x) : kurtosis(x);
}

double sample_mixture(const MixtureDraw& draw, RngStream& rng) {
  double u = rng.uniform();
  std::size_t l = 0;
  for (; l + 1 < draw.components(); ++l) {
    if (u < draw.weights[l]) break;
    u -= draw.weights[l];
  }
  return rng.normal(draw.means[l], std::sqrt(draw.variances[l]));
}

PredictiveCheck posterior_predictive_stats(const std::vector<MixtureDraw>& draws, std::span<const double> y,
                                           Statistic stat, std::size_t n_rep, RngStream& rng) {
  if (draws.empty()) throw std::invalid_argument("posterior_predictive_stats: no draws");
  if (n_rep < 1) throw std::invalid_argument("posterior_predictive_stats: n_rep must be positive");
  PredictiveCheck out;
  out.observed = statistic(y, stat);
  std::vector<double> rep(y.size());
  for (std::size_t r = 0; r < n_rep; ++r) {
    const auto& d = draws[r * draws.size() / n_rep];
    for (auto& v : rep) v = sample_mixture(d, rng);
    out.replicates.push_back(statistic(rep, stat));
  }
  return out;
}

PredictiveCheck posterior_predictive_stats(const FitResult& fit, const GroupDataset& data, Statistic stat,
                                           std::size_t n_rep, RngStream& rng) {
  if (fit.draws.empty()) throw std::invalid_argument("posterior_predictive_stats: no draws");
  if (n_rep < 1) throw std::invalid_argument("posterior_predictive_stats: n_rep must be positive");
  const std::size_t n = data.size();
  std::vector<Eigen::VectorXd> z(n), u(n);
  for (std::size_t i = 0; i < n; ++i) std::tie(z[i], u[i]) = fit.rows(data.record(i));
  PredictiveCheck out;
  out.observed = statistic(data.outcomes, stat);
  std::vector<double> rep(n);
  for (std::size_t r = 0; r < n_rep; ++r) {
    const std::size_t s = r * fit.draws.size() / n_rep;
    for (std::size_t i = 0; i < n; ++i) rep[i] = sample_mixture(fit.conditional(s, z[i], u[i]), rng);
    out.replicates.push_back(statistic(rep, stat));
  }
  return out;
}

}  // namespace unl
