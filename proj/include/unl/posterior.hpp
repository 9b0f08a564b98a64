#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "unl/dataset.hpp"
#include "unl/dpm.hpp"
#include "unl/kernels.hpp"
#include "unl/lsbp.hpp"
#include "unl/numerics.hpp"
#include "unl/rng.hpp"

namespace unl {

/// Posterior draws of a scalar functional.
struct ScalarEnsemble {
  std::string label;
  std::vector<double> draws;
  /// Number of draws whose gridded densities missed the normalization
  /// tolerance (counted, not fatal, under NormPolicy::report).
  std::size_t norm_failures = 0;

  /// Throws unless there are at least two draws and all are finite.
  void validate() const;
};

/// Posterior draws of a functional over a grid of covariate values.
struct CurveEnsemble {
  std::vector<CovariateRecord> x;
  std::size_t n_draws = 0;
  std::vector<double> values;  // row-major n_draws x x.size()
  std::size_t norm_failures = 0;

  double at(std::size_t s, std::size_t j) const { return values[s * x.size() + j]; }
  std::vector<double> column(std::size_t j) const;
  void validate() const;
};

enum class NormPolicy { ignore, report, strict };

struct EnsembleOptions {
  double norm_tolerance = kDefaultNormTolerance;
  NormPolicy policy = NormPolicy::report;
  kernels::Exec exec = kernels::Exec::parallel;
};

ScalarEnsemble unl_ensemble(const std::vector<MixtureDraw>& d1, const std::vector<MixtureDraw>& d2,
                            const std::vector<MixtureDraw>& d3, const EvaluationGrid& grid,
                            const EnsembleOptions& options = {});
ScalarEnsemble yi3_ensemble(const std::vector<MixtureDraw>& d1, const std::vector<MixtureDraw>& d2,
                            const std::vector<MixtureDraw>& d3, const EvaluationGrid& grid,
                            const EnsembleOptions& options = {});
CurveEnsemble covariate_unl_ensemble(const FitResult& f1, const FitResult& f2, const FitResult& f3,
                                     const std::vector<CovariateRecord>& x, const EvaluationGrid& grid,
                                     const EnsembleOptions& options = {});

/// Linear interpolation between order statistics (type 7): position p (n-1).
double quantile(std::span<const double> values, double p);

struct Summary {
  double median = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double mean = 0.0;
};

/// Median and the central `level` interval.
Summary summarize(std::span<const double> draws, double level = 0.95);
inline Summary summarize(const ScalarEnsemble& e, double level = 0.95) { return summarize(e.draws, level); }
std::vector<Summary> summarize(const CurveEnsemble& e, double level = 0.95);

/// Fraction of draw indices s with a_s > b_s (strict).
double compare_prob(std::span<const double> a, std::span<const double> b);
inline double compare_prob(const ScalarEnsemble& a, const ScalarEnsemble& b) { return compare_prob(a.draws, b.draws); }

/// Spectral density at frequency zero from Geyer's initial positive sequence.
double spectral_zero(std::span<const double> chain);
/// Effective sample size n * gamma_0 / S(0).
double ess(std::span<const double> chain);
/// Geweke z: first 10% vs last 50% means, each variance from spectral_zero.
double geweke(std::span<const double> chain);

enum class Statistic { skewness, kurtosis };

/// Sample skewness m3 / m2^1.5.
double skewness(std::span<const double> x);
/// Sample kurtosis m4 / m2^2 (3 for a normal population).
double kurtosis(std::span<const double> x);
double statistic(std::span<const double> x, Statistic stat);

struct PredictiveCheck {
  std::vector<double> replicates;
  double observed = 0.0;
};

/// n_rep datasets of the observed size, replicate r drawn from the saved
/// draw with index floor(r S / n_rep).
PredictiveCheck posterior_predictive_stats(const std::vector<MixtureDraw>& draws, std::span<const double> y,
                                           Statistic stat, std::size_t n_rep, RngStream& rng);
/// Conditional version: each replicate resamples at the observed covariates.
PredictiveCheck posterior_predictive_stats(const FitResult& fit, const GroupDataset& data, Statistic stat,
                                           std::size_t n_rep, RngStream& rng);

/// One draw from a normal mixture.
double sample_mixture(const MixtureDraw& draw, RngStream& rng);

}  // namespace unl
