#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "unl/dataset.hpp"
#include "unl/dpm.hpp"
#include "unl/measures.hpp"
#include "unl/rng.hpp"
#include "unl/splines.hpp"

namespace unl {

/// Priors for the logit stick-breaking mixture. Unset means default to zero
/// and unset covariances to prior_variance * I of whatever dimension the
/// effect specification produces.
struct LsbpHyper {
  std::optional<Eigen::VectorXd> gamma_mean;
  std::optional<Eigen::MatrixXd> gamma_cov;
  std::optional<Eigen::VectorXd> beta_mean;
  std::optional<Eigen::MatrixXd> beta_cov;
  double prior_variance = 10.0;
  double a_sig = 2.0;
  double b_sig = 0.5;
  std::size_t L = 20;

  /// Throws std::invalid_argument naming the field. Explicit means and
  /// covariances must match the design dimensions and covariances must be
  /// symmetric positive definite.
  void validate(std::size_t q_weights, std::size_t q_means, std::size_t min_components = 1) const;
};

/// One posterior draw on the standardized outcome scale: L-1 weight
/// coefficient vectors, L mean coefficient vectors and L variances.
struct ConditionalMixtureDraw {
  std::vector<Eigen::VectorXd> gamma;
  std::vector<Eigen::VectorXd> beta;
  std::vector<double> variances;

  std::size_t components() const { return variances.size(); }
  /// Weights omega_l(x) for a weights design row z; sum to one with v_L = 1.
  std::vector<double> weights(const Eigen::VectorXd& z) const;
};

/// Log of the logit stick-breaking weights for linear predictors eta_l,
/// l < L, computed stably; the last stick is 1.
std::vector<double> log_stick_weights(std::span<const double> eta, std::size_t L);

/// One Polya-gamma Gibbs update of a logistic-regression coefficient vector.
/// label[i] is 1 (success), 0 (failure) or -1 (row not in the risk set).
/// Draws zeta_i ~ PG(1, z_i' gamma) for included rows, then gamma from its
/// Gaussian full conditional with precision Z' diag(zeta) Z + prior_precision
/// and mean solving that precision against Z' (label - 1/2) + prior_shift.
Eigen::VectorXd pg_logistic_update(const Eigen::MatrixXd& Z, std::span<const signed char> label,
                                   const Eigen::VectorXd& gamma, const Eigen::MatrixXd& prior_precision,
                                   const Eigen::VectorXd& prior_shift, RngStream& rng);

struct WaicResult {
  double waic = 0.0;
  double lppd = 0.0;
  double p_waic = 0.0;
  std::vector<double> pointwise_lppd;
  std::vector<double> pointwise_p_waic;
};

struct FitResult {
  std::shared_ptr<const DesignMap> design;
  double y_mean = 0.0;  // outcome standardization record
  double y_sd = 1.0;
  std::vector<ConditionalMixtureDraw> draws;
  WaicResult waic;

  /// Design rows (weights, means) for a covariate record.
  std::pair<Eigen::VectorXd, Eigen::VectorXd> rows(const CovariateRecord& x) const;
  /// Draw s as an ordinary mixture on the original outcome scale at x.
  MixtureDraw conditional(std::size_t s, const CovariateRecord& x) const;
  MixtureDraw conditional(std::size_t s, const Eigen::VectorXd& z, const Eigen::VectorXd& u) const;
};

struct McmcLength {
  std::size_t n_burn = 2000;
  std::size_t n_save = 5000;
};

/// Gibbs sampler with Polya-gamma augmentation for the weight regressions.
/// Outcomes are standardized per group and continuous covariates through
/// the DesignMap. WAIC is accumulated while sampling.
FitResult fit_lsbp(const GroupDataset& data, const EffectSpec& spec, const LsbpHyper& hyper,
                   const McmcLength& length, RngStream& rng);

/// WAIC recomputed from stored draws: -2 (lppd - p_waic) with the
/// variance form of p_waic, on the original outcome scale.
WaicResult waic(const FitResult& fit, const GroupDataset& data);

GriddedDensity conditional_density_from_draw(const FitResult& fit, std::size_t s, const CovariateRecord& x,
                                             const EvaluationGrid& grid, const DrawDensityOptions& options = {});

/// Linear, then for K = 0..4 a B-spline on the means followed by a B-spline
/// on the weights, for one continuous covariate.
std::vector<EffectSpec> default_candidates(const std::string& covariate, std::size_t max_knots = 4);

struct SelectionResult {
  std::size_t chosen = 0;
  std::vector<EffectSpec> candidates;
  std::vector<double> waic;  // NaN for a candidate whose fit failed
  const EffectSpec& spec() const { return candidates[chosen]; }
};

/// Fits every candidate (in parallel, candidate k on stream stream_base + k)
/// and returns the first one in the given order whose WAIC is within
/// `margin` of the best. Candidates must be listed simplest first.
SelectionResult select_design(const GroupDataset& data, const std::vector<EffectSpec>& candidates,
                              const LsbpHyper& hyper, const McmcLength& length, std::uint64_t seed,
                              std::uint64_t stream_base, double margin = 5.0);

}  // namespace unl
