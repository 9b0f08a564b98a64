#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "unl/measures.hpp"
#include "unl/numerics.hpp"
#include "unl/rng.hpp"

namespace unl {

/// Hyperparameters of the truncated Dirichlet-process mixture of normals.
/// Atoms are centred on N(a_mu, b2_mu) x IG(a_sig, b_sig) on the
/// standardized outcome scale.
struct DpmHyper {
  double a_mu = 0.0;
  double b2_mu = 10.0;
  double a_sig = 2.0;
  double b_sig = 0.5;
  double alpha = 1.0;
  std::size_t L = 20;

  /// Throws std::invalid_argument naming the field. The library accepts a
  /// single component (useful as a parametric baseline); configuration
  /// files ask for min_components = 2.
  void validate(std::size_t min_components = 1) const;
};

/// One posterior draw of the mixture: weights, means and variances.
struct MixtureDraw {
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> variances;

  std::size_t components() const { return weights.size(); }
  /// Throws unless lengths agree, weights are a probability vector within
  /// 1e-12 and variances are positive.
  void validate() const;
  bool operator==(const MixtureDraw&) const = default;
};

double mixture_pdf(const MixtureDraw& draw, double y);
double mixture_cdf(const MixtureDraw& draw, double y);
/// Mixture density on every grid point. Components with weight below 1e-13
/// and points more than 38 sd from a component mean are skipped; both
/// contribute less than 1e-300 relative to the retained terms.
std::vector<double> mixture_pdf_values(const MixtureDraw& draw, const EvaluationGrid& grid);
std::vector<double> mixture_cdf_values(const MixtureDraw& draw, const EvaluationGrid& grid);

/// Sampler state on the standardized scale. Allocations are zero-based.
struct DpmState {
  std::vector<std::size_t> allocations;
  std::vector<double> sticks;
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> variances;

  std::vector<std::size_t> counts() const;
};

/// omega_1 = v_1, omega_l = v_l prod_{m<l} (1 - v_m).
std::vector<double> stick_weights(std::span<const double> sticks);

/// Uniform allocations, sticks at the prior mean 1/(1+alpha) (last stick 1),
/// atoms drawn from the centring distribution.
DpmState initial_state(std::size_t n, const DpmHyper& hyper, RngStream& rng);

/// Log of omega_l phi(y | mu_l, sigma2_l) for every component, unnormalized.
std::vector<double> allocation_log_weights(const DpmState& state, double y);

void update_allocations(DpmState& state, std::span<const double> y, RngStream& rng);
void update_sticks(DpmState& state, double alpha, RngStream& rng);
void update_atoms(DpmState& state, std::span<const double> y, const DpmHyper& hyper, RngStream& rng);
/// One full sweep: allocations, sticks, atoms.
void gibbs_sweep(DpmState& state, std::span<const double> y, const DpmHyper& hyper, RngStream& rng);

/// Blocked Gibbs sampler. Outcomes are standardized with their own mean and
/// sd before fitting and every saved draw is mapped back to the original
/// scale (mu * s + m, sigma2 * s^2).
std::vector<MixtureDraw> fit_dpm(std::span<const double> y, const DpmHyper& hyper, std::size_t n_burn,
                                 std::size_t n_save, RngStream& rng);

struct DrawDensityOptions {
  /// Throw when the gridded mixture does not integrate to one within
  /// norm_tolerance. Off by default: a posterior draw may legitimately put
  /// a little mass on empty components far from the data.
  bool strict = false;
  double norm_tolerance = kDefaultNormTolerance;
};

/// The draw's mixture density on the grid, with an exact evaluator attached.
GriddedDensity density_from_draw(const MixtureDraw& draw, const EvaluationGrid& grid,
                                 const DrawDensityOptions& options = {});

}  // namespace unl
