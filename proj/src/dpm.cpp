#include "unl/dpm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace unl {

namespace {

constexpr double kNegligibleWeight = 1e-13;
constexpr double kReachInSd = 38.0;

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument(std::string("dpm: ") + name + " must be positive and finite");
  }
}

}  // namespace

void DpmHyper::validate(std::size_t min_components) const {
  if (!std::isfinite(a_mu)) throw std::invalid_argument("dpm: a_mu must be finite");
  require_positive(b2_mu, "b2_mu");
  require_positive(a_sig, "a_sig");
  require_positive(b_sig, "b_sig");
  require_positive(alpha, "alpha");
  if (L < min_components) {
    throw std::invalid_argument("dpm: L must be at least " + std::to_string(min_components));
  }
}

void MixtureDraw::validate() const {
  if (weights.empty() || means.size() != weights.size() || variances.size() != weights.size()) {
    throw std::invalid_argument("mixture draw: weights, means and variances must have equal nonzero length");
  }
  double total = 0.0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (!(weights[l] >= 0.0)) throw std::invalid_argument("mixture draw: negative weight");
    if (!(variances[l] > 0.0) || !std::isfinite(variances[l])) {
      throw std::invalid_argument("mixture draw: variances must be positive");
    }
    if (!std::isfinite(means[l])) throw std::invalid_argument("mixture draw: non-finite mean");
    total += weights[l];
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("mixture draw: weights do not sum to one");
}

double mixture_pdf(const MixtureDraw& draw, double y) {
  double total = 0.0;
  for (std::size_t l = 0; l < draw.weights.size(); ++l) {
    if (draw.weights[l] < kNegligibleWeight) continue;
    total += draw.weights[l] * normal_pdf(y, draw.means[l], std::sqrt(draw.variances[l]));
  }
  return total;
}

double mixture_cdf(const MixtureDraw& draw, double y) {
  double total = 0.0;
  for (std::size_t l = 0; l < draw.weights.size(); ++l) {
    total += draw.weights[l] * std_normal_cdf((y - draw.means[l]) / std::sqrt(draw.variances[l]));
  }
  return std::min(total, 1.0);
}

std::vector<double> mixture_pdf_values(const MixtureDraw& draw, const EvaluationGrid& grid) {
  std::vector<double> out(grid.size(), 0.0);
  const double h = grid.spacing();
  for (std::size_t l = 0; l < draw.weights.size(); ++l) {
    const double w = draw.weights[l];
    if (w < kNegligibleWeight) continue;
    const double sd = std::sqrt(draw.variances[l]);
    const double lo = draw.means[l] - kReachInSd * sd;
    const double hi = draw.means[l] + kReachInSd * sd;
    if (hi < grid.lower || lo > grid.upper) continue;
    const auto first = static_cast<std::size_t>(std::max(0.0, std::floor((lo - grid.lower) / h)));
    const auto last = std::min(grid.size() - 1, static_cast<std::size_t>(std::ceil((hi - grid.lower) / h)));
    for (std::size_t i = first; i <= last; ++i) out[i] += w * normal_pdf(grid.points[i], draw.means[l], sd);
  }
  return out;
}

std::vector<double> mixture_cdf_values(const MixtureDraw& draw, const EvaluationGrid& grid) {
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = mixture_cdf(draw, grid.points[i]);
  return out;
}

std::vector<std::size_t> DpmState::counts() const {
  std::vector<std::size_t> n(weights.size(), 0);
  for (std::size_t g : allocations) ++n[g];
  return n;
}

std::vector<double> stick_weights(std::span<const double> sticks) {
  std::vector<double> w(sticks.size());
  double remaining = 1.0;
  for (std::size_t l = 0; l < sticks.size(); ++l) {
    w[l] = sticks[l] * remaining;
    remaining *= 1.0 - sticks[l];
  }
  return w;
}

DpmState initial_state(std::size_t n, const DpmHyper& hyper, RngStream& rng) {
  const std::size_t L = hyper.L;
  DpmState s;
  s.allocations.resize(n);
  for (auto& g : s.allocations) g = std::min(L - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(L)));
  s.sticks.assign(L, 1.0 / (1.0 + hyper.alpha));
  s.sticks.back() = 1.0;
  s.weights = stick_weights(s.sticks);
  s.means.resize(L);
  s.variances.resize(L);
  for (std::size_t l = 0; l < L; ++l) {
    s.means[l] = rng.normal(hyper.a_mu, std::sqrt(hyper.b2_mu));
    s.variances[l] = rng.inv_gamma(hyper.a_sig, hyper.b_sig);
  }
  return s;
}

std::vector<double> allocation_log_weights(const DpmState& state, double y) {
  std::vector<double> lw(state.weights.size());
  for (std::size_t l = 0; l < lw.size(); ++l) {
    lw[l] = std::log(state.weights[l]) + normal_log_pdf(y, state.means[l], state.variances[l]);
  }
  return lw;
}

void update_allocations(DpmState& state, std::span<const double> y, RngStream& rng) {
  const std::size_t L = state.weights.size();
  std::vector<double> log_w(L), lw(L), inv_var(L), log_norm(L);
  for (std::size_t l = 0; l < L; ++l) {
    inv_var[l] = 1.0 / state.variances[l];
    log_w[l] = std::log(state.weights[l]);
    log_norm[l] = normal_log_pdf(0.0, 0.0, state.variances[l]);
  }
  for (std::size_t i = 0; i < y.size(); ++i) {
    for (std::size_t l = 0; l < L; ++l) {
      const double d = y[i] - state.means[l];
      lw[l] = log_w[l] + log_norm[l] - 0.5 * d * d * inv_var[l];
    }
    state.allocations[i] = rng.categorical_log(lw);
  }
}

void update_sticks(DpmState& state, double alpha, RngStream& rng) {
  const auto n = state.counts();
  const std::size_t L = n.size();
  std::size_t above = std::accumulate(n.begin(), n.end(), std::size_t{0});
  for (std::size_t l = 0; l + 1 < L; ++l) {
    above -= n[l];
    // Clamp away from exactly 1 so later log-weights stay finite.
    state.sticks[l] = std::min(rng.beta(static_cast<double>(n[l]) + 1.0, alpha + static_cast<double>(above)),
                               1.0 - 1e-16);
  }
  state.sticks.back() = 1.0;
  state.weights = stick_weights(state.sticks);
  for (auto& w : state.weights) w = std::max(w, 1e-300);
}

void update_atoms(DpmState& state, std::span<const double> y, const DpmHyper& hyper, RngStream& rng) {
  const std::size_t L = state.weights.size();
  std::vector<double> sum(L, 0.0);
  std::vector<std::size_t> n(L, 0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    sum[state.allocations[i]] += y[i];
    ++n[state.allocations[i]];
  }
  for (std::size_t l = 0; l < L; ++l) {
    const double precision = 1.0 / hyper.b2_mu + static_cast<double>(n[l]) / state.variances[l];
    const double mean = (hyper.a_mu / hyper.b2_mu + sum[l] / state.variances[l]) / precision;
    state.means[l] = rng.normal(mean, std::sqrt(1.0 / precision));
  }
  std::vector<double> ss(L, 0.0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = y[i] - state.means[state.allocations[i]];
    ss[state.allocations[i]] += d * d;
  }
  for (std::size_t l = 0; l < L; ++l) {
    state.variances[l] = rng.inv_gamma(hyper.a_sig + 0.5 * static_cast<double>(n[l]), hyper.b_sig + 0.5 * ss[l]);
  }
}

void gibbs_sweep(DpmState& state, std::span<const double> y, const DpmHyper& hyper, RngStream& rng) {
  update_allocations(state, y, rng);
  update_sticks(state, hyper.alpha, rng);
  update_atoms(state, y, hyper, rng);
}

std::vector<MixtureDraw> fit_dpm(std::span<const double> y, const DpmHyper& hyper, std::size_t n_burn,
                                 std::size_t n_save, RngStream& rng) {
  hyper.validate();
  if (y.size() < 10) throw std::invalid_argument("fit_dpm: need at least 10 observations");
  if (n_burn < 1 || n_save < 1) throw std::invalid_argument("fit_dpm: n_burn and n_save must be at least 1");
  const double n = static_cast<double>(y.size());
  const double m = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : y) {
    if (!std::isfinite(v)) throw std::invalid_argument("fit_dpm: non-finite outcome");
    ss += (v - m) * (v - m);
  }
  const double var = ss / (n - 1.0);
  if (var < 1e-12) throw std::invalid_argument("fit_dpm: outcomes are (nearly) constant");
  const double s = std::sqrt(var);
  std::vector<double> z(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) z[i] = (y[i] - m) / s;

  DpmState state = initial_state(z.size(), hyper, rng);
  for (std::size_t it = 0; it < n_burn; ++it) gibbs_sweep(state, z, hyper, rng);

  std::vector<MixtureDraw> draws;
  draws.reserve(n_save);
  for (std::size_t it = 0; it < n_save; ++it) {
    gibbs_sweep(state, z, hyper, rng);
    MixtureDraw d{stick_weights(state.sticks), state.means, state.variances};
    for (std::size_t l = 0; l < d.components(); ++l) {
      d.means[l] = d.means[l] * s + m;
      d.variances[l] *= var;
    }
    draws.push_back(std::move(d));
  }
  return draws;
}

GriddedDensity density_from_draw(const MixtureDraw& draw, const EvaluationGrid& grid,
                                 const DrawDensityOptions& options) {
  GriddedDensity out{grid, mixture_pdf_values(draw, grid), [draw](double y) { return mixture_pdf(draw, y); }};
  if (options.strict) check_density(out, options.norm_tolerance);
  return out;
}

}  // namespace unl
