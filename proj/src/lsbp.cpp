#include "unl/lsbp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "unl/polya_gamma.hpp"

namespace unl {

namespace {

double log_sigmoid(double x) { return x < 0.0 ? x - std::log1p(std::exp(x)) : -std::log1p(std::exp(-x)); }

Eigen::VectorXd draw_gaussian(const Eigen::MatrixXd& precision, const Eigen::VectorXd& rhs, RngStream& rng) {
  const Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) throw std::runtime_error("lsbp: full-conditional precision is not positive definite");
  Eigen::VectorXd eps(rhs.size());
  for (Eigen::Index k = 0; k < eps.size(); ++k) eps[k] = rng.normal();
  return llt.solve(rhs) + llt.matrixU().solve(eps);
}

bool is_spd(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || !m.isApprox(m.transpose(), 1e-12)) return false;
  return Eigen::LLT<Eigen::MatrixXd>(m).info() == Eigen::Success;
}

struct Prior {
  Eigen::MatrixXd precision;
  Eigen::VectorXd shift;  // precision * mean
  Eigen::VectorXd mean;
};

Prior resolve_prior(const std::optional<Eigen::VectorXd>& mean, const std::optional<Eigen::MatrixXd>& cov,
                    double prior_variance, std::size_t q) {
  const auto n = static_cast<Eigen::Index>(q);
  Prior p;
  p.mean = mean.value_or(Eigen::VectorXd::Zero(n));
  const Eigen::MatrixXd c = cov.value_or(Eigen::MatrixXd::Identity(n, n) * prior_variance);
  p.precision = c.llt().solve(Eigen::MatrixXd::Identity(n, n));
  p.precision = 0.5 * (p.precision + p.precision.transpose());
  p.shift = p.precision * p.mean;
  return p;
}

// Per-observation streaming log-mean-exp and Welford variance of the
// pointwise log-likelihood across saved draws.
class WaicAccumulator {
 public:
  explicit WaicAccumulator(std::size_t n)
      : max_(n, -std::numeric_limits<double>::infinity()), scaled_(n, 0.0), mean_(n, 0.0), m2_(n, 0.0) {}

  void add(std::size_t i, double ll) {
    if (!std::isfinite(ll)) throw std::domain_error("waic: non-finite pointwise log density");
    if (ll > max_[i]) {
      scaled_[i] = scaled_[i] * std::exp(max_[i] - ll) + 1.0;
      max_[i] = ll;
    } else {
      scaled_[i] += std::exp(ll - max_[i]);
    }
    if (i == 0) ++count_;
    const double delta = ll - mean_[i];
    mean_[i] += delta / static_cast<double>(count_);
    m2_[i] += delta * (ll - mean_[i]);
  }

  WaicResult result() const {
    if (count_ < 2) throw std::invalid_argument("waic: need at least two saved draws");
    WaicResult r;
    const double s = static_cast<double>(count_);
    for (std::size_t i = 0; i < max_.size(); ++i) {
      const double lppd_i = max_[i] + std::log(scaled_[i] / s);
      const double p_i = m2_[i] / (s - 1.0);
      r.pointwise_lppd.push_back(lppd_i);
      r.pointwise_p_waic.push_back(p_i);
      r.lppd += lppd_i;
      r.p_waic += p_i;
    }
    r.waic = -2.0 * (r.lppd - r.p_waic);
    return r;
  }

 private:
  std::vector<double> max_, scaled_, mean_, m2_;
  std::size_t count_ = 0;
};

// log f(y | x) on the standardized scale for one draw, given the rows.
double log_mixture_density(const ConditionalMixtureDraw& d, const Eigen::VectorXd& z, const Eigen::VectorXd& u,
                           double y) {
  const std::size_t L = d.components();
  std::vector<double> eta(L - 1);
  for (std::size_t l = 0; l + 1 < L; ++l) eta[l] = z.dot(d.gamma[l]);
  auto lw = log_stick_weights(eta, L);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < L; ++l) {
    lw[l] += normal_log_pdf(y, u.dot(d.beta[l]), d.variances[l]);
    top = std::max(top, lw[l]);
  }
  double acc = 0.0;
  for (double v : lw) acc += std::exp(v - top);
  return top + std::log(acc);
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) { return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())); }

}  // namespace

void LsbpHyper::validate(std::size_t q_weights, std::size_t q_means, std::size_t min_components) const {
  if (L < min_components) throw std::invalid_argument("lsbp: L must be at least " + std::to_string(min_components));
  if (!(a_sig > 0.0) || !std::isfinite(a_sig)) throw std::invalid_argument("lsbp: a_sig must be positive");
  if (!(b_sig > 0.0) || !std::isfinite(b_sig)) throw std::invalid_argument("lsbp: b_sig must be positive");
  if (!(prior_variance > 0.0) || !std::isfinite(prior_variance)) {
    throw std::invalid_argument("lsbp: prior_variance must be positive");
  }
  const auto check = [](const auto& mean, const auto& cov, std::size_t q, const char* name) {
    const auto n = static_cast<Eigen::Index>(q);
    if (mean && mean->size() != n) {
      throw std::invalid_argument(std::string("lsbp: ") + name + "_mean has dimension " + std::to_string(mean->size()) +
                                  ", design needs " + std::to_string(q));
    }
    if (cov) {
      if (cov->rows() != n || cov->cols() != n) {
        throw std::invalid_argument(std::string("lsbp: ") + name + "_cov must be " + std::to_string(q) + "x" +
                                    std::to_string(q));
      }
      if (!is_spd(*cov)) throw std::invalid_argument(std::string("lsbp: ") + name + "_cov must be symmetric positive definite");
    }
  };
  check(gamma_mean, gamma_cov, q_weights, "gamma");
  check(beta_mean, beta_cov, q_means, "beta");
}

std::vector<double> log_stick_weights(std::span<const double> eta, std::size_t L) {
  std::vector<double> out(L);
  double rest = 0.0;
  for (std::size_t l = 0; l + 1 < L; ++l) {
    out[l] = rest + log_sigmoid(eta[l]);
    rest += log_sigmoid(-eta[l]);
  }
  out[L - 1] = rest;
  return out;
}

Eigen::VectorXd pg_logistic_update(const Eigen::MatrixXd& Z, std::span<const signed char> label,
                                   const Eigen::VectorXd& gamma, const Eigen::MatrixXd& prior_precision,
                                   const Eigen::VectorXd& prior_shift, RngStream& rng) {
  if (label.size() != static_cast<std::size_t>(Z.rows()) || gamma.size() != Z.cols()) {
    throw std::invalid_argument("pg_logistic_update: mismatched design dimensions");
  }
  Eigen::MatrixXd precision = prior_precision;
  Eigen::VectorXd rhs = prior_shift;
  for (Eigen::Index i = 0; i < Z.rows(); ++i) {
    if (label[static_cast<std::size_t>(i)] < 0) continue;
    const auto z = Z.row(i).transpose();
    const double zeta = sample_pg1(z.dot(gamma), rng);
    precision.noalias() += zeta * z * z.transpose();
    rhs += (label[static_cast<std::size_t>(i)] == 1 ? 0.5 : -0.5) * z;
  }
  return draw_gaussian(precision, rhs, rng);
}

std::vector<double> ConditionalMixtureDraw::weights(const Eigen::VectorXd& z) const {
  const std::size_t L = components();
  std::vector<double> eta(L - 1);
  for (std::size_t l = 0; l + 1 < L; ++l) eta[l] = z.dot(gamma[l]);
  auto w = log_stick_weights(eta, L);
  for (auto& v : w) v = std::exp(v);
  return w;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> FitResult::rows(const CovariateRecord& x) const {
  return {to_eigen(design->row(x, Predictor::weights)), to_eigen(design->row(x, Predictor::means))};
}

MixtureDraw FitResult::conditional(std::size_t s, const CovariateRecord& x) const {
  const auto [z, u] = rows(x);
  return conditional(s, z, u);
}

MixtureDraw FitResult::conditional(std::size_t s, const Eigen::VectorXd& z, const Eigen::VectorXd& u) const {
  const auto& d = draws.at(s);
  MixtureDraw out{d.weights(z), std::vector<double>(d.components()), std::vector<double>(d.components())};
  for (std::size_t l = 0; l < d.components(); ++l) {
    out.means[l] = u.dot(d.beta[l]) * y_sd + y_mean;
    out.variances[l] = d.variances[l] * y_sd * y_sd;
  }
  return out;
}

FitResult fit_lsbp(const GroupDataset& data, const EffectSpec& spec, const LsbpHyper& hyper,
                   const McmcLength& length, RngStream& rng) {
  data.validate();
  const std::size_t n = data.size();
  if (n < 10) throw std::invalid_argument("fit_lsbp: need at least 10 observations");
  if (length.n_burn < 1 || length.n_save < 1) throw std::invalid_argument("fit_lsbp: n_burn and n_save must be at least 1");

  FitResult fit;
  fit.design = std::make_shared<const DesignMap>(spec, data);
  const std::size_t qv = fit.design->dimension(Predictor::weights);
  const std::size_t qm = fit.design->dimension(Predictor::means);
  hyper.validate(qv, qm);
  const std::size_t L = hyper.L;

  const double m = std::accumulate(data.outcomes.begin(), data.outcomes.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : data.outcomes) ss += (v - m) * (v - m);
  const double var = ss / static_cast<double>(n - 1);
  if (var < 1e-12) throw std::invalid_argument("fit_lsbp: outcomes are (nearly) constant");
  fit.y_mean = m;
  fit.y_sd = std::sqrt(var);

  Eigen::VectorXd y(n);
  Eigen::MatrixXd Z(n, qv), U(n, qm);
  for (std::size_t i = 0; i < n; ++i) {
    const auto i_ = static_cast<Eigen::Index>(i);
    y[i_] = (data.outcomes[i] - m) / fit.y_sd;
    const auto rec = data.record(i);
    Z.row(i_) = to_eigen(fit.design->row(rec, Predictor::weights)).transpose();
    U.row(i_) = to_eigen(fit.design->row(rec, Predictor::means)).transpose();
  }

  const Prior pg = resolve_prior(hyper.gamma_mean, hyper.gamma_cov, hyper.prior_variance, qv);
  const Prior pb = resolve_prior(hyper.beta_mean, hyper.beta_cov, hyper.prior_variance, qm);

  ConditionalMixtureDraw state;
  state.gamma.assign(L - 1, pg.mean);
  state.beta.assign(L, pb.mean);
  state.variances.resize(L);
  std::vector<std::size_t> G(n);
  for (auto& g : G) g = std::min(L - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(L)));
  for (auto& s2 : state.variances) s2 = rng.inv_gamma(hyper.a_sig, hyper.b_sig);

  WaicAccumulator acc(n);
  const double log_sd = std::log(fit.y_sd);
  fit.draws.reserve(length.n_save);
  std::vector<double> eta(L > 1 ? L - 1 : 0), lw(L);
  std::vector<signed char> label(n);
  Eigen::MatrixXd gam(qv, L > 1 ? L - 1 : 0), bet(qm, L);

  for (std::size_t it = 0; it < length.n_burn + length.n_save; ++it) {
    // Step 1: allocations under covariate-dependent weights.
    for (std::size_t l = 0; l + 1 < L; ++l) gam.col(static_cast<Eigen::Index>(l)) = state.gamma[l];
    for (std::size_t l = 0; l < L; ++l) bet.col(static_cast<Eigen::Index>(l)) = state.beta[l];
    const Eigen::MatrixXd eta_all = Z * gam;
    const Eigen::MatrixXd mean_all = U * bet;
    for (std::size_t i = 0; i < n; ++i) {
      const auto i_ = static_cast<Eigen::Index>(i);
      for (std::size_t l = 0; l + 1 < L; ++l) eta[l] = eta_all(i_, static_cast<Eigen::Index>(l));
      lw = log_stick_weights(eta, L);
      for (std::size_t l = 0; l < L; ++l) {
        lw[l] += normal_log_pdf(y[i_], mean_all(i_, static_cast<Eigen::Index>(l)), state.variances[l]);
      }
      G[i] = rng.categorical_log(lw);
    }

    // Step 2: sequential logistic regressions with Polya-gamma augmentation.
    for (std::size_t l = 0; l + 1 < L; ++l) {
      for (std::size_t i = 0; i < n; ++i) label[i] = G[i] < l ? -1 : (G[i] == l ? 1 : 0);
      state.gamma[l] = pg_logistic_update(Z, label, state.gamma[l], pg.precision, pg.shift, rng);
    }

    // Step 3: component regression coefficients.
    std::vector<Eigen::MatrixXd> utu(L, Eigen::MatrixXd::Zero(qm, qm));
    std::vector<Eigen::VectorXd> uty(L, Eigen::VectorXd::Zero(qm));
    std::vector<std::size_t> counts(L, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto u = U.row(static_cast<Eigen::Index>(i)).transpose();
      utu[G[i]].noalias() += u * u.transpose();
      uty[G[i]] += y[static_cast<Eigen::Index>(i)] * u;
      ++counts[G[i]];
    }
    for (std::size_t l = 0; l < L; ++l) {
      const double inv_s2 = 1.0 / state.variances[l];
      state.beta[l] = draw_gaussian(pb.precision + inv_s2 * utu[l], pb.shift + inv_s2 * uty[l], rng);
    }

    // Step 4: component variances.
    std::vector<double> rss(L, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto i_ = static_cast<Eigen::Index>(i);
      const double r = y[i_] - U.row(i_).dot(state.beta[G[i]]);
      rss[G[i]] += r * r;
    }
    for (std::size_t l = 0; l < L; ++l) {
      state.variances[l] = rng.inv_gamma(hyper.a_sig + 0.5 * static_cast<double>(counts[l]), hyper.b_sig + 0.5 * rss[l]);
    }

    if (it >= length.n_burn) {
      for (std::size_t i = 0; i < n; ++i) {
        const auto i_ = static_cast<Eigen::Index>(i);
        acc.add(i, log_mixture_density(state, Z.row(i_).transpose(), U.row(i_).transpose(), y[i_]) - log_sd);
      }
      fit.draws.push_back(state);
    }
  }
  fit.waic = length.n_save >= 2 ? acc.result() : WaicResult{};
  return fit;
}

WaicResult waic(const FitResult& fit, const GroupDataset& data) {
  const std::size_t n = data.size();
  WaicAccumulator acc(n);
  const double log_sd = std::log(fit.y_sd);
  std::vector<Eigen::VectorXd> z(n), u(n);
  for (std::size_t i = 0; i < n; ++i) std::tie(z[i], u[i]) = fit.rows(data.record(i));
  for (const auto& d : fit.draws) {
    for (std::size_t i = 0; i < n; ++i) {
      acc.add(i, log_mixture_density(d, z[i], u[i], (data.outcomes[i] - fit.y_mean) / fit.y_sd) - log_sd);
    }
  }
  return acc.result();
}

GriddedDensity conditional_density_from_draw(const FitResult& fit, std::size_t s, const CovariateRecord& x,
                                             const EvaluationGrid& grid, const DrawDensityOptions& options) {
  return density_from_draw(fit.conditional(s, x), grid, options);
}

std::vector<EffectSpec> default_candidates(const std::string& covariate, std::size_t max_knots) {
  std::vector<EffectSpec> out;
  out.push_back(EffectSpec{{EffectTerm{covariate, Encoding::linear(), Encoding::linear()}}});
  for (std::size_t k = 0; k <= max_knots; ++k) {
    out.push_back(EffectSpec{{EffectTerm{covariate, Encoding::linear(), Encoding::bspline(k)}}});
    out.push_back(EffectSpec{{EffectTerm{covariate, Encoding::bspline(k), Encoding::linear()}}});
  }
  return out;
}

SelectionResult select_design(const GroupDataset& data, const std::vector<EffectSpec>& candidates,
                              const LsbpHyper& hyper, const McmcLength& length, std::uint64_t seed,
                              std::uint64_t stream_base, double margin) {
  if (candidates.empty()) throw std::invalid_argument("select_design: no candidate specifications");
  SelectionResult result;
  result.candidates = candidates;
  result.waic.assign(candidates.size(), std::numeric_limits<double>::quiet_NaN());
  const auto count = static_cast<long>(candidates.size());
#pragma omp parallel for schedule(dynamic)
  for (long k = 0; k < count; ++k) {
    try {
      RngStream rng(seed, stream_base + static_cast<std::uint64_t>(k));
      result.waic[static_cast<std::size_t>(k)] = fit_lsbp(data, candidates[static_cast<std::size_t>(k)], hyper, length, rng).waic.waic;
    } catch (const std::exception&) {
      // Leave NaN; reported through result.waic.
    }
  }
  double best = std::numeric_limits<double>::infinity();
  for (double w : result.waic) {
    if (std::isfinite(w)) best = std::min(best, w);
  }
  if (!std::isfinite(best)) throw std::runtime_error("select_design: every candidate fit failed");
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    if (std::isfinite(result.waic[k]) && result.waic[k] <= best + margin) {
      result.chosen = k;
      break;
    }
  }
  return result;
}

}  // namespace unl
