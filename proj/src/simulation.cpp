#include "unl/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "unl/measures.hpp"
#include "unl/posterior.hpp"

namespace unl {

namespace {

constexpr std::size_t kTruthGridPoints = 2001;
constexpr double kTruthReachInSd = 8.0;

// Tabulated UNL values, rows U-I..U-III, columns high/mid/low.
constexpr double kTable[3][3] = {{2.792, 1.919, 1.139}, {2.527, 1.855, 1.191}, {2.508, 1.933, 1.143}};

std::size_t row_of(ScenarioId id) {
  switch (id) {
    case ScenarioId::U1: return 0;
    case ScenarioId::U2: return 1;
    case ScenarioId::U3: return 2;
    default: throw std::invalid_argument("scenario " + to_string(id) + " is conditional");
  }
}

NormalMixture two_normals(double m1, double m2) { return {{0.5, 0.5}, {m1, m2}, {1.0, 1.0}}; }

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<CovariateRecord> records_for(std::span<const double> x) {
  std::vector<CovariateRecord> out;
  for (double v : x) out.push_back(CovariateRecord{{"x", v}});
  return out;
}

std::vector<double> pooled_outcomes(const std::array<GroupDataset, 3>& data) {
  std::vector<double> pooled;
  for (const auto& g : data) pooled.insert(pooled.end(), g.outcomes.begin(), g.outcomes.end());
  return pooled;
}

}  // namespace

bool ScenarioSpec::conditional() const {
  return id == ScenarioId::C1 || id == ScenarioId::C2 || id == ScenarioId::C3;
}

std::string ScenarioSpec::name() const {
  return conditional() ? to_string(id) : to_string(id) + "/" + to_string(config);
}

void ScenarioSpec::validate() const {
  for (std::size_t g = 0; g < 3; ++g) {
    if (n[g] < 10) throw std::invalid_argument("scenario: n" + std::to_string(g + 1) + " must be at least 10");
  }
  if (replicates < 1) throw std::invalid_argument("scenario: replicates must be at least 1");
}

ScenarioId parse_scenario_id(const std::string& text) {
  if (text == "U-I") return ScenarioId::U1;
  if (text == "U-II") return ScenarioId::U2;
  if (text == "U-III") return ScenarioId::U3;
  if (text == "C-I") return ScenarioId::C1;
  if (text == "C-II") return ScenarioId::C2;
  if (text == "C-III") return ScenarioId::C3;
  throw std::invalid_argument("unknown scenario '" + text + "' (expected U-I, U-II, U-III, C-I, C-II or C-III)");
}

ScenarioConfig parse_scenario_config(const std::string& text) {
  if (text == "high") return ScenarioConfig::high;
  if (text == "mid") return ScenarioConfig::mid;
  if (text == "low") return ScenarioConfig::low;
  throw std::invalid_argument("unknown scenario configuration '" + text + "' (expected high, mid or low)");
}

std::string to_string(ScenarioId id) {
  switch (id) {
    case ScenarioId::U1: return "U-I";
    case ScenarioId::U2: return "U-II";
    case ScenarioId::U3: return "U-III";
    case ScenarioId::C1: return "C-I";
    case ScenarioId::C2: return "C-II";
    case ScenarioId::C3: return "C-III";
  }
  return "?";
}

std::string to_string(ScenarioConfig config) {
  switch (config) {
    case ScenarioConfig::high: return "high";
    case ScenarioConfig::mid: return "mid";
    case ScenarioConfig::low: return "low";
  }
  return "?";
}

std::array<DensitySpec, 3> scenario_densities(ScenarioId id, ScenarioConfig config) {
  const auto c = static_cast<int>(config);
  switch (id) {
    case ScenarioId::U1: {
      constexpr double m1[] = {-3.25, -1.3, -0.2}, m3[] = {3.25, 1.15, 0.15};
      return {Normal{m1[c], 1.0}, Normal{0.0, 1.0}, Normal{m3[c], 1.0}};
    }
    case ScenarioId::U2: {
      switch (config) {
        case ScenarioConfig::high: return {Gamma{3.0, 1.0}, SkewNormal{6.0, 2.0, 5.0}, SkewNormal{8.0, 2.0, 5.0}};
        case ScenarioConfig::mid: return {Gamma{3.0, 1.0}, SkewNormal{2.0, 2.5, 5.0}, SkewNormal{4.25, 2.0, 5.0}};
        case ScenarioConfig::low: return {Gamma{1.5, 1.0}, SkewNormal{0.1, 2.0, 5.0}, SkewNormal{0.25, 2.0, 5.0}};
      }
      break;
    }
    case ScenarioId::U3: {
      switch (config) {
        case ScenarioConfig::high: return {two_normals(-6.0, -3.0), two_normals(0.5, 3.25), two_normals(3.5, 6.25)};
        case ScenarioConfig::mid: return {two_normals(-2.25, 0.5), two_normals(2.75, 5.5), two_normals(3.0, 5.75)};
        case ScenarioConfig::low: return {two_normals(0.15, 2.75), two_normals(0.5, 3.0), two_normals(0.85, 3.15)};
      }
      break;
    }
    default: break;
  }
  throw std::invalid_argument("scenario " + to_string(id) + " has no unconditional densities");
}

std::array<DensitySpec, 3> conditional_densities(ScenarioId id, double x) {
  const double pi = std::numbers::pi;
  switch (id) {
    case ScenarioId::C1:
      return {Normal{0.25 + x, 1.0}, Normal{1.0 + 1.5 * x, 1.5}, Normal{2.5 + 4.0 * x, 1.75}};
    case ScenarioId::C2:
      return {Normal{-0.75 + std::sin(pi * x + 1.25), 0.5}, Normal{0.75 + std::sin(pi * x), 1.25 + x * x},
              Normal{2.35 + x * x, 1.0}};
    case ScenarioId::C3: {
      const double w = logistic(x);
      return {Normal{-0.75 + std::sin(pi * x + 1.25), 1.0}, NormalMixture{{w, 1.0 - w}, {x, x * x}, {0.5, 0.75}},
              Gamma{3.0 + x * x, 0.5 + std::exp(x)}};
    }
    default: break;
  }
  throw std::invalid_argument("scenario " + to_string(id) + " has no conditional densities");
}

double scenario_truth(const ScenarioSpec& spec) {
  if (spec.conditional()) throw std::invalid_argument("scenario_truth: conditional scenarios have a curve; use conditional_truth");
  return kTable[row_of(spec.id)][static_cast<int>(spec.config)];
}

double conditional_truth(ScenarioId id, double x) {
  const auto dens = conditional_densities(id, x);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& d : dens) {
    lo = std::min(lo, mean_of(d) - kTruthReachInSd * sd_of(d));
    hi = std::max(hi, mean_of(d) + kTruthReachInSd * sd_of(d));
  }
  const auto grid = make_grid(lo, hi, kTruthGridPoints);
  return unl(grid_density(dens[0], grid), grid_density(dens[1], grid), grid_density(dens[2], grid));
}

std::vector<double> conditional_truth_curve(ScenarioId id, std::span<const double> x) {
  std::vector<double> out;
  for (double v : x) out.push_back(conditional_truth(id, v));
  return out;
}

std::uint64_t data_stream(std::size_t replicate, std::size_t group) {
  return (static_cast<std::uint64_t>(replicate) << 4) | group;
}

std::uint64_t fit_stream(std::size_t replicate, std::size_t group) {
  return (std::uint64_t{1} << 40) | (static_cast<std::uint64_t>(replicate) << 4) | group;
}

std::array<GroupDataset, 3> generate(const ScenarioSpec& spec, std::size_t replicate) {
  spec.validate();
  std::array<GroupDataset, 3> out;
  for (std::size_t g = 0; g < 3; ++g) {
    RngStream rng(spec.seed, data_stream(replicate, g));
    out[g].label = "group" + std::to_string(g + 1);
    if (!spec.conditional()) {
      out[g].outcomes = sample(scenario_densities(spec.id, spec.config)[g], spec.n[g], rng);
      continue;
    }
    std::vector<double> x(spec.n[g]);
    out[g].outcomes.resize(spec.n[g]);
    for (std::size_t i = 0; i < spec.n[g]; ++i) {
      x[i] = -1.0 + 2.0 * rng.uniform();
      out[g].outcomes[i] = sample_one(conditional_densities(spec.id, x[i])[g], rng);
    }
    out[g].covariates.emplace("x", std::move(x));
  }
  return out;
}

CoverageReport run_replicates(const ScenarioSpec& spec, const Estimator& estimator) {
  spec.validate();
  CoverageReport report;
  report.scenario = spec.name();
  report.n = spec.n;
  report.truth = scenario_truth(spec);
  report.replicates = spec.replicates;
  report.records.resize(spec.replicates);
  const auto count = static_cast<long>(spec.replicates);
#pragma omp parallel for schedule(dynamic)
  for (long r = 0; r < count; ++r) {
    auto& rec = report.records[static_cast<std::size_t>(r)];
    rec.replicate = static_cast<std::size_t>(r);
    try {
      rec.estimate = estimator(generate(spec, rec.replicate), rec.replicate);
      rec.ok = true;
    } catch (const std::exception& e) {
      rec.error = e.what();
    }
  }
  std::size_t ok = 0, covered = 0;
  for (const auto& rec : report.records) {
    if (!rec.ok) {
      ++report.failures;
      continue;
    }
    ++ok;
    report.mean_median += rec.estimate.median;
    report.mean_width += rec.estimate.upper - rec.estimate.lower;
    covered += rec.estimate.lower <= report.truth && report.truth <= rec.estimate.upper ? 1 : 0;
  }
  if (ok > 0) {
    report.mean_median /= static_cast<double>(ok);
    report.mean_width /= static_cast<double>(ok);
    report.bias = report.mean_median - report.truth;
    report.coverage = static_cast<double>(covered) / static_cast<double>(ok);
  }
  return report;
}

Estimator dpm_estimator(const DpmEstimatorConfig& config) {
  config.hyper.validate(2);
  return [config](const std::array<GroupDataset, 3>& data, std::size_t replicate) {
    std::array<std::vector<MixtureDraw>, 3> draws;
    for (std::size_t g = 0; g < 3; ++g) {
      RngStream rng(config.seed, fit_stream(replicate, g));
      draws[g] = fit_dpm(data[g].outcomes, config.hyper, config.length.n_burn, config.length.n_save, rng);
    }
    const auto grid = padded_grid(pooled_outcomes(data), config.grid_points);
    const auto ens = unl_ensemble(draws[0], draws[1], draws[2], grid);
    const auto s = summarize(ens, config.level);
    return Interval{s.median, s.lower, s.upper};
  };
}

CurveReport run_curve_replicates(const ScenarioSpec& spec, const CurveEstimator& estimator,
                                 std::span<const double> x) {
  spec.validate();
  if (!spec.conditional()) throw std::invalid_argument("run_curve_replicates: scenario must be conditional");
  if (x.empty()) throw std::invalid_argument("run_curve_replicates: empty covariate grid");
  CurveReport report;
  report.scenario = spec.name();
  report.n = spec.n;
  report.x.assign(x.begin(), x.end());
  report.truth = conditional_truth_curve(spec.id, x);
  report.replicates = spec.replicates;
  std::vector<CurveInterval> results(spec.replicates);
  std::vector<std::string> errors(spec.replicates);
  const auto count = static_cast<long>(spec.replicates);
#pragma omp parallel for schedule(dynamic)
  for (long r = 0; r < count; ++r) {
    const auto rep = static_cast<std::size_t>(r);
    try {
      results[rep] = estimator(generate(spec, rep), rep, x);
      if (results[rep].median.size() != x.size()) throw std::runtime_error("estimator returned a curve of the wrong length");
    } catch (const std::exception& e) {
      errors[rep] = e.what();
      results[rep] = {};
    }
  }
  report.mean_median.assign(x.size(), 0.0);
  report.coverage.assign(x.size(), 0.0);
  std::size_t ok = 0;
  for (std::size_t r = 0; r < spec.replicates; ++r) {
    if (!errors[r].empty()) {
      ++report.failures;
      report.errors.push_back("replicate " + std::to_string(r) + ": " + errors[r]);
      continue;
    }
    ++ok;
    double abs_err = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      const auto& c = results[r];
      report.mean_median[j] += c.median[j];
      report.coverage[j] += c.lower[j] <= report.truth[j] && report.truth[j] <= c.upper[j] ? 1.0 : 0.0;
      abs_err += std::abs(c.median[j] - report.truth[j]);
    }
    report.mean_abs_error.push_back(abs_err / static_cast<double>(x.size()));
  }
  if (ok > 0) {
    for (std::size_t j = 0; j < x.size(); ++j) {
      report.mean_median[j] /= static_cast<double>(ok);
      report.coverage[j] /= static_cast<double>(ok);
    }
    for (double e : report.mean_abs_error) report.mae += e;
    report.mae /= static_cast<double>(ok);
  }
  return report;
}

CurveEstimator lsbp_estimator(const LsbpEstimatorConfig& config) {
  return [config](const std::array<GroupDataset, 3>& data, std::size_t replicate, std::span<const double> x) {
    std::array<FitResult, 3> fits;
    for (std::size_t g = 0; g < 3; ++g) {
      EffectSpec spec = config.spec;
      if (config.select) {
        spec = select_design(data[g], default_candidates("x"), config.hyper, config.selection_length, config.seed,
                             fit_stream(replicate, g) + (std::uint64_t{1} << 20))
                   .spec();
      }
      RngStream rng(config.seed, fit_stream(replicate, g));
      fits[g] = fit_lsbp(data[g], spec, config.hyper, config.length, rng);
    }
    const auto grid = padded_grid(pooled_outcomes(data), config.grid_points);
    const auto curve = covariate_unl_ensemble(fits[0], fits[1], fits[2], records_for(x), grid);
    CurveInterval out;
    for (const auto& s : summarize(curve, config.level)) {
      out.median.push_back(s.median);
      out.lower.push_back(s.lower);
      out.upper.push_back(s.upper);
    }
    return out;
  };
}

}  // namespace unl
