// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "cli.hpp"
#include "oracles.hpp"
#include "unl/io.hpp"
#include "unl/measures.hpp"
#include "unl/polya_gamma.hpp"
#include "unl/posterior.hpp"
#include "unl/simulation.hpp"

namespace {

using namespace unl;
namespace fs = std::filesystem;

// Tolerances and study sizes.
constexpr double kTableTol = 0.005;
constexpr double kTableRuntime = 1.0;  // seconds, all nine rows
constexpr double kTrinormalTol = 1e-5;
constexpr double kVusEqualTol = 1e-6;
constexpr double kVusEmpiricalTol = 0.002;
constexpr std::size_t kVusEmpiricalN = 1000000;
constexpr double kIdentityTol = 1e-6;
constexpr double kTwoClassTol = 1e-9;
constexpr double kYoudenSlack = 1e-9;
constexpr double kYoudenSingleCrossingTol = 1e-3;
constexpr double kInvarianceTol = 1e-4;
constexpr double kRecoveryBiasTol = 0.05;
constexpr std::size_t kRecoveryMinCovered = 17;
constexpr double kLowTruth = 1.139;
constexpr std::size_t kLowMinAbove = 16;
constexpr double kLowCeiling = 1.45;
constexpr double kCurveMaeTol = 0.15;
constexpr double kMcSigmas = 3.0;
constexpr std::size_t kPgDraws = 1000000;
constexpr double kSelectionRate = 0.8;
constexpr std::size_t kSelectionN = 200;
constexpr std::size_t kSelectionReps = 20;
constexpr double kPartitionTol = 1e-12;
constexpr double kSimpsonUlps = 10.0;
constexpr double kSimplexTol = 1e-12;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v, int digits = 6) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

EvaluationGrid covering_grid(const std::vector<DensitySpec>& d, std::size_t points, double reach = 8.0) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  auto cover = [&](double mean, double sd) {
    lo = std::min(lo, mean - reach * sd);
    hi = std::max(hi, mean + reach * sd);
  };
  for (const auto& s : d) {
    if (const auto* m = std::get_if<NormalMixture>(&s)) {
      for (std::size_t c = 0; c < m->means.size(); ++c) cover(m->means[c], m->sds[c]);
    } else {
      cover(mean_of(s), sd_of(s));
    }
  }
  return make_grid(lo, hi, points);
}

double cli_value(const std::string& csv, const std::string& quantity) {
  std::istringstream in(csv);
  for (const auto& row : read_csv(in).rows) {
    double v = 0.0;
    if (row[0] == quantity && parse_double(row[1], v)) return v;
  }
  throw std::runtime_error("quantity " + quantity + " missing from CLI output");
}

const std::array<std::pair<ScenarioId, ScenarioConfig>, 9> kRows{{
    {ScenarioId::U1, ScenarioConfig::high}, {ScenarioId::U1, ScenarioConfig::mid}, {ScenarioId::U1, ScenarioConfig::low},
    {ScenarioId::U2, ScenarioConfig::high}, {ScenarioId::U2, ScenarioConfig::mid}, {ScenarioId::U2, ScenarioConfig::low},
    {ScenarioId::U3, ScenarioConfig::high}, {ScenarioId::U3, ScenarioConfig::mid}, {ScenarioId::U3, ScenarioConfig::low},
}};

double tabulated(ScenarioId id, ScenarioConfig c) {
  ScenarioSpec s;
  s.id = id;
  s.config = c;
  return scenario_truth(s);
}

Outcome table_values() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (const auto& [id, config] : kRows) {
    const auto d = scenario_densities(id, config);
    std::vector<std::string> args{"unl", "measures", "--grid-points", "2001"};
    for (const auto& s : d) {
      args.push_back("--density");
      args.push_back(to_string(s));
    }
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    if (run_cli(static_cast<int>(argv.size()), argv.data(), out, err) != 0) return {false, "measures failed: " + err.str()};
    worst = std::max(worst, std::abs(cli_value(out.str(), "UNL") - tabulated(id, config)));
  }
  const double elapsed = seconds_since(t0);
  return {worst <= kTableTol && elapsed < kTableRuntime,
          "max |UNL - table| = " + num(worst) + " (tol " + num(kTableTol) + "), " + num(elapsed, 3) + " s"};
}

Outcome trinormal() {
  double worst = 0.0;
  for (int a = 0; a < 10; ++a) {
    for (int b = 0; b < 10; ++b) {
      const double mu2 = 0.5 * a, mu3 = mu2 + 0.5 * b, sigma = 1.0;
      const auto g = make_grid(-10.0, mu3 + 10.0, 2001);
      const double u = unl::unl(grid_density(Normal{0.0, sigma}, g), grid_density(Normal{mu2, sigma}, g),
                                grid_density(Normal{mu3, sigma}, g));
      worst = std::max(worst, std::abs(u - unl_trinormal(0.0, mu2, mu3, sigma)));
    }
  }
  const double equal = std::abs(vus_trinormal(0.0, 0.0, 0.0, 1.0) - 1.0 / 6.0);
  RngStream r1(2001, 1), r2(2001, 2), r3(2001, 3);
  std::vector<double> s1(kVusEmpiricalN), s2(kVusEmpiricalN), s3(kVusEmpiricalN);
  for (std::size_t i = 0; i < kVusEmpiricalN; ++i) {
    s1[i] = r1.normal(0.0, 1.0);
    s2[i] = r2.normal(1.0, 1.0);
    s3[i] = r3.normal(2.0, 1.0);
  }
  const double emp = std::abs(vus_empirical(s1, s2, s3) - vus_trinormal(0.0, 1.0, 2.0, 1.0));
  return {worst <= kTrinormalTol && equal <= kVusEqualTol && emp <= kVusEmpiricalTol,
          "UNL sweep max err " + num(worst) + ", VUS(equal) err " + num(equal) + ", VUS empirical err " + num(emp)};
}

DensitySpec random_mixture(RngStream& rng, double offset) {
  const std::size_t k = 1 + static_cast<std::size_t>(rng.uniform() * 3.0);
  NormalMixture m;
  double total = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    m.weights.push_back(rng.gamma(1.0, 1.0));
    total += m.weights.back();
    m.means.push_back(offset + 6.0 * (rng.uniform() - 0.5));
    m.sds.push_back(0.3 + 1.2 * rng.uniform());
  }
  for (double& w : m.weights) w /= total;
  // Make the weights sum to one exactly as validate() demands.
  m.weights.back() = 1.0 - std::accumulate(m.weights.begin(), m.weights.end() - 1, 0.0);
  return m;
}

Outcome identities() {
  RngStream rng(3003, 0);
  double worst_identity = 0.0, worst_two = 0.0, worst_single = 0.0;
  bool youden_ok = true;
  std::size_t triples = 0;
  for (int t = 0; t < 100; ++t) {
    std::vector<DensitySpec> d{random_mixture(rng, 0.0), random_mixture(rng, 1.5), random_mixture(rng, 3.0)};
    const auto g = covering_grid(d, 4001);
    const auto f1 = grid_density(d[0], g), f2 = grid_density(d[1], g), f3 = grid_density(d[2], g);
    const double u = unl::unl(f1, f2, f3);
    worst_identity = std::max(worst_identity, std::abs(u - unl_from_ovl(f1, f2, f3)));
    const auto y = yi3(grid_cdf(d[0], g), grid_cdf(d[1], g), grid_cdf(d[2], g));
    youden_ok = youden_ok && y.value <= u + kYoudenSlack;
    ++triples;
  }
  for (int t = 0; t < 100; ++t) {
    std::vector<DensitySpec> d{random_mixture(rng, 0.0), random_mixture(rng, 1.0)};
    const auto g = covering_grid(d, 4001);
    const std::vector<GriddedDensity> pair{grid_density(d[0], g), grid_density(d[1], g)};
    worst_two = std::max(worst_two, std::abs(unl::unl(pair) - (2.0 - ovl2(pair[0], pair[1]))));
  }
  for (int t = 0; t < 20; ++t) {
    const double sigma = 0.5 + 1.5 * rng.uniform();
    const double mu1 = 4.0 * (rng.uniform() - 0.5);
    const double mu2 = mu1 + sigma * (0.2 + 2.8 * rng.uniform());
    const double mu3 = mu2 + sigma * (0.2 + 2.8 * rng.uniform());
    std::vector<DensitySpec> d{Normal{mu1, sigma}, Normal{mu2, sigma}, Normal{mu3, sigma}};
    const auto g = covering_grid(d, 4001);
    const double u = unl::unl(grid_density(d[0], g), grid_density(d[1], g), grid_density(d[2], g));
    const auto y = yi3(grid_cdf(d[0], g), grid_cdf(d[1], g), grid_cdf(d[2], g));
    youden_ok = youden_ok && y.value <= u + kYoudenSlack;
    worst_single = std::max(worst_single, std::abs(u - y.value));
    ++triples;
  }
  return {worst_identity <= kIdentityTol && worst_two <= kTwoClassTol && youden_ok &&
              worst_single <= kYoudenSingleCrossingTol,
          "identity " + num(worst_identity) + ", two-class " + num(worst_two) + ", YI3<=UNL on " +
              std::to_string(triples) + " triples: " + (youden_ok ? "yes" : "no") + ", single-crossing |UNL-YI3| " +
              num(worst_single)};
}

// UNL of the densities of exp(Y): g(t) = f(log t) / t, integrated in t on
// short uniform t-segments whose ends are equally spaced in log t.
double unl_after_exp(const std::array<DensitySpec, 3>& d, double lo, double hi) {
  const std::size_t segments = 600, per_segment = 33;
  const double du = (hi - lo) / segments;
  MeasureOptions raw;
  raw.check_normalization = false;
  double total = 0.0;
  for (std::size_t s = 0; s < segments; ++s) {
    const auto g = make_grid(std::exp(lo + du * s), std::exp(lo + du * (s + 1)), per_segment);
    std::array<GriddedDensity, 3> f;
    for (int k = 0; k < 3; ++k) {
      f[k].grid = g;
      for (double t : g.points) f[k].values.push_back(pdf_at(d[k], std::log(t)) / t);
    }
    total += unl::unl(f, raw);
  }
  return total;
}

Outcome invariance() {
  double worst = 0.0;
  for (const auto& [id, config] : kRows) {
    const auto d = scenario_densities(id, config);
    const auto g = covering_grid({d[0], d[1], d[2]}, 20001, 10.0);
    const double direct = unl::unl(grid_density(d[0], g), grid_density(d[1], g), grid_density(d[2], g));
    worst = std::max(worst, std::abs(unl_after_exp(d, g.lower, g.upper) - direct));
  }
  return {worst <= kInvarianceTol, "max |UNL(exp Y) - UNL(Y)| = " + num(worst)};
}

Outcome dpm_recovery() {
  ScenarioSpec s;
  s.id = ScenarioId::U1;
  s.config = ScenarioConfig::high;
  s.n = {500, 500, 500};
  s.replicates = 20;
  DpmEstimatorConfig cfg;
  cfg.length = {2000, 5000};
  const auto r = run_replicates(s, dpm_estimator(cfg));
  const auto covered = static_cast<std::size_t>(std::lround(r.coverage * static_cast<double>(r.replicates - r.failures)));
  return {r.failures == 0 && std::abs(r.mean_median - r.truth) <= kRecoveryBiasTol && covered >= kRecoveryMinCovered,
          "mean median " + num(r.mean_median) + " vs " + num(r.truth) + ", covered " + std::to_string(covered) + "/" +
              std::to_string(r.replicates) + ", failures " + std::to_string(r.failures)};
}

Outcome low_bias() {
  ScenarioSpec s;
  s.id = ScenarioId::U1;
  s.config = ScenarioConfig::low;
  s.n = {100, 100, 100};
  s.replicates = 20;
  DpmEstimatorConfig cfg;
  cfg.length = {2000, 5000};
  const auto r = run_replicates(s, dpm_estimator(cfg));
  std::size_t above = 0;
  double highest = -std::numeric_limits<double>::infinity();
  for (const auto& rec : r.records) {
    if (!rec.ok) continue;
    above += rec.estimate.median > kLowTruth ? 1 : 0;
    highest = std::max(highest, rec.estimate.median);
  }
  return {r.failures == 0 && r.mean_median > kLowTruth && above >= kLowMinAbove && highest < kLowCeiling,
          "mean median " + num(r.mean_median) + ", above truth " + std::to_string(above) + "/20, largest " +
              num(highest)};
}

Outcome lsbp_recovery() {
  ScenarioSpec s;
  s.id = ScenarioId::C1;
  s.n = {500, 500, 500};
  s.replicates = 10;
  LsbpEstimatorConfig cfg;
  cfg.length = {2000, 5000};
  std::vector<double> x;
  for (int j = 0; j <= 16; ++j) x.push_back(-0.8 + 0.1 * j);
  const auto r = run_curve_replicates(s, lsbp_estimator(cfg), x);
  return {r.failures == 0 && r.mae <= kCurveMaeTol,
          "MAE " + num(r.mae) + " (tol " + num(kCurveMaeTol) + "), failures " + std::to_string(r.failures)};
}

struct ChainCheck {
  bool ok = true;
  std::string detail;
  void add(const std::string& name, const std::vector<double>& chain, double target) {
    const double mean = std::accumulate(chain.begin(), chain.end(), 0.0) / static_cast<double>(chain.size());
    double var = 0.0;
    for (double v : chain) var += (v - mean) * (v - mean);
    var /= static_cast<double>(chain.size()) - 1.0;
    const double z = (mean - target) / std::sqrt(var / ess(chain));
    ok = ok && std::abs(z) <= kMcSigmas;
    detail += (detail.empty() ? "" : ", ") + name + " z=" + num(z, 3);
  }
};

Outcome sampler_oracles() {
  ChainCheck check;
  for (double c : {0.0, 0.5, 2.0, 5.0}) {
    RngStream rng(8008, static_cast<std::uint64_t>(c * 10));
    double s = 0.0;
    for (std::size_t i = 0; i < kPgDraws; ++i) s += sample_pg1(c, rng);
    const double var = c == 0.0 ? 1.0 / 24.0
                                : (std::sinh(c) - c) / (4.0 * c * c * c * std::cosh(0.5 * c) * std::cosh(0.5 * c));
    const double z = (s / kPgDraws - pg1_mean(c)) / std::sqrt(var / kPgDraws);
    check.ok = check.ok && std::abs(z) <= kMcSigmas;
    check.detail += (check.detail.empty() ? "" : ", ") + ("PG(1," + num(c, 2) + ") z=" + num(z, 3));
  }

  RngStream data_rng(8008, 100);
  std::vector<double> y(30);
  for (double& v : y) v = 3.0 + 2.0 * data_rng.normal();
  DpmHyper h;
  h.L = 1;
  RngStream rng(8008, 101);
  const auto draws = fit_dpm(y, h, 1000, 50000, rng);
  std::vector<double> mu, s2;
  for (const auto& d : draws) {
    mu.push_back(d.means[0]);
    s2.push_back(d.variances[0]);
  }
  const auto dpm_oracle = testing_oracles::normal_semi_conjugate(y, h);
  check.add("DPM mu", mu, dpm_oracle.mean_mu);
  check.add("DPM s2", s2, dpm_oracle.mean_sigma2);

  GroupDataset data;
  data.label = "g";
  std::vector<double> x(40);
  for (double& v : x) {
    v = -1.0 + 2.0 * data_rng.uniform();
    data.outcomes.push_back(1.0 + 2.0 * v + 0.7 * data_rng.normal());
  }
  data.covariates["x"] = x;
  LsbpHyper lh;
  lh.L = 1;
  RngStream lrng(8008, 102);
  const auto fit = fit_lsbp(data, parse_effect_spec("x:w=none,m=linear"), lh, {1000, 40000}, lrng);
  Eigen::MatrixXd U(40, 2);
  Eigen::VectorXd z(40);
  for (Eigen::Index i = 0; i < 40; ++i) {
    U.row(i) = fit.rows(data.record(static_cast<std::size_t>(i))).second.transpose();
    z[i] = (data.outcomes[static_cast<std::size_t>(i)] - fit.y_mean) / fit.y_sd;
  }
  const auto reg = testing_oracles::regression_semi_conjugate(U, z, Eigen::Vector2d::Zero(),
                                                              10.0 * Eigen::MatrixXd::Identity(2, 2), 2.0, 0.5);
  std::vector<double> b0, b1, v;
  for (const auto& d : fit.draws) {
    b0.push_back(d.beta[0][0]);
    b1.push_back(d.beta[0][1]);
    v.push_back(d.variances[0]);
  }
  check.add("LSBP b0", b0, reg.mean_beta[0]);
  check.add("LSBP b1", b1, reg.mean_beta[1]);
  check.add("LSBP s2", v, reg.mean_sigma2);
  return {check.ok, check.detail};
}

Outcome design_selection() {
  std::size_t linear_hits = 0, spline_hits = 0;
  for (std::size_t r = 0; r < kSelectionReps; ++r) {
    for (ScenarioId id : {ScenarioId::C1, ScenarioId::C2}) {
      ScenarioSpec s;
      s.id = id;
      s.n = {kSelectionN, kSelectionN, kSelectionN};
      const auto data = generate(s, r);
      const auto sel = select_design(data[0], default_candidates("x"), LsbpHyper{}, {1000, 2000}, s.seed,
                                     fit_stream(r, 0) + (std::uint64_t{1} << 20));
      const auto& term = sel.spec().terms.front();
      if (id == ScenarioId::C1) {
        linear_hits += term.weights.kind == EncodingKind::linear && term.means.kind == EncodingKind::linear ? 1 : 0;
      } else {
        spline_hits += term.means.kind == EncodingKind::bspline ? 1 : 0;
      }
    }
  }
  const double need = kSelectionRate * static_cast<double>(kSelectionReps);
  return {static_cast<double>(linear_hits) >= need && static_cast<double>(spline_hits) >= need,
          "linear truth -> linear " + std::to_string(linear_hits) + "/" + std::to_string(kSelectionReps) +
              ", sine mean -> spline mean " + std::to_string(spline_hits) + "/" + std::to_string(kSelectionReps)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Runs the command twice with different thread counts and compares every
// file written into the two output directories.
bool cli_deterministic(const fs::path& root, const std::string& name, const std::string& args, std::string& note) {
  std::vector<std::map<std::string, std::string>> outputs;
  for (int threads : {1, 3}) {
    const fs::path dir = root / (name + "_" + std::to_string(threads));
    fs::create_directories(dir);
    std::string cmd = std::string("\"") + UNL_CLI_PATH + "\" --threads " + std::to_string(threads) + " " + args;
    std::size_t pos;
    while ((pos = cmd.find("@OUT")) != std::string::npos) cmd.replace(pos, 4, dir.string());
    cmd += " > \"" + (dir / "stdout.txt").string() + "\" 2> \"" + (dir / "stderr.txt").string() + "\"";
    if (std::system(cmd.c_str()) != 0) {
      note = name + " exited with an error: " + slurp(dir / "stderr.txt");
      return false;
    }
    std::map<std::string, std::string> files;
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.path().filename() == "stderr.txt") continue;
      // Progress lines name the output directory, which differs by design.
      std::string text = slurp(e.path());
      for (std::size_t at; (at = text.find(dir.string())) != std::string::npos;) text.replace(at, dir.string().size(), "@OUT");
      files[e.path().filename().string()] = std::move(text);
    }
    outputs.push_back(std::move(files));
  }
  for (const auto& [file, text] : outputs[0]) {
    const auto other = outputs[1].find(file);
    if (other == outputs[1].end() || other->second != text) {
      note = name + " output " + file + " differs between runs";
      return false;
    }
  }
  if (outputs[0].size() != outputs[1].size()) {
    note = name + " wrote a different set of files";
    return false;
  }
  return true;
}

Outcome properties() {
  std::vector<std::string> notes;
  bool ok = true;

  // Partition of unity.
  RngStream rng(1010, 0);
  double worst_pu = 0.0;
  bool nonneg = true;
  for (std::size_t k = 0; k <= 20; ++k) {
    KnotVector knots{-2.0, 3.0, {}};
    for (std::size_t j = 0; j < k; ++j) knots.interior.push_back(-2.0 + 5.0 * rng.uniform());
    std::sort(knots.interior.begin(), knots.interior.end());
    knots.validate();
    for (int i = 0; i < 1000; ++i) {
      const auto b = bspline_basis_full(i == 0 ? -2.0 : (i == 1 ? 3.0 : -2.0 + 5.0 * rng.uniform()), knots);
      worst_pu = std::max(worst_pu, std::abs(std::accumulate(b.begin(), b.end(), 0.0) - 1.0));
      for (double v : b) nonneg = nonneg && v >= 0.0;
    }
  }
  ok = ok && worst_pu <= kPartitionTol && nonneg;
  notes.push_back("partition of unity " + num(worst_pu, 3));

  // Simpson exactness on cubics, in units of the rounding scale of the sum.
  double worst_ulps = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const double a = -3.0 + 2.0 * rng.uniform(), b = a + 0.5 + 4.0 * rng.uniform();
    const std::size_t n = 3 + 2 * static_cast<std::size_t>(rng.uniform() * 10.0);
    std::array<double, 4> c{};
    for (double& v : c) v = 2.0 * rng.uniform() - 1.0;
    const auto g = make_grid(a, b, n);
    std::vector<double> vals;
    long double scale = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = g.points[i];
      vals.push_back(((c[3] * x + c[2]) * x + c[1]) * x + c[0]);
      const double w = (i == 0 || i + 1 == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      scale += std::abs(w * vals.back()) * g.spacing() / 3.0L;
    }
    auto anti = [&](long double x) {
      return ((((c[3] / 4.0L) * x + c[2] / 3.0L) * x + c[1] / 2.0L) * x + c[0]) * x;
    };
    // The grid points themselves carry rounding; use them as the exact nodes.
    long double exact = 0.0L;
    for (std::size_t i = 0; i + 2 < n; i += 2) exact += anti(g.points[i + 2]) - anti(g.points[i]);
    const double err = std::abs(static_cast<double>(simpson(vals, g.spacing()) - exact));
    worst_ulps = std::max(worst_ulps, err / (std::numeric_limits<double>::epsilon() * static_cast<double>(scale)));
  }
  ok = ok && worst_ulps <= kSimpsonUlps;
  notes.push_back("Simpson cubic " + num(worst_ulps, 3) + " ulps");

  // Weight simplex on every saved draw.
  ScenarioSpec s;
  s.n = {150, 150, 150};
  const auto data = generate(s, 0);
  RngStream drng(1010, 1);
  double worst_simplex = 0.0;
  bool nonneg_w = true;
  for (const auto& d : fit_dpm(data[0].outcomes, DpmHyper{}, 200, 1000, drng)) {
    worst_simplex = std::max(worst_simplex, std::abs(std::accumulate(d.weights.begin(), d.weights.end(), 0.0) - 1.0));
    for (double w : d.weights) nonneg_w = nonneg_w && w >= 0.0;
  }
  s.id = ScenarioId::C3;
  const auto cdata = generate(s, 0);
  RngStream lrng(1010, 2);
  const auto fit = fit_lsbp(cdata[1], parse_effect_spec("x:w=bspline(2),m=linear"), LsbpHyper{}, {200, 500}, lrng);
  std::vector<Eigen::VectorXd> rows;
  for (std::size_t i = 0; i < cdata[1].size(); ++i) rows.push_back(fit.rows(cdata[1].record(i)).first);
  for (const auto& d : fit.draws) {
    for (const auto& z : rows) {
      const auto w = d.weights(z);
      worst_simplex = std::max(worst_simplex, std::abs(std::accumulate(w.begin(), w.end(), 0.0) - 1.0));
      for (double v : w) nonneg_w = nonneg_w && v >= 0.0;
    }
  }
  ok = ok && worst_simplex <= kSimplexTol && nonneg_w;
  notes.push_back("simplex " + num(worst_simplex, 3));

  // Tail weight beyond the truncation under the prior.
  RngStream trng(1010, 3);
  const std::size_t n_tail = 1000000;
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < n_tail; ++i) {
    double rest = 1.0;
    for (int l = 0; l < 20; ++l) rest *= 1.0 - trng.beta(1.0, 1.0);
    sum += rest;
    sum2 += rest * rest;
  }
  const double mean = sum / n_tail, se = std::sqrt((sum2 / n_tail - mean * mean) / n_tail);
  const double tail_z = (mean - std::pow(0.5, 20.0)) / se;
  ok = ok && std::abs(tail_z) <= kMcSigmas;
  notes.push_back("tail z=" + num(tail_z, 3));

  // Byte-determinism of seeded CLI runs.
  const fs::path root = fs::temp_directory_path() / ("unl_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  {
    ScenarioSpec u;
    u.n = {60, 60, 60};
    const auto g = generate(u, 0);
    std::ofstream f(root / "uncond.csv");
    write_dataset(f, std::vector<GroupDataset>(g.begin(), g.end()));
    ScenarioSpec c;
    c.id = ScenarioId::C1;
    c.n = {60, 60, 60};
    const auto gc = generate(c, 0);
    DatasetSchema schema;
    schema.covariates = {"x"};
    std::ofstream fc(root / "cond.csv");
    write_dataset(fc, std::vector<GroupDataset>(gc.begin(), gc.end()), schema);
    std::ofstream ea(root / "a.csv"), eb(root / "b.csv");
    write_ensemble(ea, ScalarEnsemble{"a", {1.0, 2.0, 3.0, 4.0}, 0});
    write_ensemble(eb, ScalarEnsemble{"b", {1.5, 1.5, 3.5, 3.5}, 0});
  }
  const std::string u = "\"" + (root / "uncond.csv").string() + "\"";
  const std::string c = "\"" + (root / "cond.csv").string() + "\"";
  const std::vector<std::pair<std::string, std::string>> runs{
      {"measures", "measures --density normal:0,1 --density gamma:3,1.5 --density sn:6,2,5 --out @OUT/m.csv"},
      {"fit", "fit --data " + u + " --burn 50 --save 100 --grid-points 201 --seed 5 --out-dir @OUT"},
      {"fit-cov", "fit-cov --data " + c + " --covariates x --effect 'x:w=linear,m=bspline(1)' --burn 30 --save 40 "
                  "--components 5 --grid-points 201 --x-points 5 --seed 6 --out-dir @OUT"},
      {"fit-cov-select", "fit-cov --data " + c + " --covariates x --select-design --select-burn 10 --select-save 20 "
                         "--burn 10 --save 20 --components 4 --grid-points 101 --x-points 3 --seed 7 --out-dir @OUT"},
      {"simulate", "simulate U-II mid --n 40 --reps 2 --burn 30 --save 50 --grid-points 201 --seed 8 "
                   "--out @OUT/report.csv --records @OUT/records.csv"},
      {"simulate-cov", "simulate C-II --n 40 --reps 2 --burn 20 --save 30 --components 5 --grid-points 201 "
                       "--x-points 3 --seed 9 --out @OUT/report.csv"},
      {"ppc", "ppc --data " + u + " --burn 30 --save 100 --reps 100 --stat kurtosis --seed 10 --out @OUT/ppc.csv"},
      {"ppc-cov", "ppc --data " + c + " --covariates x --effect x:w=linear,m=linear --components 5 --burn 20 "
                  "--save 100 --reps 100 --stat skewness --seed 11 --out @OUT/ppc.csv"},
      {"compare", "compare \"" + (root / "a.csv").string() + "\" \"" + (root / "b.csv").string() +
                      "\" --out @OUT/cmp.csv"},
  };
  std::size_t identical = 0;
  for (const auto& [name, args] : runs) {
    std::string note;
    if (cli_deterministic(root, name, args, note)) {
      ++identical;
    } else {
      ok = false;
      notes.push_back(note);
    }
  }
  notes.push_back("CLI runs identical " + std::to_string(identical) + "/" + std::to_string(runs.size()));
  fs::remove_all(root);

  std::string detail;
  for (const auto& n : notes) detail += (detail.empty() ? "" : ", ") + n;
  return {ok, detail};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "table values", table_values},
      {2, "trinormal closed forms", trinormal},
      {3, "identity suite", identities},
      {4, "exp-transform invariance", invariance},
      {5, "DPM recovery U-I/high", dpm_recovery},
      {6, "bias regime U-I/low", low_bias},
      {7, "LSBP recovery C-I", lsbp_recovery},
      {8, "sampler oracles", sampler_oracles},
      {9, "design selection", design_selection},
      {10, "property suites", properties},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.contains(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::cout << "criterion " << c.id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << c.name << " | " << o.detail
              << " | " << num(seconds_since(t0), 4) << " s" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
