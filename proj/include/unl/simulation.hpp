#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "unl/dataset.hpp"
#include "unl/densities.hpp"
#include "unl/dpm.hpp"
#include "unl/lsbp.hpp"

namespace unl {

enum class ScenarioId { U1, U2, U3, C1, C2, C3 };
enum class ScenarioConfig { high, mid, low };

struct ScenarioSpec {
  ScenarioId id = ScenarioId::U1;
  ScenarioConfig config = ScenarioConfig::high;  // ignored for conditional scenarios
  std::array<std::size_t, 3> n{200, 200, 200};
  std::size_t replicates = 20;
  std::uint64_t seed = 1;

  bool conditional() const;
  /// "U-I/high", "C-II", ...
  std::string name() const;
  void validate() const;
};

/// Accepts "U-I", "U-II", "U-III", "C-I", "C-II", "C-III".
ScenarioId parse_scenario_id(const std::string& text);
/// Accepts "high", "mid", "low".
ScenarioConfig parse_scenario_config(const std::string& text);
std::string to_string(ScenarioId id);
std::string to_string(ScenarioConfig config);

/// The three group distributions of an unconditional scenario.
std::array<DensitySpec, 3> scenario_densities(ScenarioId id, ScenarioConfig config);
/// The three conditional distributions of a conditional scenario at x.
std::array<DensitySpec, 3> conditional_densities(ScenarioId id, double x);

/// Tabulated UNL of an unconditional scenario.
double scenario_truth(const ScenarioSpec& spec);
/// UNL of the analytic conditional densities at x, by Simpson on a
/// 2001-point grid spanning 8 conditional sds around every group.
double conditional_truth(ScenarioId id, double x);
std::vector<double> conditional_truth_curve(ScenarioId id, std::span<const double> x);

/// Three datasets for replicate r, from independent streams keyed by
/// (seed, r, group). Conditional scenarios carry a continuous covariate "x"
/// drawn from Uniform(-1, 1).
std::array<GroupDataset, 3> generate(const ScenarioSpec& spec, std::size_t replicate);

/// Stream ids reserved for the data of (replicate, group) and for fitting it.
std::uint64_t data_stream(std::size_t replicate, std::size_t group);
std::uint64_t fit_stream(std::size_t replicate, std::size_t group);

/// Point estimate and credible interval from one replicate.
struct Interval {
  double median = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

using Estimator = std::function<Interval(const std::array<GroupDataset, 3>&, std::size_t replicate)>;

struct ReplicateRecord {
  std::size_t replicate = 0;
  bool ok = false;
  Interval estimate;
  std::string error;
};

struct CoverageReport {
  std::string scenario;
  std::array<std::size_t, 3> n{};
  double truth = 0.0;
  std::size_t replicates = 0;
  std::size_t failures = 0;
  double mean_median = 0.0;
  double bias = 0.0;
  double coverage = 0.0;
  double mean_width = 0.0;
  std::vector<ReplicateRecord> records;
};

/// Runs the estimator on every replicate (in parallel) and compares with the
/// scenario truth. A throwing replicate is recorded as failed and excluded
/// from the averages.
CoverageReport run_replicates(const ScenarioSpec& spec, const Estimator& estimator);

/// DPM fits of the three groups, UNL ensemble on a padded grid, median and
/// central interval. Fitting streams come from fit_stream(replicate, g).
struct DpmEstimatorConfig {
  DpmHyper hyper;
  McmcLength length;
  std::size_t grid_points = kDefaultGridPoints;
  double level = 0.95;
  std::uint64_t seed = 1;
};
Estimator dpm_estimator(const DpmEstimatorConfig& config);

/// Curve version for conditional scenarios.
struct CurveInterval {
  std::vector<double> median, lower, upper;
};
using CurveEstimator =
    std::function<CurveInterval(const std::array<GroupDataset, 3>&, std::size_t replicate, std::span<const double> x)>;

struct CurveReport {
  std::string scenario;
  std::array<std::size_t, 3> n{};
  std::vector<double> x;
  std::vector<double> truth;
  std::size_t replicates = 0;
  std::size_t failures = 0;
  std::vector<double> mean_median;    // per x
  std::vector<double> coverage;       // per x
  std::vector<double> mean_abs_error; // per replicate, averaged over x
  double mae = 0.0;                   // mean of mean_abs_error
  std::vector<std::string> errors;
};

CurveReport run_curve_replicates(const ScenarioSpec& spec, const CurveEstimator& estimator,
                                 std::span<const double> x);

struct LsbpEstimatorConfig {
  LsbpHyper hyper;
  McmcLength length;
  /// Same spec for all groups unless per-group selection is requested.
  EffectSpec spec = EffectSpec{{EffectTerm{"x", Encoding::linear(), Encoding::linear()}}};
  bool select = false;
  McmcLength selection_length{1000, 2000};
  std::size_t grid_points = kDefaultGridPoints;
  double level = 0.95;
  std::uint64_t seed = 1;
};
CurveEstimator lsbp_estimator(const LsbpEstimatorConfig& config);

}  // namespace unl
