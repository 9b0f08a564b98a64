#pragma once

#include <atomic>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "unl/dataset.hpp"

namespace unl {

/// Boundary and interior knots of a clamped cubic B-spline basis.
struct KnotVector {
  double lower = 0.0;
  double upper = 1.0;
  std::vector<double> interior;

  /// Throws unless lower < interior... < upper strictly.
  void validate() const;
  std::size_t interior_count() const { return interior.size(); }
  /// Boundary knots at the sample min/max, interior knots at the
  /// j/(K+1) sample quantiles.
  static KnotVector from_sample(std::span<const double> x, std::size_t interior_knots);
};

/// All K+4 clamped cubic B-spline functions at x (Cox-de Boor recursion).
/// Requires lower <= x <= upper.
std::vector<double> bspline_basis_full(double x, const KnotVector& knots);

/// K+3 columns: the full basis with its first function dropped, so that it
/// can sit next to an intercept without collinearity.
std::vector<double> bspline_basis(double x, const KnotVector& knots);

enum class EncodingKind { none, linear, categorical, bspline };

struct Encoding {
  EncodingKind kind = EncodingKind::linear;
  std::size_t interior_knots = 0;  // bspline only

  static Encoding none() { return {EncodingKind::none, 0}; }
  static Encoding linear() { return {EncodingKind::linear, 0}; }
  static Encoding categorical() { return {EncodingKind::categorical, 0}; }
  static Encoding bspline(std::size_t k) { return {EncodingKind::bspline, k}; }
  bool operator==(const Encoding&) const = default;
};

/// A covariate (or a product of continuous covariates, named "a*b") and how
/// it enters the stick-breaking weights and the component means.
struct EffectTerm {
  std::string name;
  Encoding weights = Encoding::linear();
  Encoding means = Encoding::linear();
  bool operator==(const EffectTerm&) const = default;
};

struct EffectSpec {
  std::vector<EffectTerm> terms;

  /// Throws if a term uses B-splines on both predictors, or if any term
  /// uses B-splines on the weights while another uses them on the means.
  void validate() const;
  /// Compact text form, e.g. "x:w=linear,m=bspline(1)".
  std::string label() const;
  bool operator==(const EffectSpec&) const = default;
};

/// Parses the label() form: terms separated by ';', each "name:w=ENC,m=ENC"
/// with ENC one of none, linear, cat, bspline(K).
EffectSpec parse_effect_spec(const std::string& text);

enum class Predictor { weights, means };

/// An EffectSpec resolved against a dataset: continuous covariates are
/// standardized with the sample mean and sd, categorical levels are fixed
/// (first sorted level is the reference), and knots are placed on the
/// standardized sample.
class DesignMap {
 public:
  DesignMap(const EffectSpec& spec, const GroupDataset& data);

  std::size_t dimension(Predictor target) const;
  /// Intercept followed by each term's columns in declared order. Continuous
  /// values beyond the fitted range are clamped for spline terms (a warning
  /// is written to stderr once); `strict` turns that into an error.
  std::vector<double> row(const CovariateRecord& record, Predictor target, bool strict = false) const;
  const EffectSpec& spec() const { return spec_; }

  struct Resolved {
    EffectTerm term;
    bool continuous = true;
    std::vector<std::string> factors;  // product components, or the name itself
    double mean = 0.0;
    double sd = 1.0;  // zero marks a constant covariate, encoded as 0
    std::vector<std::string> levels;  // categorical
    KnotVector weight_knots;
    KnotVector mean_knots;
  };
  const std::vector<Resolved>& terms() const { return terms_; }

 private:
  double continuous_value(const Resolved& r, const CovariateRecord& record) const;

  EffectSpec spec_;
  std::vector<Resolved> terms_;
  std::shared_ptr<std::atomic<bool>> warned_ = std::make_shared<std::atomic<bool>>(false);
};

/// Free-function form of DesignMap::row.
std::vector<double> design_row(const CovariateRecord& record, const DesignMap& design, Predictor target);

}  // namespace unl
