#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace unl {

/// Equally spaced abscissa used for density evaluation and Simpson integration.
/// The number of points is odd so that it splits into whole Simpson panels.
struct EvaluationGrid {
  double lower = 0.0;
  double upper = 0.0;
  std::vector<double> points;

  std::size_t size() const { return points.size(); }
  double spacing() const { return (upper - lower) / static_cast<double>(points.size() - 1); }
  bool same_as(const EvaluationGrid& other) const;
};

/// Default number of grid points for posterior functionals.
inline constexpr std::size_t kDefaultGridPoints = 501;

EvaluationGrid make_grid(double lower, double upper, std::size_t n_points);

/// Grid covering [min - pad*R, max + pad*R] of the pooled data. With
/// include_zero the lower end is pushed to at most -pad*R so that densities
/// with mass near or below zero are covered.
EvaluationGrid padded_grid(std::span<const double> pooled, std::size_t n_points = kDefaultGridPoints,
                           double pad = 0.15, bool include_zero = false);

/// Composite Simpson rule over an odd number of equally spaced values.
double simpson(std::span<const double> values, double spacing);

enum class Envelope { max, min };

/// Integral of the pointwise max (or min) of several gridded functions.
///
/// On every Simpson panel each function is replaced by its quadratic
/// interpolant (the polynomial Simpson integrates exactly) and the envelope
/// of those quadratics is integrated exactly, splitting the panel at the
/// crossings. Where one function dominates a whole panel this is plain
/// Simpson; at a crossing it avoids the O(h^2) error Simpson makes on a kink.
double envelope_simpson(std::span<const std::span<const double>> rows, double spacing, Envelope kind);

/// Integral over [a, b] of the piecewise-quadratic Simpson interpolant of
/// gridded values. a and b are clamped to the grid.
double interpolant_integral(std::span<const double> values, const EvaluationGrid& grid, double a, double b);

/// Value of the piecewise-quadratic Simpson interpolant at x.
double interpolant_value(std::span<const double> values, const EvaluationGrid& grid, double x);

/// Running Simpson-interpolant integral from grid.lower to each grid point.
std::vector<double> cumulative_integral(std::span<const double> values, const EvaluationGrid& grid);

double std_normal_pdf(double x);
/// Phi(x) = erfc(-x/sqrt(2))/2; absolute error well below 1e-12.
double std_normal_cdf(double x);
/// log Phi(x), accurate in the far left tail where Phi underflows.
double log_std_normal_cdf(double x);
double normal_pdf(double x, double mean, double sd);
double normal_log_pdf(double x, double mean, double variance);

}  // namespace unl
