#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "unl/densities.hpp"
#include "unl/numerics.hpp"

namespace unl {

/// Default tolerance on |integral - 1| accepted for a gridded density.
inline constexpr double kDefaultNormTolerance = 0.01;

/// Density values on a grid. `evaluator`, when set, gives the exact density
/// off the grid and is used to refine intersection locations.
struct GriddedDensity {
  EvaluationGrid grid;
  std::vector<double> values;
  std::function<double(double)> evaluator;
};

/// Nondecreasing CDF values on a grid.
struct GriddedCdf {
  EvaluationGrid grid;
  std::vector<double> values;
};

struct MeasureOptions {
  double norm_tolerance = kDefaultNormTolerance;
  bool check_normalization = true;
};

GriddedDensity grid_density(const DensitySpec& spec, const EvaluationGrid& grid);
GriddedCdf grid_cdf(const DensitySpec& spec, const EvaluationGrid& grid);
/// CDF by cumulative integration of the density's Simpson interpolant.
GriddedCdf cdf_from_density(const GriddedDensity& density);

/// Throws if the density is negative somewhere or does not integrate to one
/// within the tolerance.
void check_density(const GriddedDensity& density, double norm_tolerance);

/// Underlap coefficient: integral of the pointwise maximum of H >= 2 densities.
double unl(std::span<const GriddedDensity> densities, const MeasureOptions& options = {});
double unl(const GriddedDensity& f1, const GriddedDensity& f2, const GriddedDensity& f3,
           const MeasureOptions& options = {});

double ovl2(const GriddedDensity& f, const GriddedDensity& g, const MeasureOptions& options = {});
double ovl3(const GriddedDensity& f1, const GriddedDensity& f2, const GriddedDensity& f3,
            const MeasureOptions& options = {});
/// 3 - OVL12 - OVL13 - OVL23 + OVL123.
double unl_from_ovl(const GriddedDensity& f1, const GriddedDensity& f2, const GriddedDensity& f3,
                    const MeasureOptions& options = {});

struct YoudenResult {
  double value = 1.0;
  double c1 = 0.0;
  double c2 = 0.0;
};

/// Three-class Youden index max_{c1 < c2} F1(c1) + F2(c2) - F2(c1) - F3(c2) + 1
/// over grid thresholds. Ties resolve to the smallest thresholds.
YoudenResult yi3(const GriddedCdf& F1, const GriddedCdf& F2, const GriddedCdf& F3);
/// Same search over raw CDF values sharing one grid.
YoudenResult yi3_values(std::span<const double> F1, std::span<const double> F2, std::span<const double> F3,
                        const EvaluationGrid& grid);

/// Pr(Y1 < Y2 < Y3) from samples, counting a tie with Y2 as one half per side.
double vus_empirical(std::span<const double> s1, std::span<const double> s2, std::span<const double> s3);
/// Pr(Y1 < Y2 < Y3) = integral of F1 f2 (1 - F3) on a shared grid.
double vus_from_curves(const GriddedCdf& F1, const GriddedDensity& f2, const GriddedCdf& F3);
double vus_trinormal(double mu1, double mu2, double mu3, double sigma);
/// Closed form 2 Phi((mu3-mu2)/2s) + 2 Phi((mu2-mu1)/2s) - 1 for mu1 <= mu2 <= mu3.
double unl_trinormal(double mu1, double mu2, double mu3, double sigma);

enum class IntersectionKind { outer, inner };

struct IntersectionPoint {
  double location = 0.0;
  IntersectionKind kind = IntersectionKind::outer;
  std::pair<int, int> equal_pair{0, 1};  // zero-based group indices
  double height = 0.0;                   // shared density value M
};

/// Every crossing of two of the three densities, refined by bisection to
/// 1e-8, labelled outer (third density below M) or inner (above). Crossings
/// within one grid cell of each other are merged; tangential contacts,
/// identical pairs and triple points are not reported.
std::vector<IntersectionPoint> classify_intersections(const GriddedDensity& f1, const GriddedDensity& f2,
                                                      const GriddedDensity& f3);

/// Sum over the intervals cut by the sorted outer points of the integral of
/// the density that is largest inside each interval.
double unl_from_partition(const GriddedDensity& f1, const GriddedDensity& f2, const GriddedDensity& f3,
                          std::span<const double> outer_points);

}  // namespace unl
