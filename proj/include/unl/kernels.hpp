#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

#include "unl/dpm.hpp"
#include "unl/lsbp.hpp"
#include "unl/numerics.hpp"

/// Per-draw functional evaluation. Each kernel has a serial reference and an
/// OpenMP version; every output element is computed by the same arithmetic
/// in both, so results agree bit for bit regardless of thread count.
namespace unl::kernels {

enum class Exec { serial, parallel };

struct DrawValues {
  std::vector<double> values;
  /// Draws whose gridded density missed |integral - 1| <= tolerance.
  std::size_t norm_failures = 0;
};

/// UNL of (d1[s], d2[s], d3[s]) for every s.
DrawValues unl_per_draw(const std::vector<MixtureDraw>& d1, const std::vector<MixtureDraw>& d2,
                        const std::vector<MixtureDraw>& d3, const EvaluationGrid& grid, double norm_tolerance,
                        Exec exec);

/// YI3 of the analytic mixture CDFs of (d1[s], d2[s], d3[s]) for every s.
std::vector<double> yi3_per_draw(const std::vector<MixtureDraw>& d1, const std::vector<MixtureDraw>& d2,
                                 const std::vector<MixtureDraw>& d3, const EvaluationGrid& grid, Exec exec);

/// Design rows of one fit at each covariate value.
struct FitRows {
  const FitResult* fit = nullptr;
  std::vector<Eigen::VectorXd> z;
  std::vector<Eigen::VectorXd> u;
};
FitRows rows_for(const FitResult& fit, const std::vector<CovariateRecord>& x);

/// Row-major S x |x| matrix of conditional UNL values.
DrawValues covariate_unl(const FitRows& f1, const FitRows& f2, const FitRows& f3, const EvaluationGrid& grid,
                         double norm_tolerance, Exec exec);

}  // namespace unl::kernels
