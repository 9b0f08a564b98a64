#pragma once

#include "unl/rng.hpp"

namespace unl {

/// Exact draw from the Polya-gamma distribution PG(1, c).
///
/// Devroye's alternating-series accept/reject scheme: proposals come from a
/// mixture of an inverse-Gaussian truncated to (0, 0.64] and an exponential
/// tail on (0.64, inf); acceptance is decided by the alternating series for
/// the Jacobi density. The distribution depends on c only through |c|.
/// Throws std::invalid_argument for non-finite c.
double sample_pg1(double c, RngStream& rng);

/// E[PG(1, c)] = tanh(c/2) / (2c), with limit 1/4 at c = 0.
double pg1_mean(double c);

}  // namespace unl
