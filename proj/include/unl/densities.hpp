#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "unl/rng.hpp"

namespace unl {

struct Normal {
  double mean = 0.0;
  double sd = 1.0;
};

/// Gamma with (shape, rate); mean shape/rate.
struct Gamma {
  double shape = 1.0;
  double rate = 1.0;
};

/// Azzalini skew-normal: 2/omega * phi(z) * Phi(alpha z), z = (y - location)/omega.
struct SkewNormal {
  double location = 0.0;
  double scale = 1.0;
  double shape = 0.0;
};

struct NormalMixture {
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> sds;
};

using DensitySpec = std::variant<Normal, Gamma, SkewNormal, NormalMixture>;

/// Throws std::invalid_argument naming the offending parameter.
void validate(const DensitySpec& spec);

double pdf_at(const DensitySpec& spec, double y);
double cdf_at(const DensitySpec& spec, double y);
double mean_of(const DensitySpec& spec);
double sd_of(const DensitySpec& spec);

double sample_one(const DensitySpec& spec, RngStream& rng);
std::vector<double> sample(const DensitySpec& spec, std::size_t n, RngStream& rng);

/// Parses "normal:mu,sd", "gamma:shape,rate", "sn:xi,omega,alpha" and
/// "mix:w1,mu1,sd1;w2,mu2,sd2;...".
DensitySpec parse_density(std::string_view text);
std::string to_string(const DensitySpec& spec);

}  // namespace unl
