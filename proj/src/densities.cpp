#include "unl/densities.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/owens_t.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "unl/numerics.hpp"

namespace unl {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be positive and finite");
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be finite");
}

std::vector<double> parse_numbers(std::string_view text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    std::string field(text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
    const auto first = field.find_first_not_of(" \t");
    const auto last = field.find_last_not_of(" \t");
    if (first == std::string::npos) throw std::invalid_argument("density spec: empty number");
    field = field.substr(first, last - first + 1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
      throw std::invalid_argument("density spec: cannot parse number '" + field + "'");
    }
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace

void validate(const DensitySpec& spec) {
  std::visit(overloaded{
                 [](const Normal& d) {
                   require_finite(d.mean, "normal mean");
                   require_positive(d.sd, "normal sd");
                 },
                 [](const Gamma& d) {
                   require_positive(d.shape, "gamma shape");
                   require_positive(d.rate, "gamma rate");
                 },
                 [](const SkewNormal& d) {
                   require_finite(d.location, "skew-normal location");
                   require_positive(d.scale, "skew-normal scale");
                   require_finite(d.shape, "skew-normal shape");
                 },
                 [](const NormalMixture& d) {
                   if (d.weights.empty() || d.weights.size() != d.means.size() || d.weights.size() != d.sds.size()) {
                     throw std::invalid_argument("normal mixture: weights, means and sds must have equal nonzero length");
                   }
                   double total = 0.0;
                   for (std::size_t k = 0; k < d.weights.size(); ++k) {
                     if (!(d.weights[k] >= 0.0)) throw std::invalid_argument("normal mixture weight must be nonnegative");
                     require_finite(d.means[k], "normal mixture mean");
                     require_positive(d.sds[k], "normal mixture sd");
                     total += d.weights[k];
                   }
                   if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("normal mixture weights must sum to 1");
                 },
             },
             spec);
}

double pdf_at(const DensitySpec& spec, double y) {
  return std::visit(overloaded{
                        [y](const Normal& d) { return normal_pdf(y, d.mean, d.sd); },
                        [y](const Gamma& d) {
                          if (y <= 0.0) return 0.0;
                          return std::exp(d.shape * std::log(d.rate) + (d.shape - 1.0) * std::log(y) - d.rate * y -
                                          std::lgamma(d.shape));
                        },
                        [y](const SkewNormal& d) {
                          const double z = (y - d.location) / d.scale;
                          return 2.0 / d.scale * std_normal_pdf(z) * std_normal_cdf(d.shape * z);
                        },
                        [y](const NormalMixture& d) {
                          double s = 0.0;
                          for (std::size_t k = 0; k < d.weights.size(); ++k) s += d.weights[k] * normal_pdf(y, d.means[k], d.sds[k]);
                          return s;
                        },
                    },
                    spec);
}

double cdf_at(const DensitySpec& spec, double y) {
  return std::visit(overloaded{
                        [y](const Normal& d) { return std_normal_cdf((y - d.mean) / d.sd); },
                        [y](const Gamma& d) {
                          if (y <= 0.0) return 0.0;
                          return boost::math::gamma_p(d.shape, d.rate * y);
                        },
                        [y](const SkewNormal& d) {
                          const double z = (y - d.location) / d.scale;
                          const double v = std_normal_cdf(z) - 2.0 * boost::math::owens_t(z, d.shape);
                          return std::clamp(v, 0.0, 1.0);
                        },
                        [y](const NormalMixture& d) {
                          double s = 0.0;
                          for (std::size_t k = 0; k < d.weights.size(); ++k) {
                            s += d.weights[k] * std_normal_cdf((y - d.means[k]) / d.sds[k]);
                          }
                          return std::min(s, 1.0);
                        },
                    },
                    spec);
}

double mean_of(const DensitySpec& spec) {
  return std::visit(overloaded{
                        [](const Normal& d) { return d.mean; },
                        [](const Gamma& d) { return d.shape / d.rate; },
                        [](const SkewNormal& d) {
                          const double delta = d.shape / std::sqrt(1.0 + d.shape * d.shape);
                          return d.location + d.scale * delta * std::sqrt(2.0 / std::numbers::pi);
                        },
                        [](const NormalMixture& d) {
                          return std::inner_product(d.weights.begin(), d.weights.end(), d.means.begin(), 0.0);
                        },
                    },
                    spec);
}

double sd_of(const DensitySpec& spec) {
  return std::visit(overloaded{
                        [](const Normal& d) { return d.sd; },
                        [](const Gamma& d) { return std::sqrt(d.shape) / d.rate; },
                        [](const SkewNormal& d) {
                          const double delta = d.shape / std::sqrt(1.0 + d.shape * d.shape);
                          return d.scale * std::sqrt(1.0 - 2.0 * delta * delta / std::numbers::pi);
                        },
                        [](const NormalMixture& d) {
                          double m = 0.0, m2 = 0.0;
                          for (std::size_t k = 0; k < d.weights.size(); ++k) {
                            m += d.weights[k] * d.means[k];
                            m2 += d.weights[k] * (d.sds[k] * d.sds[k] + d.means[k] * d.means[k]);
                          }
                          return std::sqrt(std::max(m2 - m * m, 0.0));
                        },
                    },
                    spec);
}

double sample_one(const DensitySpec& spec, RngStream& rng) {
  return std::visit(overloaded{
                        [&rng](const Normal& d) { return rng.normal(d.mean, d.sd); },
                        [&rng](const Gamma& d) { return rng.gamma(d.shape, d.rate); },
                        [&rng](const SkewNormal& d) {
                          const double delta = d.shape / std::sqrt(1.0 + d.shape * d.shape);
                          const double z0 = std::abs(rng.normal());
                          const double z1 = rng.normal();
                          return d.location + d.scale * (delta * z0 + std::sqrt(1.0 - delta * delta) * z1);
                        },
                        [&rng](const NormalMixture& d) {
                          double u = rng.uniform();
                          std::size_t k = 0;
                          for (; k + 1 < d.weights.size(); ++k) {
                            u -= d.weights[k];
                            if (u <= 0.0) break;
                          }
                          return rng.normal(d.means[k], d.sds[k]);
                        },
                    },
                    spec);
}

std::vector<double> sample(const DensitySpec& spec, std::size_t n, RngStream& rng) {
  validate(spec);
  if (n == 0) throw std::invalid_argument("sample: n must be at least 1");
  std::vector<double> out(n);
  for (auto& v : out) v = sample_one(spec, rng);
  return out;
}

DensitySpec parse_density(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw std::invalid_argument("density spec needs 'family:params': " + std::string(text));
  const std::string_view family = text.substr(0, colon);
  const std::string_view body = text.substr(colon + 1);
  DensitySpec spec;
  auto expect = [&](const std::vector<double>& v, std::size_t n) {
    if (v.size() != n) {
      throw std::invalid_argument("density spec '" + std::string(text) + "' expects " + std::to_string(n) + " parameters");
    }
  };
  if (family == "normal" || family == "N") {
    const auto v = parse_numbers(body);
    expect(v, 2);
    spec = Normal{v[0], v[1]};
  } else if (family == "gamma") {
    const auto v = parse_numbers(body);
    expect(v, 2);
    spec = Gamma{v[0], v[1]};
  } else if (family == "sn" || family == "skewnormal") {
    const auto v = parse_numbers(body);
    expect(v, 3);
    spec = SkewNormal{v[0], v[1], v[2]};
  } else if (family == "mix") {
    NormalMixture m;
    std::size_t pos = 0;
    while (pos <= body.size()) {
      const auto semi = body.find(';', pos);
      const auto v = parse_numbers(body.substr(pos, semi == std::string_view::npos ? std::string_view::npos : semi - pos));
      expect(v, 3);
      m.weights.push_back(v[0]);
      m.means.push_back(v[1]);
      m.sds.push_back(v[2]);
      if (semi == std::string_view::npos) break;
      pos = semi + 1;
    }
    spec = std::move(m);
  } else {
    throw std::invalid_argument("unknown density family '" + std::string(family) + "'");
  }
  validate(spec);
  return spec;
}

std::string to_string(const DensitySpec& spec) {
  std::ostringstream os;
  os.precision(17);
  std::visit(overloaded{
                 [&os](const Normal& d) { os << "normal:" << d.mean << ',' << d.sd; },
                 [&os](const Gamma& d) { os << "gamma:" << d.shape << ',' << d.rate; },
                 [&os](const SkewNormal& d) { os << "sn:" << d.location << ',' << d.scale << ',' << d.shape; },
                 [&os](const NormalMixture& d) {
                   os << "mix:";
                   for (std::size_t k = 0; k < d.weights.size(); ++k) {
                     if (k) os << ';';
                     os << d.weights[k] << ',' << d.means[k] << ',' << d.sds[k];
                   }
                 },
             },
             spec);
  return os.str();
}

}  // namespace unl
