#include "unl/measures.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace unl {

namespace {

void require_shared_grid(std::span<const GriddedDensity> densities) {
  for (const auto& d : densities) {
    if (!d.grid.same_as(densities.front().grid)) throw std::invalid_argument("densities are on different grids");
    if (d.values.size() != d.grid.size()) throw std::invalid_argument("density values do not match grid length");
  }
}

double envelope(std::span<const GriddedDensity> densities, Envelope kind, const MeasureOptions& options) {
  require_shared_grid(densities);
  if (options.check_normalization) {
    for (const auto& d : densities) check_density(d, options.norm_tolerance);
  }
  std::vector<std::span<const double>> rows;
  rows.reserve(densities.size());
  for (const auto& d : densities) rows.emplace_back(d.values);
  return envelope_simpson(rows, densities.front().grid.spacing(), kind);
}

double evaluate(const GriddedDensity& f, double x) {
  return f.evaluator ? f.evaluator(x) : interpolant_value(f.values, f.grid, x);
}

}  // namespace

GriddedDensity grid_density(const DensitySpec& spec, const EvaluationGrid& grid) {
  validate(spec);
  GriddedDensity out{grid, std::vector<double>(grid.size()), [spec](double y) { return pdf_at(spec, y); }};
  for (std::size_t i = 0; i < grid.size(); ++i) out.values[i] = pdf_at(spec, grid.points[i]);
  return out;
}

GriddedCdf grid_cdf(const DensitySpec& spec, const EvaluationGrid& grid) {
  validate(spec);
  GriddedCdf out{grid, std::vector<double>(grid.size())};
  for (std::size_t i = 0; i < grid.size(); ++i) out.values[i] = cdf_at(spec, grid.points[i]);
  return out;
}

GriddedCdf cdf_from_density(const GriddedDensity& density) {
  GriddedCdf out{density.grid, cumulative_integral(density.values, density.grid)};
  double running = 0.0;
  for (auto& v : out.values) {
    running = std::max(running, std::clamp(v, 0.0, 1.0));
    v = running;
  }
  return out;
}

void check_density(const GriddedDensity& density, double norm_tolerance) {
  if (density.values.size() != density.grid.size()) throw std::invalid_argument("density values do not match grid length");
  for (double v : density.values) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("density has negative or non-finite values");
  }
  const double mass = simpson(density.values, density.grid.spacing());
  if (std::abs(mass - 1.0) > norm_tolerance) {
    throw std::domain_error("density integrates to " + std::to_string(mass) +
                            " on the grid; widen the grid or raise the normalization tolerance");
  }
}

double unl(std::span<const GriddedDensity> densities, const MeasureOptions& options) {
  if (densities.size() < 2) throw std::invalid_argument("unl: need at least two densities");
  return envelope(densities, Envelope::max, options);
}

double unl(const GriddedDensity& f1, const GriddedDensity& f2, const GriddedDensity& f3,
           const MeasureOptions& options) {
  const std::array<GriddedDensity, 3> all{f1, f2, f3};
  return unl(all, options);
}

double ovl2(const GriddedDensity& f, const GriddedDensity& g, const MeasureOptions& options) {
  const std::array<GriddedDensity, 2> pair{f, g};
  return envelope(pair, Envelope::min, options);
}

double ovl3(const GriddedDensity& f1, const GriddedDensity& f2, const GriddedDensity& f3,
            const MeasureOptions& options) {
  const std::array<GriddedDensity, 3> all{f1, f2, f3};
  return envelope(all, Envelope::min, options);
}

double unl_from_ovl(const GriddedDensity& f1, const GriddedDensity& f2, const GriddedDensity& f3,
                    const MeasureOptions& options) {
  return 3.0 - ovl2(f1, f2, options) - ovl2(f1, f3, options) - ovl2(f2, f3, options) + ovl3(f1, f2, f3, options);
}

YoudenResult yi3_values(std::span<const double> F1, std::span<const double> F2, std::span<const double> F3,
                        const EvaluationGrid& grid) {
  const std::size_t n = grid.size();
  if (F1.size() != n || F2.size() != n || F3.size() != n) throw std::invalid_argument("yi3: CDFs do not match grid");
  if (n < 2) throw std::invalid_argument("yi3: grid too small");
  // Separable objective: [F1 - F2](c1) + [F2 - F3](c2) + 1.
  auto lower_gain = [&](std::size_t i) { return F1[i] - F2[i]; };
  auto upper_gain = [&](std::size_t j) { return F2[j] - F3[j]; };

  std::size_t best_i = 0, best_j = 0;
  for (std::size_t k = 1; k < n; ++k) {
    if (lower_gain(k) > lower_gain(best_i)) best_i = k;
    if (upper_gain(k) > upper_gain(best_j)) best_j = k;
  }
  if (best_i < best_j) {
    return {lower_gain(best_i) + upper_gain(best_j) + 1.0, grid.points[best_i], grid.points[best_j]};
  }
  // Unconstrained optima violate c1 < c2: exact search over ordered pairs
  // using a running prefix maximum of the lower gain.
  std::size_t prefix_i = 0;
  double best = -std::numeric_limits<double>::infinity();
  std::size_t arg_i = 0, arg_j = 1;
  for (std::size_t j = 1; j < n; ++j) {
    if (lower_gain(j - 1) > lower_gain(prefix_i)) prefix_i = j - 1;
    const double v = lower_gain(prefix_i) + upper_gain(j);
    if (v > best) {
      best = v;
      arg_i = prefix_i;
      arg_j = j;
    }
  }
  return {best + 1.0, grid.points[arg_i], grid.points[arg_j]};
}

YoudenResult yi3(const GriddedCdf& F1, const GriddedCdf& F2, const GriddedCdf& F3) {
  if (!F1.grid.same_as(F2.grid) || !F1.grid.same_as(F3.grid)) throw std::invalid_argument("yi3: CDFs are on different grids");
  return yi3_values(F1.values, F2.values, F3.values, F1.grid);
}

double vus_empirical(std::span<const double> s1, std::span<const double> s2, std::span<const double> s3) {
  if (s1.empty() || s2.empty() || s3.empty()) throw std::invalid_argument("vus_empirical: empty sample");
  std::vector<double> a(s1.begin(), s1.end()), c(s3.begin(), s3.end());
  std::sort(a.begin(), a.end());
  std::sort(c.begin(), c.end());
  double total = 0.0;
  for (double y : s2) {
    const auto [a_lo, a_hi] = std::equal_range(a.begin(), a.end(), y);
    const auto [c_lo, c_hi] = std::equal_range(c.begin(), c.end(), y);
    const double below = static_cast<double>(a_lo - a.begin()) + 0.5 * static_cast<double>(a_hi - a_lo);
    const double above = static_cast<double>(c.end() - c_hi) + 0.5 * static_cast<double>(c_hi - c_lo);
    total += below * above;
  }
  return total / (static_cast<double>(a.size()) * static_cast<double>(s2.size()) * static_cast<double>(c.size()));
}

double vus_from_curves(const GriddedCdf& F1, const GriddedDensity& f2, const GriddedCdf& F3) {
  if (!F1.grid.same_as(f2.grid) || !F1.grid.same_as(F3.grid)) throw std::invalid_argument("vus: curves are on different grids");
  std::vector<double> integrand(F1.grid.size());
  for (std::size_t i = 0; i < integrand.size(); ++i) integrand[i] = F1.values[i] * f2.values[i] * (1.0 - F3.values[i]);
  return simpson(integrand, F1.grid.spacing());
}

double vus_trinormal(double mu1, double mu2, double mu3, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("vus_trinormal: sigma must be positive");
  const EvaluationGrid grid = make_grid(-8.0, 8.0, 2001);
  const double d12 = (mu2 - mu1) / sigma, d23 = (mu3 - mu2) / sigma;
  std::vector<double> integrand(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double y = grid.points[i];
    integrand[i] = std_normal_cdf(y + d12) * std_normal_cdf(-y + d23) * std_normal_pdf(y);
  }
  return simpson(integrand, grid.spacing());
}

double unl_trinormal(double mu1, double mu2, double mu3, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("unl_trinormal: sigma must be positive");
  if (mu1 > mu2 || mu2 > mu3) throw std::invalid_argument("unl_trinormal: requires mu1 <= mu2 <= mu3");
  return 2.0 * std_normal_cdf((mu3 - mu2) / (2.0 * sigma)) + 2.0 * std_normal_cdf((mu2 - mu1) / (2.0 * sigma)) - 1.0;
}

std::vector<IntersectionPoint> classify_intersections(const GriddedDensity& f1, const GriddedDensity& f2,
                                                      const GriddedDensity& f3) {
  const std::array<const GriddedDensity*, 3> f{&f1, &f2, &f3};
  const std::array<GriddedDensity, 3> copies{f1, f2, f3};
  require_shared_grid(copies);
  const EvaluationGrid& grid = f1.grid;
  const std::size_t n = grid.size();
  const double h = grid.spacing();
  double peak = 0.0;
  for (const auto* d : f) peak = std::max(peak, *std::max_element(d->values.begin(), d->values.end()));

  constexpr std::array<std::array<int, 3>, 3> kPairs{{{0, 1, 2}, {0, 2, 1}, {1, 2, 0}}};
  std::vector<IntersectionPoint> out;
  for (const auto& [a, b, c] : kPairs) {
    const auto& fa = *f[a];
    const auto& fb = *f[b];
    double spread = 0.0;
    for (std::size_t i = 0; i < n; ++i) spread = std::max(spread, std::abs(fa.values[i] - fb.values[i]));
    if (spread <= 1e-12 * peak) continue;  // identical pair

    auto diff = [&](double x) { return evaluate(fa, x) - evaluate(fb, x); };
    std::vector<double> found;
    int last_sign = 0;
    std::size_t last_index = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = fa.values[i] - fb.values[i];
      const int s = d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
      if (s == 0) continue;
      if (last_sign != 0 && s != last_sign) {
        double lo = grid.points[last_index], hi = grid.points[i];
        double dlo = diff(lo);
        double loc;
        if (dlo == 0.0) {
          loc = lo;
        } else {
          while (hi - lo > 1e-8) {
            const double mid = 0.5 * (lo + hi);
            const double dm = diff(mid);
            if (dm == 0.0) {
              lo = hi = mid;
              break;
            }
            if ((dm > 0.0) == (dlo > 0.0)) {
              lo = mid;
              dlo = dm;
            } else {
              hi = mid;
            }
          }
          loc = 0.5 * (lo + hi);
        }
        if (found.empty() || loc - found.back() > h) found.push_back(loc);
      }
      last_sign = s;
      last_index = i;
    }

    for (double loc : found) {
      const double m = 0.5 * (evaluate(fa, loc) + evaluate(fb, loc));
      const double third = evaluate(*f[c], loc);
      const double band = 1e-9 * std::max(m, 1e-300);
      if (std::abs(third - m) <= band) continue;  // triple point
      out.push_back({loc, third < m ? IntersectionKind::outer : IntersectionKind::inner, {a, b}, m});
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.location < y.location; });
  return out;
}

double unl_from_partition(const GriddedDensity& f1, const GriddedDensity& f2, const GriddedDensity& f3,
                          std::span<const double> outer_points) {
  const std::array<GriddedDensity, 3> all{f1, f2, f3};
  require_shared_grid(all);
  const EvaluationGrid& grid = f1.grid;
  std::vector<double> cuts{grid.lower};
  for (double c : outer_points) cuts.push_back(std::clamp(c, grid.lower, grid.upper));
  cuts.push_back(grid.upper);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    if (!(cuts[k + 1] > cuts[k])) continue;
    const double mid = 0.5 * (cuts[k] + cuts[k + 1]);
    std::size_t top = 0;
    for (std::size_t d = 1; d < 3; ++d) {
      if (evaluate(all[d], mid) > evaluate(all[top], mid)) top = d;
    }
    total += interpolant_integral(all[top].values, grid, cuts[k], cuts[k + 1]);
  }
  return total;
}

}  // namespace unl
