#include "unl/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace unl {

namespace {

constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;

// Quadratic interpolant through (0,f0), (1,f1), (2,f2) in panel units.
struct Quadratic {
  double a, b, c;
  static Quadratic through(double f0, double f1, double f2) {
    const double c = 0.5 * (f0 - 2.0 * f1 + f2);
    return {f0, f1 - f0 - c, c};
  }
  double at(double t) const { return a + t * (b + t * c); }
  double integral(double t0, double t1) const {
    const auto prim = [this](double t) { return t * (a + t * (0.5 * b + t * c / 3.0)); };
    return prim(t1) - prim(t0);
  }
};

// Roots of a + b t + c t^2 strictly inside (0, 2).
int roots_in_panel(double a, double b, double c, double scale, double out[2]) {
  const double tiny = 1e-14 * scale;
  int count = 0;
  auto keep = [&](double t) {
    if (t > 0.0 && t < 2.0) out[count++] = t;
  };
  if (std::abs(c) <= tiny) {
    if (std::abs(b) <= tiny) return 0;
    keep(-a / b);
    return count;
  }
  const double disc = b * b - 4.0 * c * a;
  if (disc < 0.0) return 0;
  const double sq = std::sqrt(disc);
  const double qq = -0.5 * (b + std::copysign(sq, b));
  if (qq != 0.0) {
    keep(qq / c);
    keep(a / qq);
  } else {
    keep(0.0);
  }
  if (count == 2 && out[0] > out[1]) std::swap(out[0], out[1]);
  return count;
}

}  // namespace

bool EvaluationGrid::same_as(const EvaluationGrid& other) const {
  return points.size() == other.points.size() && lower == other.lower && upper == other.upper;
}

EvaluationGrid make_grid(double lower, double upper, std::size_t n_points) {
  if (!(std::isfinite(lower) && std::isfinite(upper)) || !(lower < upper)) {
    throw std::invalid_argument("make_grid: need finite lower < upper");
  }
  if (n_points < 3 || n_points % 2 == 0) {
    throw std::invalid_argument("make_grid: n_points must be odd and >= 3, got " + std::to_string(n_points));
  }
  EvaluationGrid grid;
  grid.lower = lower;
  grid.upper = upper;
  grid.points.resize(n_points);
  const double h = (upper - lower) / static_cast<double>(n_points - 1);
  for (std::size_t i = 0; i < n_points; ++i) grid.points[i] = lower + h * static_cast<double>(i);
  grid.points.back() = upper;
  return grid;
}

EvaluationGrid padded_grid(std::span<const double> pooled, std::size_t n_points, double pad, bool include_zero) {
  if (pooled.empty()) throw std::invalid_argument("padded_grid: no data");
  const auto [lo_it, hi_it] = std::minmax_element(pooled.begin(), pooled.end());
  const double range = *hi_it - *lo_it;
  if (!(range > 0.0)) throw std::invalid_argument("padded_grid: data have zero range");
  double lower = *lo_it - pad * range;
  const double upper = *hi_it + pad * range;
  if (include_zero) lower = std::min(lower, -pad * range);
  return make_grid(lower, upper, n_points);
}

double simpson(std::span<const double> values, double spacing) {
  const std::size_t n = values.size();
  if (n < 3 || n % 2 == 0) throw std::invalid_argument("simpson: need an odd number (>= 3) of values");
  if (!(spacing > 0.0)) throw std::invalid_argument("simpson: spacing must be positive");
  double odd = 0.0, even = 0.0;
  for (std::size_t i = 1; i + 1 < n; i += 2) odd += values[i];
  for (std::size_t i = 2; i + 1 < n; i += 2) even += values[i];
  return spacing / 3.0 * (values.front() + 4.0 * odd + 2.0 * even + values.back());
}

double envelope_simpson(std::span<const std::span<const double>> rows, double spacing, Envelope kind) {
  if (rows.empty()) throw std::invalid_argument("envelope_simpson: no functions");
  const std::size_t n = rows.front().size();
  for (const auto& r : rows) {
    if (r.size() != n) throw std::invalid_argument("envelope_simpson: functions differ in length");
  }
  if (rows.size() == 1) return simpson(rows.front(), spacing);
  if (n < 3 || n % 2 == 0) throw std::invalid_argument("envelope_simpson: need an odd number (>= 3) of values");

  const double sign = kind == Envelope::max ? 1.0 : -1.0;
  const std::size_t m = rows.size();
  std::vector<Quadratic> quad(m);
  std::vector<double> breaks;
  breaks.reserve(2 * m * m + 2);

  double total = 0.0;
  for (std::size_t i = 0; i + 2 < n; i += 2) {
    std::size_t lead = 0;
    double scale = 0.0;
    for (std::size_t d = 0; d < m; ++d) {
      quad[d] = Quadratic::through(sign * rows[d][i], sign * rows[d][i + 1], sign * rows[d][i + 2]);
      scale = std::max({scale, std::abs(rows[d][i]), std::abs(rows[d][i + 1]), std::abs(rows[d][i + 2])});
      if (quad[d].at(1.0) > quad[lead].at(1.0)) lead = d;
    }

    // Fast path: the leader's interpolant dominates every other on the panel.
    bool dominates = true;
    for (std::size_t d = 0; d < m && dominates; ++d) {
      if (d == lead) continue;
      const Quadratic q{quad[lead].a - quad[d].a, quad[lead].b - quad[d].b, quad[lead].c - quad[d].c};
      if (q.at(0.0) < 0.0 || q.at(1.0) < 0.0 || q.at(2.0) < 0.0) {
        dominates = false;
      } else if (q.c > 0.0) {
        const double tv = -q.b / (2.0 * q.c);
        if (tv > 0.0 && tv < 2.0 && q.at(tv) < 0.0) dominates = false;
      }
    }
    if (dominates) {
      total += quad[lead].integral(0.0, 2.0);
      continue;
    }

    breaks.assign({0.0, 2.0});
    for (std::size_t d = 0; d < m; ++d) {
      for (std::size_t e = d + 1; e < m; ++e) {
        double r[2];
        const int k = roots_in_panel(quad[d].a - quad[e].a, quad[d].b - quad[e].b, quad[d].c - quad[e].c,
                                     scale, r);
        for (int j = 0; j < k; ++j) breaks.push_back(r[j]);
      }
    }
    std::sort(breaks.begin(), breaks.end());
    for (std::size_t j = 0; j + 1 < breaks.size(); ++j) {
      const double t0 = breaks[j], t1 = breaks[j + 1];
      if (!(t1 > t0)) continue;
      const double mid = 0.5 * (t0 + t1);
      std::size_t best = 0;
      for (std::size_t d = 1; d < m; ++d) {
        if (quad[d].at(mid) > quad[best].at(mid)) best = d;
      }
      total += quad[best].integral(t0, t1);
    }
  }
  return sign * total * spacing;
}

double interpolant_integral(std::span<const double> values, const EvaluationGrid& grid, double a, double b) {
  const std::size_t n = grid.size();
  if (values.size() != n) throw std::invalid_argument("interpolant_integral: values/grid length mismatch");
  double sign = 1.0;
  if (b < a) {
    std::swap(a, b);
    sign = -1.0;
  }
  a = std::clamp(a, grid.lower, grid.upper);
  b = std::clamp(b, grid.lower, grid.upper);
  if (a == b) return 0.0;
  const double h = grid.spacing();
  const std::size_t panels = (n - 1) / 2;
  auto panel_of = [&](double x) {
    const auto p = static_cast<std::size_t>(std::floor((x - grid.lower) / (2.0 * h)));
    return std::min(p, panels - 1);
  };
  const std::size_t pa = panel_of(a), pb = panel_of(b);
  double total = 0.0;
  for (std::size_t p = pa; p <= pb; ++p) {
    const std::size_t i = 2 * p;
    const Quadratic q = Quadratic::through(values[i], values[i + 1], values[i + 2]);
    const double x0 = grid.lower + 2.0 * h * static_cast<double>(p);
    const double t0 = p == pa ? (a - x0) / h : 0.0;
    const double t1 = p == pb ? (b - x0) / h : 2.0;
    total += q.integral(std::clamp(t0, 0.0, 2.0), std::clamp(t1, 0.0, 2.0));
  }
  return sign * total * h;
}

double interpolant_value(std::span<const double> values, const EvaluationGrid& grid, double x) {
  const std::size_t n = grid.size();
  if (values.size() != n) throw std::invalid_argument("interpolant_value: values/grid length mismatch");
  x = std::clamp(x, grid.lower, grid.upper);
  const double h = grid.spacing();
  const std::size_t panels = (n - 1) / 2;
  const auto p = std::min(static_cast<std::size_t>(std::floor((x - grid.lower) / (2.0 * h))), panels - 1);
  const Quadratic q = Quadratic::through(values[2 * p], values[2 * p + 1], values[2 * p + 2]);
  return q.at((x - grid.lower) / h - 2.0 * static_cast<double>(p));
}

std::vector<double> cumulative_integral(std::span<const double> values, const EvaluationGrid& grid) {
  const std::size_t n = grid.size();
  if (values.size() != n) throw std::invalid_argument("cumulative_integral: values/grid length mismatch");
  const double h = grid.spacing();
  std::vector<double> out(n, 0.0);
  double acc = 0.0;
  for (std::size_t i = 0; i + 2 < n; i += 2) {
    const Quadratic q = Quadratic::through(values[i], values[i + 1], values[i + 2]);
    out[i + 1] = acc + h * q.integral(0.0, 1.0);
    acc += h * q.integral(0.0, 2.0);
    out[i + 2] = acc;
  }
  return out;
}

double std_normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0); }

double log_std_normal_cdf(double x) {
  if (x > -30.0) return std::log(std_normal_cdf(x));
  // Asymptotic Mills-ratio expansion; relative error < 1e-9 for x <= -30.
  const double z2 = 1.0 / (x * x);
  const double series = 1.0 - z2 * (1.0 - 3.0 * z2 * (1.0 - 5.0 * z2));
  return -0.5 * x * x - std::log(-x) + std::log(kInvSqrt2Pi) + std::log(series);
}

double normal_pdf(double x, double mean, double sd) { return std_normal_pdf((x - mean) / sd) / sd; }

double normal_log_pdf(double x, double mean, double variance) {
  const double r = x - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * variance) + r * r / variance);
}

}  // namespace unl
