#include "unl/kernels.hpp"

#include <array>
#include <cmath>
#include <span>
#include <stdexcept>

#include "unl/measures.hpp"

namespace unl::kernels {

namespace {

// UNL of three mixtures on the grid; flags a normalization miss.
double unl_of(const MixtureDraw& a, const MixtureDraw& b, const MixtureDraw& c, const EvaluationGrid& grid,
              double tolerance, bool& failed) {
  const std::array<std::vector<double>, 3> f{mixture_pdf_values(a, grid), mixture_pdf_values(b, grid),
                                             mixture_pdf_values(c, grid)};
  const double h = grid.spacing();
  failed = false;
  for (const auto& v : f) {
    if (std::abs(simpson(v, h) - 1.0) > tolerance) failed = true;
  }
  const std::array<std::span<const double>, 3> rows{f[0], f[1], f[2]};
  return envelope_simpson(rows, h, Envelope::max);
}

void require_aligned(std::size_t a, std::size_t b, std::size_t c) {
  if (a != b || b != c) throw std::invalid_argument("draw ensembles must have equal length across the three groups");
  if (a == 0) throw std::invalid_argument("draw ensembles are empty");
}

}  // namespace

DrawValues unl_per_draw(const std::vector<MixtureDraw>& d1, const std::vector<MixtureDraw>& d2,
                        const std::vector<MixtureDraw>& d3, const EvaluationGrid& grid, double norm_tolerance,
                        Exec exec) {
  require_aligned(d1.size(), d2.size(), d3.size());
  const auto S = static_cast<long>(d1.size());
  DrawValues out{std::vector<double>(d1.size()), 0};
  std::size_t failures = 0;
  if (exec == Exec::serial) {
    for (long s = 0; s < S; ++s) {
      bool failed = false;
      out.values[s] = unl_of(d1[s], d2[s], d3[s], grid, norm_tolerance, failed);
      failures += failed ? 1 : 0;
    }
  } else {
#pragma omp parallel for schedule(static) reduction(+ : failures)
    for (long s = 0; s < S; ++s) {
      bool failed = false;
      out.values[s] = unl_of(d1[s], d2[s], d3[s], grid, norm_tolerance, failed);
      failures += failed ? 1 : 0;
    }
  }
  out.norm_failures = failures;
  return out;
}

std::vector<double> yi3_per_draw(const std::vector<MixtureDraw>& d1, const std::vector<MixtureDraw>& d2,
                                 const std::vector<MixtureDraw>& d3, const EvaluationGrid& grid, Exec exec) {
  require_aligned(d1.size(), d2.size(), d3.size());
  const auto S = static_cast<long>(d1.size());
  std::vector<double> out(d1.size());
  const auto one = [&](long s) {
    const auto F1 = mixture_cdf_values(d1[s], grid);
    const auto F2 = mixture_cdf_values(d2[s], grid);
    const auto F3 = mixture_cdf_values(d3[s], grid);
    return yi3_values(F1, F2, F3, grid).value;
  };
  if (exec == Exec::serial) {
    for (long s = 0; s < S; ++s) out[s] = one(s);
  } else {
#pragma omp parallel for schedule(static)
    for (long s = 0; s < S; ++s) out[s] = one(s);
  }
  return out;
}

FitRows rows_for(const FitResult& fit, const std::vector<CovariateRecord>& x) {
  FitRows r{&fit, {}, {}};
  for (const auto& rec : x) {
    auto [z, u] = fit.rows(rec);
    r.z.push_back(std::move(z));
    r.u.push_back(std::move(u));
  }
  return r;
}

DrawValues covariate_unl(const FitRows& f1, const FitRows& f2, const FitRows& f3, const EvaluationGrid& grid,
                         double norm_tolerance, Exec exec) {
  require_aligned(f1.fit->draws.size(), f2.fit->draws.size(), f3.fit->draws.size());
  if (f1.z.size() != f2.z.size() || f2.z.size() != f3.z.size()) {
    throw std::invalid_argument("covariate grids differ across the three fits");
  }
  const std::size_t S = f1.fit->draws.size();
  const std::size_t X = f1.z.size();
  const auto total = static_cast<long>(S * X);
  DrawValues out{std::vector<double>(S * X), 0};
  const auto one = [&](long k, std::size_t& failures) {
    const std::size_t s = static_cast<std::size_t>(k) / X;
    const std::size_t j = static_cast<std::size_t>(k) % X;
    bool failed = false;
    out.values[static_cast<std::size_t>(k)] =
        unl_of(f1.fit->conditional(s, f1.z[j], f1.u[j]), f2.fit->conditional(s, f2.z[j], f2.u[j]),
               f3.fit->conditional(s, f3.z[j], f3.u[j]), grid, norm_tolerance, failed);
    failures += failed ? 1 : 0;
  };
  std::size_t failures = 0;
  if (exec == Exec::serial) {
    for (long k = 0; k < total; ++k) one(k, failures);
  } else {
#pragma omp parallel for schedule(dynamic, 16) reduction(+ : failures)
    for (long k = 0; k < total; ++k) one(k, failures);
  }
  out.norm_failures = failures;
  return out;
}

}  // namespace unl::kernels
