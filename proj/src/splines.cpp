#include "unl/splines.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace unl {

namespace {

constexpr int kDegree = 3;

double sample_quantile(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::string encoding_label(const Encoding& e) {
  switch (e.kind) {
    case EncodingKind::none: return "none";
    case EncodingKind::linear: return "linear";
    case EncodingKind::categorical: return "cat";
    case EncodingKind::bspline: return "bspline(" + std::to_string(e.interior_knots) + ")";
  }
  return "?";
}

Encoding parse_encoding(const std::string& text) {
  if (text == "none") return Encoding::none();
  if (text == "linear") return Encoding::linear();
  if (text == "cat" || text == "categorical") return Encoding::categorical();
  if (text.rfind("bspline(", 0) == 0 && text.back() == ')') {
    const std::string inner = text.substr(8, text.size() - 9);
    std::size_t used = 0;
    const long k = std::stol(inner, &used);
    if (used != inner.size() || k < 0) throw std::invalid_argument("bad knot count in '" + text + "'");
    return Encoding::bspline(static_cast<std::size_t>(k));
  }
  throw std::invalid_argument("unknown encoding '" + text + "'");
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

std::size_t columns_for(const DesignMap::Resolved& r, const Encoding& e) {
  switch (e.kind) {
    case EncodingKind::none: return 0;
    case EncodingKind::linear: return r.continuous ? 1 : r.levels.size() - 1;
    case EncodingKind::categorical: return r.levels.size() - 1;
    case EncodingKind::bspline: return e.interior_knots + 3;
  }
  return 0;
}

}  // namespace

void KnotVector::validate() const {
  if (!(lower < upper)) throw std::invalid_argument("knots: lower boundary must be below upper boundary");
  double prev = lower;
  for (double k : interior) {
    if (!(k > prev)) throw std::invalid_argument("knots: interior knots must be strictly increasing inside the boundary");
    prev = k;
  }
  if (!(upper > prev)) throw std::invalid_argument("knots: interior knots must lie below the upper boundary");
}

KnotVector KnotVector::from_sample(std::span<const double> x, std::size_t interior_knots) {
  if (x.size() < 2) throw std::invalid_argument("knots: need at least two covariate values");
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  KnotVector knots{sorted.front(), sorted.back(), {}};
  for (std::size_t j = 1; j <= interior_knots; ++j) {
    knots.interior.push_back(sample_quantile(sorted, static_cast<double>(j) / static_cast<double>(interior_knots + 1)));
  }
  knots.validate();
  return knots;
}

std::vector<double> bspline_basis_full(double x, const KnotVector& knots) {
  if (!(x >= knots.lower && x <= knots.upper)) {
    throw std::out_of_range("bspline: x = " + std::to_string(x) + " outside the boundary knots");
  }
  std::vector<double> t(kDegree + 1, knots.lower);
  t.insert(t.end(), knots.interior.begin(), knots.interior.end());
  t.insert(t.end(), kDegree + 1, knots.upper);
  const std::size_t n_basis = knots.interior.size() + kDegree + 1;

  // Knot span i with t[i] <= x < t[i+1]; the right end uses the last span.
  std::size_t span = n_basis - 1;
  if (x < knots.upper) {
    span = static_cast<std::size_t>(std::upper_bound(t.begin(), t.end(), x) - t.begin()) - 1;
  }

  double local[kDegree + 1] = {1.0, 0.0, 0.0, 0.0};
  double left[kDegree + 1] = {}, right[kDegree + 1] = {};
  for (int j = 1; j <= kDegree; ++j) {
    left[j] = x - t[span + 1 - j];
    right[j] = t[span + j] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = local[r] / (right[r + 1] + left[j - r]);
      local[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    local[j] = saved;
  }
  std::vector<double> out(n_basis, 0.0);
  for (int r = 0; r <= kDegree; ++r) out[span - kDegree + r] = local[r];
  return out;
}

std::vector<double> bspline_basis(double x, const KnotVector& knots) {
  auto full = bspline_basis_full(x, knots);
  full.erase(full.begin());
  return full;
}

void EffectSpec::validate() const {
  bool spline_weights = false, spline_means = false;
  for (const auto& t : terms) {
    if (t.name.empty()) throw std::invalid_argument("effect spec: term with empty name");
    if (t.weights.kind == EncodingKind::bspline) spline_weights = true;
    if (t.means.kind == EncodingKind::bspline) spline_means = true;
    if (t.weights.interior_knots > 20 || t.means.interior_knots > 20) {
      throw std::invalid_argument("effect spec: term '" + t.name + "' asks for more than 20 interior knots");
    }
  }
  if (spline_weights && spline_means) {
    throw std::invalid_argument("effect spec: B-splines may enter the weights or the means, not both");
  }
}

std::string EffectSpec::label() const {
  if (terms.empty()) return "intercept";
  std::string out;
  for (const auto& t : terms) {
    if (!out.empty()) out += ';';
    out += t.name + ":w=" + encoding_label(t.weights) + ",m=" + encoding_label(t.means);
  }
  return out;
}

EffectSpec parse_effect_spec(const std::string& text) {
  EffectSpec spec;
  const std::string body = trim(text);
  if (body.empty() || body == "intercept") return spec;
  for (const auto& term_text : split(body, ';')) {
    const auto colon = term_text.find(':');
    EffectTerm term;
    term.name = trim(term_text.substr(0, colon));
    if (colon != std::string::npos) {
      for (const auto& part : split(term_text.substr(colon + 1), ',')) {
        const auto eq = part.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("effect spec: expected key=value in '" + part + "'");
        const std::string key = trim(part.substr(0, eq));
        const Encoding enc = parse_encoding(trim(part.substr(eq + 1)));
        if (key == "w" || key == "weights") {
          term.weights = enc;
        } else if (key == "m" || key == "means") {
          term.means = enc;
        } else {
          throw std::invalid_argument("effect spec: unknown predictor '" + key + "'");
        }
      }
    }
    spec.terms.push_back(term);
  }
  spec.validate();
  return spec;
}

DesignMap::DesignMap(const EffectSpec& spec, const GroupDataset& data) : spec_(spec) {
  spec_.validate();
  data.validate();
  for (const auto& term : spec_.terms) {
    Resolved r;
    r.term = term;
    r.factors = term.name.find('*') == std::string::npos ? std::vector<std::string>{term.name} : split(term.name, '*');
    for (const auto& f : r.factors) {
      if (!data.covariates.contains(f)) throw std::invalid_argument("covariate '" + f + "' is missing from group '" + data.label + "'");
    }
    const auto& first = data.covariates.at(r.factors.front());
    if (const auto* cat = std::get_if<std::vector<std::string>>(&first)) {
      if (r.factors.size() > 1) throw std::invalid_argument("product term '" + term.name + "' must use continuous covariates");
      r.continuous = false;
      r.levels = *cat;
      std::sort(r.levels.begin(), r.levels.end());
      r.levels.erase(std::unique(r.levels.begin(), r.levels.end()), r.levels.end());
      if (r.levels.size() < 2) throw std::invalid_argument("categorical covariate '" + term.name + "' has a single level");
      if (term.weights.kind == EncodingKind::bspline || term.means.kind == EncodingKind::bspline) {
        throw std::invalid_argument("B-splines require a continuous covariate; '" + term.name + "' is categorical");
      }
    } else {
      if (term.weights.kind == EncodingKind::categorical || term.means.kind == EncodingKind::categorical) {
        throw std::invalid_argument("covariate '" + term.name + "' is continuous but encoded as categorical");
      }
      std::vector<double> raw(data.size(), 1.0);
      for (const auto& f : r.factors) {
        const auto* col = std::get_if<std::vector<double>>(&data.covariates.at(f));
        if (!col) throw std::invalid_argument("product term '" + term.name + "' must use continuous covariates");
        for (std::size_t i = 0; i < raw.size(); ++i) raw[i] *= (*col)[i];
      }
      const double n = static_cast<double>(raw.size());
      r.mean = std::accumulate(raw.begin(), raw.end(), 0.0) / n;
      double ss = 0.0;
      for (double v : raw) ss += (v - r.mean) * (v - r.mean);
      r.sd = std::sqrt(ss / (n - 1.0));
      if (!(r.sd > 1e-12 * std::max(1.0, std::abs(r.mean)))) {
        // A constant covariate carries no information; it maps to zero everywhere.
        if (term.weights.kind == EncodingKind::bspline || term.means.kind == EncodingKind::bspline) {
          throw std::invalid_argument("covariate '" + term.name + "' is constant and cannot carry a B-spline");
        }
        r.sd = 0.0;
      }
      for (auto& v : raw) v = r.sd > 0.0 ? (v - r.mean) / r.sd : 0.0;
      if (term.weights.kind == EncodingKind::bspline) r.weight_knots = KnotVector::from_sample(raw, term.weights.interior_knots);
      if (term.means.kind == EncodingKind::bspline) r.mean_knots = KnotVector::from_sample(raw, term.means.interior_knots);
    }
    terms_.push_back(std::move(r));
  }
}

std::size_t DesignMap::dimension(Predictor target) const {
  std::size_t q = 1;
  for (const auto& r : terms_) q += columns_for(r, target == Predictor::weights ? r.term.weights : r.term.means);
  return q;
}

double DesignMap::continuous_value(const Resolved& r, const CovariateRecord& record) const {
  double v = 1.0;
  for (const auto& f : r.factors) {
    const auto it = record.find(f);
    if (it == record.end()) throw std::invalid_argument("covariate record is missing '" + f + "'");
    const auto* num = std::get_if<double>(&it->second);
    if (!num) throw std::invalid_argument("covariate '" + f + "' must be numeric");
    v *= *num;
  }
  return r.sd > 0.0 ? (v - r.mean) / r.sd : 0.0;
}

std::vector<double> DesignMap::row(const CovariateRecord& record, Predictor target, bool strict) const {
  std::vector<double> out{1.0};
  for (const auto& r : terms_) {
    const Encoding& enc = target == Predictor::weights ? r.term.weights : r.term.means;
    if (enc.kind == EncodingKind::none) continue;
    if (!r.continuous) {
      const auto it = record.find(r.term.name);
      if (it == record.end()) throw std::invalid_argument("covariate record is missing '" + r.term.name + "'");
      const auto* level = std::get_if<std::string>(&it->second);
      if (!level) throw std::invalid_argument("covariate '" + r.term.name + "' must be categorical");
      const auto pos = std::find(r.levels.begin(), r.levels.end(), *level);
      if (pos == r.levels.end()) throw std::invalid_argument("unknown level '" + *level + "' for covariate '" + r.term.name + "'");
      for (std::size_t k = 1; k < r.levels.size(); ++k) out.push_back(pos == r.levels.begin() + k ? 1.0 : 0.0);
      continue;
    }
    double z = continuous_value(r, record);
    if (enc.kind == EncodingKind::linear) {
      out.push_back(z);
      continue;
    }
    const KnotVector& knots = target == Predictor::weights ? r.weight_knots : r.mean_knots;
    if (z < knots.lower || z > knots.upper) {
      if (strict) throw std::out_of_range("covariate '" + r.term.name + "' outside the fitted range");
      if (!warned_->exchange(true)) {
        std::cerr << "warning: covariate '" << r.term.name << "' outside the fitted range; clamping to the boundary knots\n";
      }
      z = std::clamp(z, knots.lower, knots.upper);
    }
    const auto basis = bspline_basis(z, knots);
    out.insert(out.end(), basis.begin(), basis.end());
  }
  return out;
}

std::vector<double> design_row(const CovariateRecord& record, const DesignMap& design, Predictor target) {
  return design.row(record, target);
}

}  // namespace unl
