#include "cli.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "unl/densities.hpp"
#include "unl/dpm.hpp"
#include "unl/io.hpp"
#include "unl/lsbp.hpp"
#include "unl/measures.hpp"
#include "unl/posterior.hpp"
#include "unl/simulation.hpp"

namespace unl {

namespace {

namespace fs = std::filesystem;

// Hyperparameters given once apply to every group; three values set them
// per group.
struct GroupValues {
  std::vector<double> a_mu{0.0}, b2_mu{10.0}, a_sig{2.0}, b_sig{0.5}, alpha{1.0}, prior_variance{10.0};
  std::vector<std::size_t> L{20};
};

struct FitOptions {
  GroupValues groups;
  std::size_t grid_points = kDefaultGridPoints;
  double grid_pad = 0.15;
  std::size_t burn = 2000;
  std::size_t save = 5000;
  double level = 0.95;
  std::uint64_t seed = 1;
};

struct DataOptions {
  std::string path;
  std::string group_col = "group";
  std::string outcome_col = "y";
  std::vector<std::string> groups;
  std::vector<std::string> covariates;
  std::vector<std::string> categorical;
};

template <typename T>
T pick(const std::vector<T>& v, std::size_t g, const char* name) {
  if (v.size() == 1) return v[0];
  if (v.size() == 3) return v[g];
  throw std::invalid_argument(std::string(name) + ": give one value or one per group (3)");
}

void add_fit_options(CLI::App* sub, FitOptions& o) {
  auto* g = &o.groups;
  sub->add_option("--grid-points", o.grid_points, "Evaluation grid size (odd)")->capture_default_str();
  sub->add_option("--grid-pad", o.grid_pad, "Grid padding as a fraction of the pooled data range")->capture_default_str();
  sub->add_option("--a-mu", g->a_mu, "Prior mean of component means (1 or 3 values)")->expected(1, 3)->capture_default_str();
  sub->add_option("--b2-mu", g->b2_mu, "Prior variance of component means")->expected(1, 3)->capture_default_str();
  sub->add_option("--a-sig", g->a_sig, "Inverse-gamma shape for component variances")->expected(1, 3)->capture_default_str();
  sub->add_option("--b-sig", g->b_sig, "Inverse-gamma scale for component variances")->expected(1, 3)->capture_default_str();
  sub->add_option("--alpha", g->alpha, "Dirichlet-process concentration")->expected(1, 3)->capture_default_str();
  sub->add_option("--components", g->L, "Truncation level L")->expected(1, 3)->capture_default_str();
  sub->add_option("--prior-variance", g->prior_variance, "Prior variance of regression coefficients")
      ->expected(1, 3)
      ->capture_default_str();
  sub->add_option("--burn", o.burn, "Burn-in iterations")->capture_default_str();
  sub->add_option("--save", o.save, "Saved iterations")->capture_default_str();
  sub->add_option("--level", o.level, "Credible level")->capture_default_str();
  sub->add_option("--seed", o.seed, "Random seed")->capture_default_str();
}

void add_data_options(CLI::App* sub, DataOptions& d) {
  sub->add_option("--data", d.path, "Input CSV with a header row")->required()->check(CLI::ExistingFile);
  sub->add_option("--group-col", d.group_col, "Group label column")->capture_default_str();
  sub->add_option("--outcome-col", d.outcome_col, "Outcome column")->capture_default_str();
  sub->add_option("--groups", d.groups, "The three group labels in order (default: sorted labels)")->delimiter(',');
  sub->add_option("--covariates", d.covariates, "Covariate columns")->delimiter(',');
  sub->add_option("--categorical", d.categorical, "Covariates to read as labels")->delimiter(',');
}

RunConfig resolve(const FitOptions& o) {
  RunConfig c;
  c.grid_points = o.grid_points;
  c.grid_pad = o.grid_pad;
  c.length = {o.burn, o.save};
  c.level = o.level;
  c.seed = o.seed;
  for (std::size_t g = 0; g < 3; ++g) {
    c.dpm[g].a_mu = pick(o.groups.a_mu, g, "a-mu");
    c.dpm[g].b2_mu = pick(o.groups.b2_mu, g, "b2-mu");
    c.dpm[g].a_sig = pick(o.groups.a_sig, g, "a-sig");
    c.dpm[g].b_sig = pick(o.groups.b_sig, g, "b-sig");
    c.dpm[g].alpha = pick(o.groups.alpha, g, "alpha");
    c.dpm[g].L = pick(o.groups.L, g, "components");
    c.lsbp[g].a_sig = c.dpm[g].a_sig;
    c.lsbp[g].b_sig = c.dpm[g].b_sig;
    c.lsbp[g].L = c.dpm[g].L;
    c.lsbp[g].prior_variance = pick(o.groups.prior_variance, g, "prior-variance");
  }
  c.validate();
  return c;
}

std::array<GroupDataset, 3> load_groups(const DataOptions& d) {
  DatasetSchema schema{d.group_col, d.outcome_col, d.covariates, d.categorical};
  auto all = read_dataset(fs::path(d.path), schema);
  std::vector<std::string> order = d.groups;
  if (order.empty()) {
    for (const auto& g : all) order.push_back(g.label);
  }
  if (order.size() != 3) {
    throw std::invalid_argument("expected exactly three groups, found " + std::to_string(order.size()) +
                                " (use --groups to choose and order them)");
  }
  std::array<GroupDataset, 3> out;
  for (std::size_t k = 0; k < 3; ++k) {
    const auto it = std::find_if(all.begin(), all.end(), [&](const GroupDataset& g) { return g.label == order[k]; });
    if (it == all.end()) throw std::invalid_argument("group '" + order[k] + "' not found in " + d.path);
    out[k] = *it;
  }
  return out;
}

std::vector<double> pooled(const std::array<GroupDataset, 3>& data) {
  std::vector<double> p;
  for (const auto& g : data) p.insert(p.end(), g.outcomes.begin(), g.outcomes.end());
  return p;
}

// Writes header plus body to a path, or to `out` when the path is "-".
void emit(const std::string& path, std::ostream& out, std::string_view command, std::uint64_t seed,
          const std::string& config, const std::function<void(std::ostream&)>& body) {
  std::ostringstream buf;
  write_header(buf, command, seed, config);
  body(buf);
  if (path == "-") {
    out << buf.str();
    return;
  }
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  f << buf.str();
}

std::string in_dir(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

std::string sanitize(std::string label) {
  for (char& c : label) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
  }
  return label;
}

// ---- measures ---------------------------------------------------------

struct MeasuresOptions {
  std::vector<std::string> specs;
  std::string gridded;
  std::size_t grid_points = 2001;
  double lower = 0.0, upper = 0.0;
  bool lower_set = false, upper_set = false;
  std::string out = "-";
};

std::array<GriddedDensity, 3> gridded_from_file(const std::string& path) {
  const CsvTable t = read_csv_file(path);
  const std::size_t yc = t.column("y");
  const std::array<std::size_t, 3> fc{t.column("f1"), t.column("f2"), t.column("f3")};
  std::vector<double> y;
  std::array<std::vector<double>, 3> f;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    double v = 0.0;
    if (!parse_double(t.rows[r][yc], v)) throw std::runtime_error("line " + std::to_string(t.line_numbers[r]) + ": bad y");
    y.push_back(v);
    for (std::size_t k = 0; k < 3; ++k) {
      if (!parse_double(t.rows[r][fc[k]], v)) {
        throw std::runtime_error("line " + std::to_string(t.line_numbers[r]) + ": bad density value in f" + std::to_string(k + 1));
      }
      f[k].push_back(v);
    }
  }
  if (y.size() < 3) throw std::invalid_argument("gridded input needs at least three rows");
  const auto grid = make_grid(y.front(), y.back(), y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (std::abs(y[i] - grid.points[i]) > 1e-9 * std::max(1.0, std::abs(y[i]))) {
      throw std::invalid_argument("gridded input: y must be equally spaced");
    }
  }
  return {GriddedDensity{grid, f[0], {}}, GriddedDensity{grid, f[1], {}}, GriddedDensity{grid, f[2], {}}};
}

void run_measures(const MeasuresOptions& o, std::ostream& out, const std::string& config) {
  std::array<GriddedDensity, 3> f;
  std::array<GriddedCdf, 3> F;
  if (!o.gridded.empty()) {
    if (!o.specs.empty()) throw std::invalid_argument("give either --density (three times) or --gridded, not both");
    f = gridded_from_file(o.gridded);
    for (std::size_t k = 0; k < 3; ++k) F[k] = cdf_from_density(f[k]);
  } else {
    if (o.specs.size() != 3) throw std::invalid_argument("--density must be given exactly three times");
    std::array<DensitySpec, 3> d{parse_density(o.specs[0]), parse_density(o.specs[1]), parse_density(o.specs[2])};
    double lo = 1e300, hi = -1e300;
    for (const auto& s : d) {
      lo = std::min(lo, mean_of(s) - 8.0 * sd_of(s));
      hi = std::max(hi, mean_of(s) + 8.0 * sd_of(s));
    }
    if (o.lower_set) lo = o.lower;
    if (o.upper_set) hi = o.upper;
    const auto grid = make_grid(lo, hi, o.grid_points);
    for (std::size_t k = 0; k < 3; ++k) {
      f[k] = grid_density(d[k], grid);
      F[k] = grid_cdf(d[k], grid);
    }
  }
  const auto y = yi3(F[0], F[1], F[2]);
  const auto points = classify_intersections(f[0], f[1], f[2]);
  emit(o.out, out, "measures", 0, config, [&](std::ostream& os) {
    os << "quantity,value,kind,groups,height\n";
    const auto row = [&](const char* name, double v) { os << name << ',' << format_double(v) << ",,,\n"; };
    row("UNL", unl(f[0], f[1], f[2]));
    row("OVL12", ovl2(f[0], f[1]));
    row("OVL13", ovl2(f[0], f[2]));
    row("OVL23", ovl2(f[1], f[2]));
    row("OVL123", ovl3(f[0], f[1], f[2]));
    row("UNL_from_OVL", unl_from_ovl(f[0], f[1], f[2]));
    row("YI3", y.value);
    row("YI3_c1", y.c1);
    row("YI3_c2", y.c2);
    row("VUS", vus_from_curves(F[0], f[1], F[2]));
    for (const auto& p : points) {
      os << "intersection," << format_double(p.location) << ','
         << (p.kind == IntersectionKind::outer ? "outer" : "inner") << ",f" << p.equal_pair.first + 1 << "=f"
         << p.equal_pair.second + 1 << ',' << format_double(p.height) << '\n';
    }
  });
}

// ---- fit ----------------------------------------------------------------

struct FitCommand {
  FitOptions fit;
  DataOptions data;
  std::string out_dir = ".";
};

std::vector<std::pair<std::string, double>> diagnostics_for(const std::string& name, std::span<const double> chain) {
  std::vector<std::pair<std::string, double>> out;
  try {
    out.emplace_back(name + ",geweke_z", geweke(chain));
    out.emplace_back(name + ",ess", ess(chain));
  } catch (const std::invalid_argument&) {
    // Too short or constant; nothing to report.
  }
  return out;
}

void run_fit(const FitCommand& c, std::ostream& out, std::ostream& err, const std::string& config) {
  const RunConfig cfg = resolve(c.fit);
  const auto data = load_groups(c.data);
  std::array<std::vector<MixtureDraw>, 3> draws;
  for (std::size_t g = 0; g < 3; ++g) {
    RngStream rng(cfg.seed, g);
    draws[g] = fit_dpm(data[g].outcomes, cfg.dpm[g], cfg.length.n_burn, cfg.length.n_save, rng);
  }
  const auto grid = padded_grid(pooled(data), cfg.grid_points, cfg.grid_pad);
  const auto u = unl_ensemble(draws[0], draws[1], draws[2], grid);
  const auto y = yi3_ensemble(draws[0], draws[1], draws[2], grid);
  if (u.norm_failures > 0) {
    err << "note: " << u.norm_failures << " draw(s) lose more than " << kDefaultNormTolerance
        << " of their mass outside the grid; consider a larger --grid-pad\n";
  }
  for (std::size_t g = 0; g < 3; ++g) {
    emit(in_dir(c.out_dir, "draws_" + sanitize(data[g].label) + ".csv"), out, "fit", cfg.seed, config,
         [&](std::ostream& os) { write_mixture_draws(os, draws[g]); });
  }
  emit(in_dir(c.out_dir, "unl_draws.csv"), out, "fit", cfg.seed, config, [&](std::ostream& os) { write_ensemble(os, u); });
  emit(in_dir(c.out_dir, "yi3_draws.csv"), out, "fit", cfg.seed, config, [&](std::ostream& os) { write_ensemble(os, y); });
  emit(in_dir(c.out_dir, "summary.csv"), out, "fit", cfg.seed, config, [&](std::ostream& os) {
    write_summaries(os, {{"UNL", summarize(u, cfg.level)}, {"YI3", summarize(y, cfg.level)}});
  });
  emit(in_dir(c.out_dir, "diagnostics.csv"), out, "fit", cfg.seed, config, [&](std::ostream& os) {
    os << "chain,statistic,value\n";
    std::vector<std::pair<std::string, double>> rows = diagnostics_for("UNL", u.draws);
    for (std::size_t g = 0; g < 3; ++g) {
      std::vector<double> mean_chain, dens_chain;
      std::vector<double> sorted = data[g].outcomes;
      std::sort(sorted.begin(), sorted.end());
      const double med = quantile(sorted, 0.5);
      for (const auto& d : draws[g]) {
        double m = 0.0;
        for (std::size_t l = 0; l < d.components(); ++l) m += d.weights[l] * d.means[l];
        mean_chain.push_back(m);
        dens_chain.push_back(mixture_pdf(d, med));
      }
      const std::string label = csv_field(data[g].label);
      for (auto& r : diagnostics_for(label + ":mean", mean_chain)) rows.push_back(r);
      for (auto& r : diagnostics_for(label + ":density_at_median", dens_chain)) rows.push_back(r);
    }
    os << "UNL,norm_failures," << u.norm_failures << '\n';
    for (const auto& [k, v] : rows) os << k << ',' << format_double(v) << '\n';
  });
  out << "UNL median " << format_double(summarize(u, cfg.level).median) << '\n';
}

// ---- fit-cov --------------------------------------------------------------

struct FitCovCommand {
  FitOptions fit;
  DataOptions data;
  std::string effect;
  std::vector<std::string> effects;
  bool select = false;
  std::size_t select_burn = 1000, select_save = 2000;
  std::string x_name;
  double x_min = 0.0, x_max = 0.0;
  bool x_min_set = false, x_max_set = false;
  std::size_t x_points = 41;
  std::vector<std::string> at;
  std::string out_dir = ".";
};

std::vector<CovariateRecord> covariate_grid(const FitCovCommand& c, const std::array<GroupDataset, 3>& data) {
  if (c.data.covariates.empty()) throw std::invalid_argument("fit-cov needs --covariates");
  const std::string x_name = c.x_name.empty() ? c.data.covariates.front() : c.x_name;
  std::vector<double> xs;
  for (const auto& g : data) {
    const auto* col = std::get_if<std::vector<double>>(&g.covariates.at(x_name));
    if (!col) throw std::invalid_argument("covariate '" + x_name + "' must be continuous to form a curve");
    xs.insert(xs.end(), col->begin(), col->end());
  }
  const double lo = c.x_min_set ? c.x_min : *std::min_element(xs.begin(), xs.end());
  const double hi = c.x_max_set ? c.x_max : *std::max_element(xs.begin(), xs.end());
  if (c.x_points < 1 || !(hi >= lo)) throw std::invalid_argument("x grid: need x-points >= 1 and x-max >= x-min");

  CovariateRecord fixed;
  for (const auto& a : c.at) {
    const auto eq = a.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--at expects name=value, got '" + a + "'");
    const std::string name = a.substr(0, eq), value = a.substr(eq + 1);
    double v = 0.0;
    const bool is_cat = std::find(c.data.categorical.begin(), c.data.categorical.end(), name) != c.data.categorical.end();
    if (!is_cat && parse_double(value, v)) {
      fixed[name] = v;
    } else {
      fixed[name] = value;
    }
  }
  for (const auto& name : c.data.covariates) {
    if (name == x_name || fixed.contains(name)) continue;
    if (std::holds_alternative<std::vector<double>>(data[0].covariates.at(name))) {
      double sum = 0.0;
      std::size_t n = 0;
      for (const auto& g : data) {
        for (double v : std::get<std::vector<double>>(g.covariates.at(name))) {
          sum += v;
          ++n;
        }
      }
      fixed[name] = sum / static_cast<double>(n);
    } else {
      std::set<std::string> levels;
      for (const auto& g : data) {
        for (const auto& v : std::get<std::vector<std::string>>(g.covariates.at(name))) levels.insert(v);
      }
      fixed[name] = *levels.begin();
    }
  }
  std::vector<CovariateRecord> out;
  for (std::size_t j = 0; j < c.x_points; ++j) {
    CovariateRecord r = fixed;
    r[x_name] = c.x_points == 1 ? lo : lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(c.x_points - 1);
    out.push_back(std::move(r));
  }
  return out;
}

EffectSpec linear_spec(const std::vector<std::string>& covariates, const std::vector<std::string>& categorical) {
  EffectSpec s;
  for (const auto& name : covariates) {
    const bool cat = std::find(categorical.begin(), categorical.end(), name) != categorical.end();
    const Encoding e = cat ? Encoding::categorical() : Encoding::linear();
    s.terms.push_back({name, e, e});
  }
  return s;
}

void run_fit_cov(const FitCovCommand& c, std::ostream& out, const std::string& config) {
  RunConfig cfg = resolve(c.fit);
  if (!c.effects.empty() && c.effects.size() != 3) throw std::invalid_argument("--effects needs one spec per group (3)");
  for (std::size_t g = 0; g < 3; ++g) cfg.effect_specs[g] = !c.effects.empty() ? c.effects[g] : c.effect;
  cfg.validate();
  const auto data = load_groups(c.data);
  const auto x = covariate_grid(c, data);

  std::array<FitResult, 3> fits;
  std::array<std::string, 3> chosen;
  std::vector<std::tuple<std::size_t, std::string, double>> selection_rows;
  for (std::size_t g = 0; g < 3; ++g) {
    EffectSpec spec = cfg.effect_specs[g].empty() ? linear_spec(c.data.covariates, c.data.categorical)
                                                  : parse_effect_spec(cfg.effect_specs[g]);
    if (c.select) {
      const std::string x_name = c.x_name.empty() ? c.data.covariates.front() : c.x_name;
      const auto sel = select_design(data[g], default_candidates(x_name), cfg.lsbp[g],
                                     {c.select_burn, c.select_save}, cfg.seed, 100 + (g << 8));
      for (std::size_t k = 0; k < sel.candidates.size(); ++k) selection_rows.emplace_back(g, sel.candidates[k].label(), sel.waic[k]);
      spec = sel.spec();
    }
    RngStream rng(cfg.seed, g);
    fits[g] = fit_lsbp(data[g], spec, cfg.lsbp[g], cfg.length, rng);
    chosen[g] = spec.label();
  }
  const auto grid = padded_grid(pooled(data), cfg.grid_points, cfg.grid_pad);
  const auto curve = covariate_unl_ensemble(fits[0], fits[1], fits[2], x, grid);

  emit(in_dir(c.out_dir, "curve.csv"), out, "fit-cov", cfg.seed, config,
       [&](std::ostream& os) { write_curve_summary(os, curve, cfg.level); });
  emit(in_dir(c.out_dir, "design.csv"), out, "fit-cov", cfg.seed, config, [&](std::ostream& os) {
    os << "group,spec,waic,p_waic,chosen\n";
    for (std::size_t g = 0; g < 3; ++g) {
      os << csv_field(data[g].label) << ',' << csv_field(chosen[g]) << ',' << format_double(fits[g].waic.waic) << ','
         << format_double(fits[g].waic.p_waic) << ",1\n";
    }
    for (const auto& [g, label, w] : selection_rows) {
      os << csv_field(data[g].label) << ',' << csv_field(label) << ',' << format_double(w) << ",,"
         << (label == chosen[g] ? 1 : 0) << '\n';
    }
  });
  for (std::size_t g = 0; g < 3; ++g) {
    emit(in_dir(c.out_dir, "draws_" + sanitize(data[g].label) + ".csv"), out, "fit-cov", cfg.seed, config,
         [&](std::ostream& os) { write_lsbp_draws(os, fits[g]); });
  }
  out << "wrote " << x.size() << " curve points to " << in_dir(c.out_dir, "curve.csv") << '\n';
}

// ---- simulate ---------------------------------------------------------------

struct SimulateCommand {
  FitOptions fit;
  std::string scenario;
  std::string config = "high";
  std::vector<std::size_t> n{200};
  std::size_t reps = 20;
  bool select = false;
  double x_min = -0.8, x_max = 0.8;
  std::size_t x_points = 17;
  std::string out = "-";
  std::string records;
};

void run_simulate(const SimulateCommand& c, std::ostream& out, const std::string& config) {
  const RunConfig cfg = resolve(c.fit);
  ScenarioSpec spec;
  spec.id = parse_scenario_id(c.scenario);
  spec.config = parse_scenario_config(c.config);
  if (c.n.size() != 1 && c.n.size() != 3) throw std::invalid_argument("--n: give one size or three");
  for (std::size_t g = 0; g < 3; ++g) spec.n[g] = c.n.size() == 1 ? c.n[0] : c.n[g];
  spec.replicates = c.reps;
  spec.seed = cfg.seed;
  spec.validate();

  if (!spec.conditional()) {
    DpmEstimatorConfig ec{cfg.dpm[0], cfg.length, cfg.grid_points, cfg.level, cfg.seed};
    const auto report = run_replicates(spec, dpm_estimator(ec));
    emit(c.out, out, "simulate", cfg.seed, config, [&](std::ostream& os) { write_coverage(os, report); });
    if (!c.records.empty()) {
      emit(c.records, out, "simulate", cfg.seed, config, [&](std::ostream& os) {
        os << "replicate,ok,median,lower,upper,error\n";
        for (const auto& r : report.records) {
          os << r.replicate << ',' << (r.ok ? 1 : 0) << ',' << format_double(r.estimate.median) << ','
             << format_double(r.estimate.lower) << ',' << format_double(r.estimate.upper) << ',' << csv_field(r.error)
             << '\n';
        }
      });
    }
    return;
  }
  LsbpEstimatorConfig ec;
  ec.hyper = cfg.lsbp[0];
  ec.length = cfg.length;
  ec.select = c.select;
  ec.grid_points = cfg.grid_points;
  ec.level = cfg.level;
  ec.seed = cfg.seed;
  std::vector<double> xs;
  for (std::size_t j = 0; j < c.x_points; ++j) {
    xs.push_back(c.x_points == 1 ? c.x_min
                                 : c.x_min + (c.x_max - c.x_min) * static_cast<double>(j) / static_cast<double>(c.x_points - 1));
  }
  const auto report = run_curve_replicates(spec, lsbp_estimator(ec), xs);
  emit(c.out, out, "simulate", cfg.seed, config, [&](std::ostream& os) { write_curve_report(os, report); });
}

// ---- ppc ---------------------------------------------------------------------

struct PpcCommand {
  FitOptions fit;
  DataOptions data;
  std::string effect;
  std::string stat = "skewness";
  std::size_t reps = 1000;
  std::string out = "-";
};

void run_ppc(const PpcCommand& c, std::ostream& out, const std::string& config) {
  const RunConfig cfg = resolve(c.fit);
  if (c.stat != "skewness" && c.stat != "kurtosis") throw std::invalid_argument("--stat must be skewness or kurtosis");
  const Statistic stat = c.stat == "skewness" ? Statistic::skewness : Statistic::kurtosis;
  if (c.reps < 100) throw std::invalid_argument("--reps must be at least 100");
  const auto data = load_groups(c.data);
  std::array<PredictiveCheck, 3> checks;
  for (std::size_t g = 0; g < 3; ++g) {
    RngStream rng(cfg.seed, g);
    RngStream rep_rng(cfg.seed, 1000 + g);
    if (c.data.covariates.empty()) {
      const auto draws = fit_dpm(data[g].outcomes, cfg.dpm[g], cfg.length.n_burn, cfg.length.n_save, rng);
      checks[g] = posterior_predictive_stats(draws, data[g].outcomes, stat, c.reps, rep_rng);
    } else {
      const EffectSpec spec = c.effect.empty() ? linear_spec(c.data.covariates, c.data.categorical) : parse_effect_spec(c.effect);
      const auto fit = fit_lsbp(data[g], spec, cfg.lsbp[g], cfg.length, rng);
      checks[g] = posterior_predictive_stats(fit, data[g], stat, c.reps, rep_rng);
    }
  }
  emit(c.out, out, "ppc", cfg.seed, config, [&](std::ostream& os) {
    os << "group,statistic,kind,index,value\n";
    for (std::size_t g = 0; g < 3; ++g) {
      const std::string label = csv_field(data[g].label);
      os << label << ',' << c.stat << ",observed,0," << format_double(checks[g].observed) << '\n';
      for (std::size_t r = 0; r < checks[g].replicates.size(); ++r) {
        os << label << ',' << c.stat << ",replicate," << r + 1 << ',' << format_double(checks[g].replicates[r]) << '\n';
      }
    }
  });
}

// ---- compare ----------------------------------------------------------------

struct CompareCommand {
  std::string a, b;
  std::string out = "-";
};

void run_compare(const CompareCommand& c, std::ostream& out, const std::string& config) {
  const auto a = read_ensemble(fs::path(c.a));
  const auto b = read_ensemble(fs::path(c.b));
  const double p = compare_prob(a, b);
  emit(c.out, out, "compare", 0, config, [&](std::ostream& os) {
    os << "a,b,probability\n" << csv_field(c.a) << ',' << csv_field(c.b) << ',' << format_double(p) << '\n';
  });
}

void apply_threads(long requested) {
  if (requested <= 0) {
    if (const char* env = std::getenv("UNL_THREADS")) {
      double v = 0.0;
      if (!parse_double(env, v) || v < 1.0) throw std::invalid_argument("UNL_THREADS must be a positive integer");
      requested = static_cast<long>(v);
    }
  }
  if (requested > 0) omp_set_num_threads(static_cast<int>(requested));
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Underlap coefficient estimation for three-class biomarker data", "unl"};
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.set_config("--config", "", "TOML configuration file; command-line flags override it");
  app.set_version_flag("--version", std::string(kToolVersion));
  long threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: UNL_THREADS, then the OpenMP default)");
  app.require_subcommand(1);

  MeasuresOptions mo;
  auto* measures = app.add_subcommand("measures", "UNL, OVL, YI3, VUS and intersections of three densities");
  measures->add_option("--density", mo.specs, "normal:mu,sd | gamma:shape,rate | sn:xi,omega,alpha | mix:w,mu,sd;...")
      ->expected(0, 3)
      ->take_all();
  measures->add_option("--gridded", mo.gridded, "CSV with columns y,f1,f2,f3 on an equally spaced grid")->check(CLI::ExistingFile);
  measures->add_option("--grid-points", mo.grid_points, "Grid size (odd)")->capture_default_str();
  auto* lo_opt = measures->add_option("--lower", mo.lower, "Grid lower end (default: 8 sd below the lowest mean)");
  auto* hi_opt = measures->add_option("--upper", mo.upper, "Grid upper end (default: 8 sd above the highest mean)");
  measures->add_option("--out", mo.out, "Output CSV ('-' for stdout)")->capture_default_str();

  FitCommand fc;
  auto* fit = app.add_subcommand("fit", "Unconditional three-group fit with Dirichlet-process mixtures");
  add_fit_options(fit, fc.fit);
  add_data_options(fit, fc.data);
  fit->add_option("--out-dir", fc.out_dir, "Directory for output CSVs")->capture_default_str();

  FitCovCommand cc;
  auto* fitcov = app.add_subcommand("fit-cov", "Covariate-specific UNL curve with logit stick-breaking mixtures");
  add_fit_options(fitcov, cc.fit);
  add_data_options(fitcov, cc.data);
  fitcov->add_option("--effect", cc.effect, "Effect spec for all groups, e.g. \"x:w=linear,m=bspline(1)\"");
  fitcov->add_option("--effects", cc.effects, "One effect spec per group")->expected(3);
  fitcov->add_flag("--select-design", cc.select, "Choose each group's spec by WAIC");
  fitcov->add_option("--select-burn", cc.select_burn, "Burn-in for selection fits")->capture_default_str();
  fitcov->add_option("--select-save", cc.select_save, "Saved iterations for selection fits")->capture_default_str();
  fitcov->add_option("--x", cc.x_name, "Covariate that varies along the curve (default: first covariate)");
  auto* xmin_opt = fitcov->add_option("--x-min", cc.x_min, "Curve start (default: observed minimum)");
  auto* xmax_opt = fitcov->add_option("--x-max", cc.x_max, "Curve end (default: observed maximum)");
  fitcov->add_option("--x-points", cc.x_points, "Curve points")->capture_default_str();
  fitcov->add_option("--at", cc.at, "Fixed value for another covariate, name=value");
  fitcov->add_option("--out-dir", cc.out_dir, "Directory for output CSVs")->capture_default_str();

  SimulateCommand sc;
  auto* simulate = app.add_subcommand("simulate", "Replicate study on a simulation scenario");
  add_fit_options(simulate, sc.fit);
  simulate->add_option("scenario", sc.scenario, "U-I, U-II, U-III, C-I, C-II or C-III")->required();
  simulate->add_option("config", sc.config, "high, mid or low (unconditional scenarios)")->capture_default_str();
  simulate->add_option("--n", sc.n, "Sample size per group (1 or 3 values)")->expected(1, 3)->capture_default_str();
  simulate->add_option("--reps", sc.reps, "Replicates")->capture_default_str();
  simulate->add_flag("--select-design", sc.select, "Choose specs by WAIC (conditional scenarios)");
  simulate->add_option("--x-min", sc.x_min, "Curve start (conditional scenarios)")->capture_default_str();
  simulate->add_option("--x-max", sc.x_max, "Curve end")->capture_default_str();
  simulate->add_option("--x-points", sc.x_points, "Curve points")->capture_default_str();
  simulate->add_option("--out", sc.out, "Report CSV ('-' for stdout)")->capture_default_str();
  simulate->add_option("--records", sc.records, "Optional per-replicate CSV (unconditional scenarios)");

  PpcCommand pc;
  auto* ppc = app.add_subcommand("ppc", "Posterior predictive skewness or kurtosis replicates");
  add_fit_options(ppc, pc.fit);
  add_data_options(ppc, pc.data);
  ppc->add_option("--effect", pc.effect, "Effect spec when covariates are given");
  ppc->add_option("--stat", pc.stat, "skewness or kurtosis")->capture_default_str();
  ppc->add_option("--reps", pc.reps, "Replicate datasets")->capture_default_str();
  ppc->add_option("--out", pc.out, "Output CSV ('-' for stdout)")->capture_default_str();

  CompareCommand cmp;
  auto* compare = app.add_subcommand("compare", "Posterior probability that ensemble A exceeds ensemble B");
  compare->add_option("a", cmp.a, "Ensemble CSV (draw,value)")->required()->check(CLI::ExistingFile);
  compare->add_option("b", cmp.b, "Ensemble CSV (draw,value)")->required()->check(CLI::ExistingFile);
  compare->add_option("--out", cmp.out, "Output CSV ('-' for stdout)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    apply_threads(threads);
    mo.lower_set = lo_opt->count() > 0;
    mo.upper_set = hi_opt->count() > 0;
    cc.x_min_set = xmin_opt->count() > 0;
    cc.x_max_set = xmax_opt->count() > 0;
    // The hash covers every effective option value except output locations
    // and the thread count, which do not change results.
    std::string config = app.config_to_str(true, false);
    std::istringstream lines(config);
    std::string line, filtered;
    static const std::set<std::string> ignored{"out", "out-dir", "out_dir", "records", "threads"};
    while (std::getline(lines, line)) {
      std::string key = line.substr(0, line.find('='));
      key.erase(key.find_last_not_of(" \t") + 1);
      if (const auto dot = key.rfind('.'); dot != std::string::npos) key.erase(0, dot + 1);
      if (ignored.contains(key)) continue;
      filtered += line + '\n';
    }
    if (*measures) run_measures(mo, out, filtered);
    if (*fit) run_fit(fc, out, err, filtered);
    if (*fitcov) run_fit_cov(cc, out, filtered);
    if (*simulate) run_simulate(sc, out, filtered);
    if (*ppc) run_ppc(pc, out, filtered);
    if (*compare) run_compare(cmp, out, filtered);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace unl
