#include "unl/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>

namespace unl {

namespace {

std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  if (quoted) throw std::runtime_error("line " + std::to_string(line_no) + ": unterminated quoted field");
  fields.push_back(std::move(cur));
  return fields;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  return in;
}

double cell_number(const CsvTable& t, std::size_t r, std::size_t c) {
  double v = 0.0;
  if (!parse_double(t.rows[r][c], v)) {
    throw std::runtime_error("line " + std::to_string(t.line_numbers[r]) + ", column '" + t.header[c] +
                             "': '" + t.rows[r][c] + "' is not a number");
  }
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

bool parse_double(std::string_view text, double& out) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return false;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc() && res.ptr == text.data() + text.size();
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw std::runtime_error("missing column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r" || line.front() == '#') continue;
    auto fields = split_csv_line(line, line_no);
    if (!have_header) {
      t.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != t.header.size()) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": expected " + std::to_string(t.header.size()) +
                               " fields, found " + std::to_string(fields.size()));
    }
    t.rows.push_back(std::move(fields));
    t.line_numbers.push_back(line_no);
  }
  if (!have_header) throw std::runtime_error("empty CSV input: no header row");
  return t;
}

CsvTable read_csv_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_csv(in);
}

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\n") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<GroupDataset> read_dataset(std::istream& in, const DatasetSchema& schema) {
  const CsvTable t = read_csv(in);
  const std::size_t gcol = t.column(schema.group_column);
  const std::size_t ycol = t.column(schema.outcome_column);
  std::vector<std::size_t> ccols;
  for (const auto& c : schema.covariates) ccols.push_back(t.column(c));

  std::vector<bool> categorical(ccols.size(), false);
  for (std::size_t k = 0; k < ccols.size(); ++k) {
    if (std::find(schema.categorical.begin(), schema.categorical.end(), schema.covariates[k]) != schema.categorical.end()) {
      categorical[k] = true;
      continue;
    }
    double v = 0.0;
    for (const auto& row : t.rows) {
      if (!parse_double(row[ccols[k]], v)) {
        categorical[k] = true;
        break;
      }
    }
  }

  std::map<std::string, GroupDataset> groups;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string& label = row[gcol];
    if (label.empty()) throw std::runtime_error("line " + std::to_string(t.line_numbers[r]) + ": empty group label");
    auto& g = groups[label];
    g.label = label;
    g.outcomes.push_back(cell_number(t, r, ycol));
    for (std::size_t k = 0; k < ccols.size(); ++k) {
      const auto& name = schema.covariates[k];
      if (categorical[k]) {
        if (row[ccols[k]].empty()) {
          throw std::runtime_error("line " + std::to_string(t.line_numbers[r]) + ", column '" + name + "': missing value");
        }
        auto [it, fresh] = g.covariates.try_emplace(name, std::vector<std::string>{});
        std::get<std::vector<std::string>>(it->second).push_back(row[ccols[k]]);
      } else {
        auto [it, fresh] = g.covariates.try_emplace(name, std::vector<double>{});
        std::get<std::vector<double>>(it->second).push_back(cell_number(t, r, ccols[k]));
      }
    }
  }
  if (groups.empty()) throw std::runtime_error("dataset has no rows");
  std::vector<GroupDataset> out;
  for (auto& [label, g] : groups) {
    g.validate();
    out.push_back(std::move(g));
  }
  return out;
}

std::vector<GroupDataset> read_dataset(const std::filesystem::path& path, const DatasetSchema& schema) {
  auto in = open_input(path);
  return read_dataset(in, schema);
}

void write_dataset(std::ostream& out, const std::vector<GroupDataset>& groups, const DatasetSchema& schema) {
  std::set<std::string> names;
  for (const auto& g : groups) {
    for (const auto& [name, col] : g.covariates) names.insert(name);
  }
  out << csv_field(schema.group_column) << ',' << csv_field(schema.outcome_column);
  for (const auto& n : names) out << ',' << csv_field(n);
  out << '\n';
  for (const auto& g : groups) {
    g.validate();
    for (std::size_t i = 0; i < g.size(); ++i) {
      out << csv_field(g.label) << ',' << format_double(g.outcomes[i]);
      for (const auto& n : names) {
        const auto it = g.covariates.find(n);
        if (it == g.covariates.end()) throw std::invalid_argument("group '" + g.label + "' lacks covariate '" + n + "'");
        out << ',';
        if (const auto* num = std::get_if<std::vector<double>>(&it->second)) {
          out << format_double((*num)[i]);
        } else {
          out << csv_field(std::get<std::vector<std::string>>(it->second)[i]);
        }
      }
      out << '\n';
    }
  }
}

void write_header(std::ostream& out, std::string_view command, std::uint64_t seed, std::string_view config_text) {
  char hash[17];
  const auto h = fnv1a(config_text);
  const auto res = std::to_chars(hash, hash + 16, h, 16);
  const std::string hex(hash, res.ptr);
  out << "# unl " << kToolVersion << '\n'
      << "# command: " << command << '\n'
      << "# seed: " << seed << '\n'
      << "# config-hash: " << std::string(16 - hex.size(), '0') << hex << '\n';
}

void write_mixture_draws(std::ostream& out, const std::vector<MixtureDraw>& draws) {
  if (draws.empty()) throw std::invalid_argument("write_mixture_draws: no draws");
  const std::size_t L = draws.front().components();
  for (std::size_t l = 1; l <= L; ++l) out << (l > 1 ? "," : "") << 'w' << l;
  for (std::size_t l = 1; l <= L; ++l) out << ",mu" << l;
  for (std::size_t l = 1; l <= L; ++l) out << ",var" << l;
  out << '\n';
  for (const auto& d : draws) {
    if (d.components() != L) throw std::invalid_argument("write_mixture_draws: draws differ in component count");
    for (std::size_t l = 0; l < L; ++l) out << (l > 0 ? "," : "") << format_double(d.weights[l]);
    for (double v : d.means) out << ',' << format_double(v);
    for (double v : d.variances) out << ',' << format_double(v);
    out << '\n';
  }
}

std::vector<MixtureDraw> read_mixture_draws(std::istream& in) {
  const CsvTable t = read_csv(in);
  if (t.header.size() % 3 != 0 || t.header.empty()) throw std::runtime_error("mixture draws: expected 3L columns");
  const std::size_t L = t.header.size() / 3;
  std::vector<MixtureDraw> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    MixtureDraw d;
    for (std::size_t l = 0; l < L; ++l) {
      d.weights.push_back(cell_number(t, r, l));
      d.means.push_back(cell_number(t, r, L + l));
      d.variances.push_back(cell_number(t, r, 2 * L + l));
    }
    out.push_back(std::move(d));
  }
  return out;
}

void write_lsbp_draws(std::ostream& out, const FitResult& fit) {
  if (fit.draws.empty()) throw std::invalid_argument("write_lsbp_draws: no draws");
  const auto& first = fit.draws.front();
  const std::size_t L = first.components();
  std::vector<std::string> cols;
  for (std::size_t l = 0; l + 1 < L; ++l) {
    for (Eigen::Index k = 0; k < first.gamma[l].size(); ++k) cols.push_back("g" + std::to_string(l + 1) + "_" + std::to_string(k + 1));
  }
  for (std::size_t l = 0; l < L; ++l) {
    for (Eigen::Index k = 0; k < first.beta[l].size(); ++k) cols.push_back("b" + std::to_string(l + 1) + "_" + std::to_string(k + 1));
  }
  for (std::size_t l = 0; l < L; ++l) cols.push_back("var" + std::to_string(l + 1));
  cols.push_back("y_mean");
  cols.push_back("y_sd");
  for (std::size_t c = 0; c < cols.size(); ++c) out << (c > 0 ? "," : "") << cols[c];
  out << '\n';
  for (const auto& d : fit.draws) {
    bool first_field = true;
    const auto put = [&](double v) {
      out << (first_field ? "" : ",") << format_double(v);
      first_field = false;
    };
    for (const auto& g : d.gamma) {
      for (Eigen::Index k = 0; k < g.size(); ++k) put(g[k]);
    }
    for (const auto& b : d.beta) {
      for (Eigen::Index k = 0; k < b.size(); ++k) put(b[k]);
    }
    for (double v : d.variances) put(v);
    put(fit.y_mean);
    put(fit.y_sd);
    out << '\n';
  }
}

void write_ensemble(std::ostream& out, const ScalarEnsemble& e) {
  out << "draw,value\n";
  for (std::size_t s = 0; s < e.draws.size(); ++s) out << s + 1 << ',' << format_double(e.draws[s]) << '\n';
}

ScalarEnsemble read_ensemble(std::istream& in, std::string label) {
  const CsvTable t = read_csv(in);
  const std::size_t c = t.column("value");
  ScalarEnsemble e;
  e.label = std::move(label);
  for (std::size_t r = 0; r < t.rows.size(); ++r) e.draws.push_back(cell_number(t, r, c));
  e.validate();
  return e;
}

ScalarEnsemble read_ensemble(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_ensemble(in, path.filename().string());
}

void write_summaries(std::ostream& out, const std::vector<std::pair<std::string, Summary>>& rows) {
  out << "label,median,lower,upper,mean\n";
  for (const auto& [label, s] : rows) {
    out << csv_field(label) << ',' << format_double(s.median) << ',' << format_double(s.lower) << ','
        << format_double(s.upper) << ',' << format_double(s.mean) << '\n';
  }
}

void write_curve_summary(std::ostream& out, const CurveEnsemble& e, double level) {
  const auto summaries = summarize(e, level);
  std::vector<std::string> names;
  if (!e.x.empty()) {
    for (const auto& [name, value] : e.x.front()) names.push_back(name);
  }
  for (const auto& n : names) out << csv_field(n) << ',';
  out << "median,lower,upper\n";
  for (std::size_t j = 0; j < e.x.size(); ++j) {
    for (const auto& n : names) {
      const auto& v = e.x[j].at(n);
      if (const auto* num = std::get_if<double>(&v)) {
        out << format_double(*num) << ',';
      } else {
        out << csv_field(std::get<std::string>(v)) << ',';
      }
    }
    out << format_double(summaries[j].median) << ',' << format_double(summaries[j].lower) << ','
        << format_double(summaries[j].upper) << '\n';
  }
}

void write_coverage(std::ostream& out, const CoverageReport& r) {
  out << "scenario,n1,n2,n3,truth,replicates,failures,mean_median,bias,coverage,mean_width\n";
  out << r.scenario << ',' << r.n[0] << ',' << r.n[1] << ',' << r.n[2] << ',' << format_double(r.truth) << ','
      << r.replicates << ',' << r.failures << ',' << format_double(r.mean_median) << ',' << format_double(r.bias)
      << ',' << format_double(r.coverage) << ',' << format_double(r.mean_width) << '\n';
}

void write_curve_report(std::ostream& out, const CurveReport& r) {
  out << "# scenario: " << r.scenario << ", n = (" << r.n[0] << ',' << r.n[1] << ',' << r.n[2]
      << "), replicates = " << r.replicates << ", failures = " << r.failures << ", mae = " << format_double(r.mae)
      << '\n';
  out << "x,truth,mean_median,coverage\n";
  for (std::size_t j = 0; j < r.x.size(); ++j) {
    out << format_double(r.x[j]) << ',' << format_double(r.truth[j]) << ',' << format_double(r.mean_median[j]) << ','
        << format_double(r.coverage[j]) << '\n';
  }
}

void RunConfig::validate() const {
  if (grid_points < 3 || grid_points % 2 == 0) throw std::invalid_argument("grid_points must be odd and at least 3");
  if (!(grid_pad >= 0.0) || !std::isfinite(grid_pad)) throw std::invalid_argument("grid_pad must be nonnegative");
  for (std::size_t g = 0; g < 3; ++g) {
    const std::string where = "group " + std::to_string(g + 1) + ": ";
    try {
      dpm[g].validate(2);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(where + e.what());
    }
    if (lsbp[g].L < 2) throw std::invalid_argument(where + "lsbp: L must be at least 2");
    if (!(lsbp[g].a_sig > 0.0)) throw std::invalid_argument(where + "lsbp: a_sig must be positive");
    if (!(lsbp[g].b_sig > 0.0)) throw std::invalid_argument(where + "lsbp: b_sig must be positive");
    if (!(lsbp[g].prior_variance > 0.0)) throw std::invalid_argument(where + "lsbp: prior_variance must be positive");
    if (!effect_specs[g].empty()) {
      try {
        parse_effect_spec(effect_specs[g]);
      } catch (const std::exception& e) {
        throw std::invalid_argument(where + "effect spec: " + e.what());
      }
    }
  }
  if (length.n_burn < 1) throw std::invalid_argument("burn must be at least 1");
  if (length.n_save < 2) throw std::invalid_argument("save must be at least 2");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("level must lie in (0, 1)");
}

}  // namespace unl
