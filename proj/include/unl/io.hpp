#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "unl/dataset.hpp"
#include "unl/dpm.hpp"
#include "unl/lsbp.hpp"
#include "unl/posterior.hpp"
#include "unl/simulation.hpp"

namespace unl {

inline constexpr std::string_view kToolVersion = "0.1.0";

/// Shortest text with 17 significant digits, enough to round-trip a double.
std::string format_double(double v);
/// Strict parse of a whole string as a finite or infinite double.
bool parse_double(std::string_view text, double& out);

/// 64-bit FNV-1a hash, used to fingerprint configurations in output headers.
std::uint64_t fnv1a(std::string_view text);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row

  /// Index of a header column; throws naming the column if absent.
  std::size_t column(const std::string& name) const;
};

/// Comma-separated values with a header row. Lines starting with '#' and
/// blank lines are skipped; fields may be double-quoted ("" escapes a quote).
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::filesystem::path& path);
/// Quotes a field only when it contains a comma, quote or newline.
std::string csv_field(std::string_view text);

struct DatasetSchema {
  std::string group_column = "group";
  std::string outcome_column = "y";
  std::vector<std::string> covariates;
  /// Covariates to read as labels even when they look numeric. Others are
  /// continuous if every cell parses as a number, categorical otherwise.
  std::vector<std::string> categorical;
};

/// One dataset per distinct group label, sorted by label. Errors name the
/// offending line and column.
std::vector<GroupDataset> read_dataset(std::istream& in, const DatasetSchema& schema);
std::vector<GroupDataset> read_dataset(const std::filesystem::path& path, const DatasetSchema& schema);
/// Writes the schema's group and outcome columns followed by every
/// covariate, sorted by name. Numbers use format_double.
void write_dataset(std::ostream& out, const std::vector<GroupDataset>& groups, const DatasetSchema& schema = {});

/// "# unl 0.1.0", command, seed and the config hash.
void write_header(std::ostream& out, std::string_view command, std::uint64_t seed, std::string_view config_text);

/// One row per draw: w1..wL, mu1..muL, var1..varL.
void write_mixture_draws(std::ostream& out, const std::vector<MixtureDraw>& draws);
std::vector<MixtureDraw> read_mixture_draws(std::istream& in);

/// One row per draw: gamma blocks (g<l>_<k>), beta blocks (b<l>_<k>),
/// variances (var<l>), then the outcome standardization (y_mean, y_sd).
void write_lsbp_draws(std::ostream& out, const FitResult& fit);

/// "draw,value" rows.
void write_ensemble(std::ostream& out, const ScalarEnsemble& e);
ScalarEnsemble read_ensemble(std::istream& in, std::string label);
ScalarEnsemble read_ensemble(const std::filesystem::path& path);

/// "label,median,lower,upper,mean" rows.
void write_summaries(std::ostream& out, const std::vector<std::pair<std::string, Summary>>& rows);
/// Covariate columns followed by median, lower, upper.
void write_curve_summary(std::ostream& out, const CurveEnsemble& e, double level);
void write_coverage(std::ostream& out, const CoverageReport& report);
void write_curve_report(std::ostream& out, const CurveReport& report);

/// Everything a fitting subcommand needs, validated before any work starts.
struct RunConfig {
  std::size_t grid_points = kDefaultGridPoints;
  double grid_pad = 0.15;
  std::array<DpmHyper, 3> dpm{};
  std::array<LsbpHyper, 3> lsbp{};
  std::array<std::string, 3> effect_specs{"", "", ""};
  McmcLength length{};
  double level = 0.95;
  std::uint64_t seed = 1;
  std::size_t threads = 0;  // 0: OpenMP default
  std::filesystem::path output_dir = ".";

  /// Throws std::invalid_argument with a message naming the field.
  void validate() const;
};

}  // namespace unl
