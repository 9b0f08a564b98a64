#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace unl {

/// One covariate column: continuous values or categorical labels.
using CovariateColumn = std::variant<std::vector<double>, std::vector<std::string>>;
/// One subject's covariate values by name.
using CovariateValue = std::variant<double, std::string>;
using CovariateRecord = std::map<std::string, CovariateValue>;

/// Outcomes and optional covariates for one disease group.
struct GroupDataset {
  std::string label;
  std::vector<double> outcomes;
  std::map<std::string, CovariateColumn> covariates;

  std::size_t size() const { return outcomes.size(); }
  CovariateRecord record(std::size_t i) const;
  /// Throws std::invalid_argument if a covariate column length differs from
  /// the outcomes or an outcome is non-finite.
  void validate() const;
  bool operator==(const GroupDataset&) const = default;
};

}  // namespace unl
