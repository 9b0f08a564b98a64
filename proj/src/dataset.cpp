#include "unl/dataset.hpp"

#include <cmath>
#include <stdexcept>

namespace unl {

CovariateRecord GroupDataset::record(std::size_t i) const {
  CovariateRecord out;
  for (const auto& [name, column] : covariates) {
    if (const auto* num = std::get_if<std::vector<double>>(&column)) {
      out.emplace(name, num->at(i));
    } else {
      out.emplace(name, std::get<std::vector<std::string>>(column).at(i));
    }
  }
  return out;
}

void GroupDataset::validate() const {
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (!std::isfinite(outcomes[i])) {
      throw std::invalid_argument("group '" + label + "': outcome " + std::to_string(i) + " is not finite");
    }
  }
  for (const auto& [name, column] : covariates) {
    const std::size_t len = std::visit([](const auto& c) { return c.size(); }, column);
    if (len != outcomes.size()) {
      throw std::invalid_argument("group '" + label + "': covariate '" + name + "' has " + std::to_string(len) +
                                  " values for " + std::to_string(outcomes.size()) + " outcomes");
    }
  }
}

}  // namespace unl
