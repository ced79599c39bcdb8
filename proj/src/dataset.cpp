#include "rsm/dataset.hpp"

#include <cmath>

#include "rsm/error.hpp"

namespace rsm {

void Dataset::validate() const {
  if (design.runs() != responses.size()) {
    throw DomainError("dataset has " + std::to_string(design.runs()) + " runs but " +
                      std::to_string(responses.size()) + " responses");
  }
  for (Eigen::Index i = 0; i < responses.size(); ++i) {
    const double v = responses(i);
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw DomainError("response at run " + std::to_string(i + 1) + " is outside [0, 1]");
    }
  }
}

Dataset Dataset::subset(const Design& sub) const {
  const auto rows = match_rows(design, sub);
  Dataset out;
  out.design = sub;
  out.responses.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.responses(static_cast<Eigen::Index>(i)) = responses(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

}  // namespace rsm
