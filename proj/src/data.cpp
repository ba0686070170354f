#include "mixtobit/data.hpp"

#include <cmath>
#include <string>

#include "mixtobit/errors.hpp"

namespace mixtobit {

Eigen::Index ObservationSet::count(CensorStatus s) const {
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n(); ++i) {
    if (status(i) == s) ++k;
  }
  return k;
}

void ObservationSet::validate() const {
  if (n() < 1) throw ValidationError("observation set: need at least one row");
  if (p() < 1) {
    throw ValidationError("observation set: need at least one regressor");
  }
  if (X.rows() != n() || lower.size() != n() || upper.size() != n()) {
    throw ValidationError("observation set: y, X, lower, upper sizes differ");
  }
  for (Eigen::Index i = 0; i < n(); ++i) {
    if (!std::isfinite(y[i])) {
      throw ValidationError("observation set: non-finite outcome in row " +
                            std::to_string(i));
    }
    for (Eigen::Index j = 0; j < p(); ++j) {
      if (!std::isfinite(X(i, j))) {
        throw ValidationError("observation set: non-finite regressor in row " +
                              std::to_string(i));
      }
    }
    if (std::isnan(lower[i]) || std::isnan(upper[i])) {
      throw ValidationError("observation set: NaN bound in row " +
                            std::to_string(i));
    }
    if (!(lower[i] < upper[i])) {
      throw ValidationError("observation set: lower >= upper in row " +
                            std::to_string(i));
    }
    if (!(lower[i] <= y[i] && y[i] <= upper[i])) {
      throw ValidationError("observation set: outcome outside bounds in row " +
                            std::to_string(i));
    }
  }
}

}  // namespace mixtobit
