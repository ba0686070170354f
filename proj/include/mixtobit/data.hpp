#ifndef MIXTOBIT_DATA_HPP_
#define MIXTOBIT_DATA_HPP_

#include <Eigen/Dense>

namespace mixtobit {

enum class CensorStatus { kLeft, kInterior, kRight };

// Censored regression sample. Bounds are extended reals: an infinite bound
// means that side is never censored. Censoring status is derived from exact
// equality with the bound, never stored, so ingestion must keep bound values
// bit-exact.
struct ObservationSet {
  Eigen::VectorXd y;
  Eigen::MatrixXd X;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Eigen::Index n() const { return y.size(); }
  Eigen::Index p() const { return X.cols(); }

  CensorStatus status(Eigen::Index i) const {
    if (y[i] == lower[i]) return CensorStatus::kLeft;
    if (y[i] == upper[i]) return CensorStatus::kRight;
    return CensorStatus::kInterior;
  }

  Eigen::Index count(CensorStatus s) const;

  // Throws ValidationError when shapes disagree, X or y has non-finite
  // entries, or any row violates lower <= y <= upper, lower < upper.
  void validate() const;
};

}  // namespace mixtobit

#endif  // MIXTOBIT_DATA_HPP_
