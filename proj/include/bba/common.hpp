#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace bba {

using FeatureVector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Malformed or unreadable input data (CSV files, model files).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numerical breakdown: ill-conditioned kernel matrix, non-converging
/// calibration, infeasible inner optimization step.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Bad configuration file or option value.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Axis-aligned box of valid feature values.
struct Box {
  FeatureVector lower;
  FeatureVector upper;

  int dim() const { return static_cast<int>(lower.size()); }

  bool contains(const FeatureVector& x, double tol = 0.0) const {
    if (x.size() != lower.size()) return false;
    for (int d = 0; d < x.size(); ++d) {
      if (x[d] < lower[d] - tol || x[d] > upper[d] + tol) return false;
    }
    return true;
  }

  FeatureVector clamp(const FeatureVector& x) const {
    return x.cwiseMax(lower).cwiseMin(upper);
  }

  static Box unit(int d) {
    return Box{FeatureVector::Zero(d), FeatureVector::Ones(d)};
  }
};

inline double l1_distance(const FeatureVector& a, const FeatureVector& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("l1_distance: dimension mismatch");
  }
  return (a - b).cwiseAbs().sum();
}

}  // namespace bba
