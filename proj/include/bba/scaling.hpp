#pragma once

#include <Eigen/Core>

#include "bba/common.hpp"

namespace bba {

/// Per-dimension affine map from raw feature values into the model's input
/// space. MinMax maps the training range onto [0,1]; Identity keeps raw
/// values and only remembers the observed range for the search bounds.
class FeatureScaling {
 public:
  enum class Mode { kMinMax, kIdentity };

  FeatureScaling() = default;
  FeatureScaling(Mode mode, FeatureVector min, FeatureVector span)
      : mode_(mode), min_(std::move(min)), span_(std::move(span)) {}

  static FeatureScaling fit_minmax(const Matrix& rows) {
    FeatureVector mn = rows.colwise().minCoeff();
    FeatureVector mx = rows.colwise().maxCoeff();
    FeatureVector span = mx - mn;
    for (int d = 0; d < span.size(); ++d) {
      if (span[d] <= 0.0) span[d] = 1.0;  // constant column maps to 0
    }
    return FeatureScaling(Mode::kMinMax, std::move(mn), std::move(span));
  }

  static FeatureScaling identity_from(const Matrix& rows) {
    FeatureVector mn = rows.colwise().minCoeff();
    FeatureVector mx = rows.colwise().maxCoeff();
    return FeatureScaling(Mode::kIdentity, std::move(mn), mx - mn);
  }

  Mode mode() const { return mode_; }
  int dim() const { return static_cast<int>(min_.size()); }
  const FeatureVector& min() const { return min_; }
  const FeatureVector& span() const { return span_; }

  FeatureVector apply(const FeatureVector& raw) const {
    if (mode_ == Mode::kIdentity) return raw;
    return (raw - min_).cwiseQuotient(span_);
  }

  FeatureVector invert(const FeatureVector& z) const {
    if (mode_ == Mode::kIdentity) return z;
    return min_ + z.cwiseProduct(span_);
  }

  Matrix apply_rows(const Matrix& rows) const {
    if (mode_ == Mode::kIdentity) return rows;
    Matrix out(rows.rows(), rows.cols());
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
      out.row(i) = apply(rows.row(i).transpose()).transpose();
    }
    return out;
  }

  /// Bounds of the model input space: [0,1]^d for MinMax, the observed raw
  /// range for Identity.
  Box model_space_bounds() const {
    if (mode_ == Mode::kIdentity) {
      return Box{min_, min_ + span_};
    }
    return Box::unit(dim());
  }

 private:
  Mode mode_ = Mode::kMinMax;
  FeatureVector min_;
  FeatureVector span_;
};

}  // namespace bba
