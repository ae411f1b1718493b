#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "bba/common.hpp"
#include "bba/platt.hpp"
#include "bba/rng.hpp"

namespace bba {

namespace detail {

inline void check_binary_labels(const std::vector<int>& y) {
  bool has_pos = false, has_neg = false;
  for (int v : y) {
    if (v == 1) {
      has_pos = true;
    } else if (v == 0) {
      has_neg = true;
    } else {
      throw std::invalid_argument("svm training: labels must be 0 or 1");
    }
  }
  if (!has_pos || !has_neg) {
    throw std::invalid_argument("svm training: both classes required");
  }
}

/// Deterministic split of row indices into (fit, calibration) parts.
inline std::pair<std::vector<int>, std::vector<int>> calibration_split(
    int n, double calib_fraction, Rng& rng) {
  std::vector<int> perm = permutation(n, rng);
  const int n_calib = std::max(1, static_cast<int>(n * calib_fraction));
  std::vector<int> calib(perm.begin(), perm.begin() + n_calib);
  std::vector<int> fit(perm.begin() + n_calib, perm.end());
  return {std::move(fit), std::move(calib)};
}

}  // namespace detail

struct LinearSvmConfig {
  double lambda = 3e-6;        // L2 regularization strength
  int epochs = 150;
  double calib_fraction = 0.15;
  std::uint64_t seed = 1;
};

/// Linear max-margin scorer, Platt-calibrated. The bias rides along as an
/// augmented constant feature, so it is regularized with the weights.
struct LinearSvm {
  Eigen::VectorXd weights;
  double bias = 0.0;
  PlattParams platt;

  double score(const FeatureVector& x) const {
    if (x.size() != weights.size()) {
      throw std::invalid_argument("LinearSvm: dimension mismatch");
    }
    return weights.dot(x) + bias;
  }
};

/// Hinge-loss training by stochastic subgradient descent with step size
/// 1/(lambda * t). Calibration scores come from a held-out slice so the
/// sigmoid is not fitted on interpolated outputs.
inline LinearSvm train_linear_svm(const Matrix& x,
                                  const std::vector<int>& labels,
                                  const LinearSvmConfig& cfg = {}) {
  const int n = static_cast<int>(x.rows());
  const int d = static_cast<int>(x.cols());
  if (n != static_cast<int>(labels.size()) || n == 0) {
    throw std::invalid_argument("train_linear_svm: bad input sizes");
  }
  detail::check_binary_labels(labels);

  Rng rng(cfg.seed);
  auto [fit_rows, calib_rows] =
      detail::calibration_split(n, cfg.calib_fraction, rng);
  detail::check_binary_labels([&] {
    std::vector<int> sub;
    for (int i : fit_rows) sub.push_back(labels[i]);
    return sub;
  }());

  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  double b = 0.0;
  std::uint64_t t = 0;
  std::vector<int> order = fit_rows;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle(order, rng);
    for (int i : order) {
      ++t;
      const double eta = 1.0 / (cfg.lambda * static_cast<double>(t));
      const double yi = labels[i] == 1 ? 1.0 : -1.0;
      const double margin = yi * (x.row(i).dot(w) + b);
      const double shrink = 1.0 - eta * cfg.lambda;
      w *= shrink;
      b *= shrink;
      if (margin < 1.0) {
        w += eta * yi * x.row(i).transpose();
        b += eta * yi;
      }
    }
  }

  LinearSvm model;
  model.weights = std::move(w);
  model.bias = b;

  std::vector<double> calib_scores;
  std::vector<int> calib_labels;
  calib_scores.reserve(calib_rows.size());
  for (int i : calib_rows) {
    calib_scores.push_back(model.score(x.row(i).transpose()));
    calib_labels.push_back(labels[i]);
  }
  model.platt = platt_calibrate(calib_scores, calib_labels);
  return model;
}

struct RbfSvmConfig {
  double gamma = 1.5;          // exp(-gamma * ||a-b||^2)
  double cost = 20.0;          // dual box bound
  int epochs = 30;
  double calib_fraction = 0.15;
  double support_tol = 1e-9;
  std::uint64_t seed = 1;
};

/// Kernelized max-margin scorer: score(x) = sum_i coeff_i * k(s_i, x). The
/// raw score carries no bias; the decision offset comes from the Platt
/// sigmoid fitted on held-out scores.
struct RbfSvm {
  Matrix support;              // one support point per row
  Eigen::VectorXd coeff;       // alpha_i * y_i for each support point
  double gamma = 1.0;
  PlattParams platt;

  double score(const FeatureVector& x) const {
    if (x.size() != support.cols()) {
      throw std::invalid_argument("RbfSvm: dimension mismatch");
    }
    double s = 0.0;
    for (Eigen::Index i = 0; i < support.rows(); ++i) {
      const double d2 = (support.row(i).transpose() - x).squaredNorm();
      s += coeff[i] * std::exp(-gamma * d2);
    }
    return s;
  }
};

/// Dual coordinate ascent on the bias-free hinge-loss dual with box
/// constraints [0, cost]. The full Gram matrix is precomputed, which is fine
/// at a few thousand training points.
inline RbfSvm train_rbf_svm(const Matrix& x, const std::vector<int>& labels,
                            const RbfSvmConfig& cfg = {}) {
  const int n = static_cast<int>(x.rows());
  if (n != static_cast<int>(labels.size()) || n == 0) {
    throw std::invalid_argument("train_rbf_svm: bad input sizes");
  }
  detail::check_binary_labels(labels);

  Rng rng(cfg.seed);
  auto [fit_rows, calib_rows] =
      detail::calibration_split(n, cfg.calib_fraction, rng);

  const int m = static_cast<int>(fit_rows.size());
  Matrix xf(m, x.cols());
  Eigen::VectorXd yf(m);
  for (int i = 0; i < m; ++i) {
    xf.row(i) = x.row(fit_rows[i]);
    yf[i] = labels[fit_rows[i]] == 1 ? 1.0 : -1.0;
  }
  if ((yf.array() > 0).count() == 0 || (yf.array() < 0).count() == 0) {
    throw std::invalid_argument("train_rbf_svm: both classes required");
  }

  Eigen::VectorXd sq = xf.rowwise().squaredNorm();
  Matrix gram = -2.0 * (xf * xf.transpose());
  gram.colwise() += sq;
  gram.rowwise() += sq.transpose();
  gram = (-cfg.gamma * gram.array()).exp().matrix();

  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(m);  // f_i = score(x_i)
  std::vector<int> order(m);
  for (int i = 0; i < m; ++i) order[i] = i;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle(order, rng);
    for (int i : order) {
      const double grad = yf[i] * f[i] - 1.0;
      double projected = grad;
      if (alpha[i] <= 0.0) {
        projected = std::min(grad, 0.0);
      } else if (alpha[i] >= cfg.cost) {
        projected = std::max(grad, 0.0);
      }
      if (projected == 0.0) continue;
      const double updated =
          std::min(std::max(alpha[i] - grad / gram(i, i), 0.0), cfg.cost);
      const double delta = updated - alpha[i];
      if (delta == 0.0) continue;
      alpha[i] = updated;
      f += delta * yf[i] * gram.col(i);
    }
  }

  int n_support = 0;
  for (int i = 0; i < m; ++i) {
    if (alpha[i] > cfg.support_tol) ++n_support;
  }
  RbfSvm model;
  model.gamma = cfg.gamma;
  model.support.resize(n_support, x.cols());
  model.coeff.resize(n_support);
  int k = 0;
  for (int i = 0; i < m; ++i) {
    if (alpha[i] > cfg.support_tol) {
      model.support.row(k) = xf.row(i);
      model.coeff[k] = alpha[i] * yf[i];
      ++k;
    }
  }

  std::vector<double> calib_scores;
  std::vector<int> calib_labels;
  for (int i : calib_rows) {
    calib_scores.push_back(model.score(x.row(i).transpose()));
    calib_labels.push_back(labels[i]);
  }
  model.platt = platt_calibrate(calib_scores, calib_labels);
  return model;
}

}  // namespace bba
