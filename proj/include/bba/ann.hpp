#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "bba/common.hpp"
#include "bba/rng.hpp"

namespace bba {

/// One-hidden-layer network: tanh hidden units, sigmoid output giving the
/// class-1 probability directly.
struct AnnModel {
  Matrix w1;             // d x hidden
  Eigen::VectorXd b1;    // hidden
  Eigen::VectorXd w2;    // hidden
  double b2 = 0.0;

  double logit(const FeatureVector& x) const {
    if (x.size() != w1.rows()) {
      throw std::invalid_argument("AnnModel: dimension mismatch");
    }
    const Eigen::VectorXd h = ((w1.transpose() * x) + b1).array().tanh();
    return w2.dot(h) + b2;
  }

  double probability(const FeatureVector& x) const {
    const double t = logit(x);
    if (t >= 0.0) {
      return 1.0 / (1.0 + std::exp(-t));
    }
    const double e = std::exp(t);
    return e / (1.0 + e);
  }
};

struct AnnGradients {
  Matrix w1;
  Eigen::VectorXd b1;
  Eigen::VectorXd w2;
  double b2 = 0.0;
};

/// Mean cross-entropy over the batch.
inline double ann_loss(const AnnModel& model, const Matrix& x,
                       const std::vector<int>& labels) {
  double loss = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double t = model.logit(x.row(i).transpose());
    const double y = labels[static_cast<std::size_t>(i)] == 1 ? 1.0 : 0.0;
    // log(1 + exp(t)) - y*t, stable on both tails
    const double softplus = t >= 0.0 ? t + std::log1p(std::exp(-t))
                                     : std::log1p(std::exp(t));
    loss += softplus - y * t;
  }
  return loss / static_cast<double>(x.rows());
}

/// Backpropagation gradients of ann_loss.
inline AnnGradients ann_gradients(const AnnModel& model, const Matrix& x,
                                  const std::vector<int>& labels) {
  const int hidden = static_cast<int>(model.w2.size());
  AnnGradients g;
  g.w1 = Matrix::Zero(model.w1.rows(), hidden);
  g.b1 = Eigen::VectorXd::Zero(hidden);
  g.w2 = Eigen::VectorXd::Zero(hidden);
  g.b2 = 0.0;
  const double inv_n = 1.0 / static_cast<double>(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const FeatureVector xi = x.row(i).transpose();
    const Eigen::VectorXd h = ((model.w1.transpose() * xi) + model.b1)
                                  .array()
                                  .tanh();
    const double t = model.w2.dot(h) + model.b2;
    const double p = t >= 0.0 ? 1.0 / (1.0 + std::exp(-t))
                              : std::exp(t) / (1.0 + std::exp(t));
    const double y = labels[static_cast<std::size_t>(i)] == 1 ? 1.0 : 0.0;
    const double dt = (p - y) * inv_n;
    g.w2 += dt * h;
    g.b2 += dt;
    const Eigen::VectorXd dh =
        dt * model.w2.array() * (1.0 - h.array().square());
    g.w1 += xi * dh.transpose();
    g.b1 += dh;
  }
  return g;
}

struct AnnConfig {
  int hidden = 20;
  double learning_rate = 0.15;
  int epochs = 300;
  int batch = 32;
  std::uint64_t seed = 1;
};

/// Mini-batch gradient descent on cross-entropy. Weight init is
/// normal(0, 1/sqrt(fan_in)); the pass order reshuffles every epoch from the
/// given seed only.
inline AnnModel train_ann(const Matrix& x, const std::vector<int>& labels,
                          const AnnConfig& cfg = {}) {
  const int n = static_cast<int>(x.rows());
  const int d = static_cast<int>(x.cols());
  if (n == 0 || n != static_cast<int>(labels.size())) {
    throw std::invalid_argument("train_ann: bad input sizes");
  }
  bool has_pos = false, has_neg = false;
  for (int v : labels) {
    if (v == 1) {
      has_pos = true;
    } else if (v == 0) {
      has_neg = true;
    } else {
      throw std::invalid_argument("train_ann: labels must be 0 or 1");
    }
  }
  if (!has_pos || !has_neg) {
    throw std::invalid_argument("train_ann: both classes required");
  }

  Rng rng(cfg.seed);
  AnnModel model;
  model.w1 = Matrix::Zero(d, cfg.hidden);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(d));
  for (int j = 0; j < cfg.hidden; ++j) {
    for (int i = 0; i < d; ++i) model.w1(i, j) = s1 * rng.normal();
  }
  model.b1 = Eigen::VectorXd::Zero(cfg.hidden);
  model.w2 = Eigen::VectorXd::Zero(cfg.hidden);
  const double s2 = 1.0 / std::sqrt(static_cast<double>(cfg.hidden));
  for (int j = 0; j < cfg.hidden; ++j) model.w2[j] = s2 * rng.normal();
  model.b2 = 0.0;

  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  Matrix batch_x;
  std::vector<int> batch_y;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle(order, rng);
    for (int start = 0; start < n; start += cfg.batch) {
      const int count = std::min(cfg.batch, n - start);
      batch_x.resize(count, d);
      batch_y.resize(count);
      for (int k = 0; k < count; ++k) {
        batch_x.row(k) = x.row(order[start + k]);
        batch_y[static_cast<std::size_t>(k)] = labels[order[start + k]];
      }
      const AnnGradients g = ann_gradients(model, batch_x, batch_y);
      model.w1 -= cfg.learning_rate * g.w1;
      model.b1 -= cfg.learning_rate * g.b1;
      model.w2 -= cfg.learning_rate * g.w2;
      model.b2 -= cfg.learning_rate * g.b2;
    }
  }
  return model;
}

}  // namespace bba
