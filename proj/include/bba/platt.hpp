#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "bba/common.hpp"

namespace bba {

/// Sigmoid map from a raw classifier score to P(class 1):
/// p = 1 / (1 + exp(A*s + B)). A is negative when larger scores mean class 1.
struct PlattParams {
  double a = -1.0;
  double b = 0.0;
};

inline double platt_probability(const PlattParams& p, double score) {
  const double t = p.a * score + p.b;
  // Numerically stable on both tails.
  if (t >= 0.0) {
    const double e = std::exp(-t);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(t));
}

/// Fits (A, B) by regularized maximum likelihood with smoothed targets
/// t+ = (N+ + 1)/(N+ + 2), t- = 1/(N- + 2), using Newton steps with
/// backtracking line search.
inline PlattParams platt_calibrate(const std::vector<double>& scores,
                                   const std::vector<int>& labels,
                                   int max_iterations = 100) {
  if (scores.size() != labels.size() || scores.empty()) {
    throw std::invalid_argument("platt_calibrate: bad input sizes");
  }
  const int n = static_cast<int>(scores.size());
  int n_pos = 0;
  for (int y : labels) {
    if (y == 1) ++n_pos;
  }
  const int n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw std::invalid_argument("platt_calibrate: need both classes");
  }
  const double hi = (n_pos + 1.0) / (n_pos + 2.0);
  const double lo = 1.0 / (n_neg + 2.0);
  std::vector<double> target(n);
  for (int i = 0; i < n; ++i) target[i] = labels[i] == 1 ? hi : lo;

  const double min_step = 1e-10;
  const double sigma = 1e-12;  // Hessian ridge

  double a = 0.0;
  double b = std::log((n_neg + 1.0) / (n_pos + 1.0));

  auto objective = [&](double aa, double bb) {
    double f = 0.0;
    for (int i = 0; i < n; ++i) {
      const double t = scores[i] * aa + bb;
      if (t >= 0.0) {
        f += target[i] * t + std::log1p(std::exp(-t));
      } else {
        f += (target[i] - 1.0) * t + std::log1p(std::exp(t));
      }
    }
    return f;
  };

  double fval = objective(a, b);
  for (int it = 0; it < max_iterations; ++it) {
    double h11 = sigma, h22 = sigma, h21 = 0.0;
    double g1 = 0.0, g2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double t = scores[i] * a + b;
      double p, q;
      if (t >= 0.0) {
        const double e = std::exp(-t);
        p = e / (1.0 + e);
        q = 1.0 / (1.0 + e);
      } else {
        const double e = std::exp(t);
        p = 1.0 / (1.0 + e);
        q = e / (1.0 + e);
      }
      const double d2 = p * q;
      h11 += scores[i] * scores[i] * d2;
      h22 += d2;
      h21 += scores[i] * d2;
      const double d1 = target[i] - p;
      g1 += scores[i] * d1;
      g2 += d1;
    }
    if (std::abs(g1) < 1e-5 && std::abs(g2) < 1e-5) {
      return PlattParams{a, b};
    }
    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * da + g2 * db;

    double step = 1.0;
    while (step >= min_step) {
      const double f_new = objective(a + step * da, b + step * db);
      if (f_new < fval + 1e-4 * step * gd) {
        a += step * da;
        b += step * db;
        fval = f_new;
        break;
      }
      step /= 2.0;
    }
    if (step < min_step) {
      throw NumericalError(
          "platt_calibrate: line search failed at iteration " +
          std::to_string(it) + " (objective " + std::to_string(fval) + ")");
    }
  }
  throw NumericalError("platt_calibrate: no convergence after " +
                       std::to_string(max_iterations) + " Newton iterations");
}

}  // namespace bba
