#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "bba/common.hpp"

namespace bba {

/// Squared-exponential kernel hyperparameters with a per-dimension
/// lengthscale. noise_variance is the observation noise added to the Gram
/// diagonal.
struct KernelParams {
  Eigen::VectorXd lengthscale;
  double signal_variance = 1.0;
  double noise_variance = 1e-4;

  static KernelParams shared(int dim, double ls, double sv = 1.0,
                             double noise = 1e-4) {
    KernelParams p;
    p.lengthscale = Eigen::VectorXd::Constant(dim, ls);
    p.signal_variance = sv;
    p.noise_variance = noise;
    return p;
  }

  void validate() const {
    if (lengthscale.size() == 0 || (lengthscale.array() <= 0.0).any()) {
      throw std::invalid_argument("KernelParams: lengthscale must be > 0");
    }
    if (signal_variance <= 0.0) {
      throw std::invalid_argument("KernelParams: signal_variance must be > 0");
    }
    if (noise_variance < 0.0) {
      throw std::invalid_argument("KernelParams: noise_variance must be >= 0");
    }
  }
};

/// sv * exp(-1/2 * sum_d ((a_d - b_d) / l_d)^2)
inline double kernel_eval(const FeatureVector& a, const FeatureVector& b,
                          const KernelParams& p) {
  if (a.size() != b.size() || a.size() != p.lengthscale.size()) {
    throw std::invalid_argument("kernel_eval: dimension mismatch");
  }
  const double q = ((a - b).array() / p.lengthscale.array()).square().sum();
  return p.signal_variance * std::exp(-0.5 * q);
}

struct Posterior {
  double mean = 0.0;
  double variance = 0.0;
};

/// Zero-mean Gaussian-process regressor over [0,1]-valued targets. Adding an
/// observation refactorizes the Gram matrix (sizes stay small here, at most a
/// few dozen points). Posterior queries on a fixed state are const and safe
/// to issue concurrently.
class GaussianProcess {
 public:
  explicit GaussianProcess(KernelParams params) : params_(std::move(params)) {
    params_.validate();
  }

  int size() const { return static_cast<int>(targets_.size()); }
  int dim() const { return static_cast<int>(params_.lengthscale.size()); }
  const KernelParams& params() const { return params_; }
  double jitter() const { return jitter_; }
  const std::vector<FeatureVector>& inputs() const { return inputs_; }
  const std::vector<double>& targets() const { return targets_; }
  const Matrix& cholesky_factor() const { return chol_; }

  void add_observation(const FeatureVector& x, double y) {
    if (x.size() != params_.lengthscale.size()) {
      throw std::invalid_argument("GaussianProcess: dimension mismatch");
    }
    if (y < 0.0 || y > 1.0) {
      throw std::invalid_argument("GaussianProcess: target outside [0,1]");
    }
    if (params_.noise_variance == 0.0) {
      // A noiseless GP must interpolate every target; two different targets
      // at the same input make the system unsolvable.
      for (std::size_t i = 0; i < inputs_.size(); ++i) {
        if ((inputs_[i] - x).cwiseAbs().maxCoeff() == 0.0 &&
            std::abs(targets_[i] - y) > 1e-12) {
          throw NumericalError(
              "gp update: conflicting noiseless observations at a repeated "
              "input make the kernel system singular");
        }
      }
    }
    inputs_.push_back(x);
    targets_.push_back(y);
    try {
      refactorize();
    } catch (...) {
      inputs_.pop_back();
      targets_.pop_back();
      throw;
    }
  }

  /// Replaces the hyperparameters and refactorizes with the existing data.
  void set_params(KernelParams params) {
    params.validate();
    if (params.lengthscale.size() != params_.lengthscale.size()) {
      throw std::invalid_argument("GaussianProcess: dimension mismatch");
    }
    KernelParams previous = std::move(params_);
    params_ = std::move(params);
    if (inputs_.empty()) return;
    try {
      refactorize();
    } catch (...) {
      params_ = std::move(previous);
      refactorize();
      throw;
    }
  }

  Posterior posterior(const FeatureVector& x) const {
    if (x.size() != params_.lengthscale.size()) {
      throw std::invalid_argument("GaussianProcess: dimension mismatch");
    }
    const int n = size();
    if (n == 0) {
      return Posterior{0.0, params_.signal_variance};
    }
    Eigen::VectorXd ks(n);
    for (int i = 0; i < n; ++i) ks[i] = kernel_eval(inputs_[i], x, params_);
    const double mean = ks.dot(alpha_);
    const Eigen::VectorXd v =
        chol_.triangularView<Eigen::Lower>().solve(ks);
    double variance = params_.signal_variance - v.squaredNorm();
    if (variance < 0.0) variance = 0.0;
    return Posterior{mean, variance};
  }

  /// log p(y | X, params) for the current data.
  double log_marginal_likelihood() const {
    const int n = size();
    if (n == 0) return 0.0;
    Eigen::Map<const Eigen::VectorXd> y(targets_.data(), n);
    double logdet = 0.0;
    for (int i = 0; i < n; ++i) logdet += std::log(chol_(i, i));
    return -0.5 * y.dot(alpha_) - logdet -
           0.5 * n * std::log(2.0 * 3.14159265358979323846);
  }

 private:
  void refactorize() {
    const int n = size();
    Matrix gram(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j <= i; ++j) {
        const double k = kernel_eval(inputs_[i], inputs_[j], params_);
        gram(i, j) = k;
        gram(j, i) = k;
      }
      gram(i, i) += params_.noise_variance;
    }
    // Jitter ladder: 0, then 1e-10 escalating tenfold up to 1e-4.
    double jitter = 0.0;
    while (true) {
      Matrix attempt = gram;
      if (jitter > 0.0) attempt.diagonal().array() += jitter;
      Eigen::LLT<Matrix> llt(attempt);
      if (llt.info() == Eigen::Success) {
        chol_ = llt.matrixL();
        jitter_ = jitter;
        break;
      }
      jitter = (jitter == 0.0) ? 1e-10 : jitter * 10.0;
      if (jitter > 1e-4) {
        throw NumericalError(
            "gp update: kernel matrix not positive definite after jitter "
            "escalation to 1e-4");
      }
    }
    Eigen::Map<const Eigen::VectorXd> y(targets_.data(), n);
    alpha_ = chol_.triangularView<Eigen::Lower>().solve(y);
    alpha_ = chol_.transpose().triangularView<Eigen::Upper>().solve(alpha_);
  }

  KernelParams params_;
  std::vector<FeatureVector> inputs_;
  std::vector<double> targets_;
  Matrix chol_;
  Eigen::VectorXd alpha_;
  double jitter_ = 0.0;
};

/// How the UCB score is oriented. The inner optimizer always maximizes the
/// returned value; pick the orientation to match what the queried objective
/// should do.
enum class AcquisitionOrientation {
  kMaximizeObjective,  // mu + kappa * sigma
  kMinimizeObjective,  // kappa * sigma - mu
};

struct AcquisitionConfig {
  double kappa = 2.0;
  AcquisitionOrientation orientation =
      AcquisitionOrientation::kMinimizeObjective;

  void validate() const {
    if (kappa < 0.0) {
      throw std::invalid_argument("AcquisitionConfig: kappa must be >= 0");
    }
  }
};

inline double acquisition_from_posterior(const Posterior& post,
                                         const AcquisitionConfig& cfg) {
  const double sigma = std::sqrt(post.variance);
  if (cfg.orientation == AcquisitionOrientation::kMaximizeObjective) {
    return post.mean + cfg.kappa * sigma;
  }
  return cfg.kappa * sigma - post.mean;
}

inline double acquisition(const GaussianProcess& gp, const FeatureVector& x,
                          const AcquisitionConfig& cfg) {
  return acquisition_from_posterior(gp.posterior(x), cfg);
}

}  // namespace bba
