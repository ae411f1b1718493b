#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "bba/common.hpp"
#include "bba/direct.hpp"
#include "bba/gp.hpp"
#include "bba/oracle.hpp"
#include "bba/rng.hpp"

namespace bba {

/// One attack instance: seed point, its known label, the L1 modification
/// budget and the iteration cap. A target label switches to targeted mode.
struct AttackProblem {
  FeatureVector seed;
  int baseline_label = 1;
  double budget = 1.0;            // L1 cost bound C
  int max_iterations = 50;
  std::optional<int> target_label;
  Box bounds;

  void validate() const {
    if (budget <= 0.0) {
      throw std::invalid_argument("AttackProblem: budget must be > 0");
    }
    if (max_iterations < 1) {
      throw std::invalid_argument("AttackProblem: max_iterations must be >= 1");
    }
    if (!bounds.contains(seed)) {
      throw std::invalid_argument("AttackProblem: seed outside bounds");
    }
  }

  bool is_win(int label) const {
    return target_label ? label == *target_label : label != baseline_label;
  }
};

struct QueryRecord {
  int step = 0;
  FeatureVector point;
  int label = 0;
  double confidence = 0.0;
  double objective = 0.0;  // value fed to the surrogate
  double cost = 0.0;       // L1 distance from the seed
};

struct AttackOutcome {
  bool success = false;
  std::optional<FeatureVector> adversarial_point;
  int queries = 0;
  std::vector<QueryRecord> trace;
  std::string diagnostic;
};

/// Probability that the response keeps the seed's label (untargeted), or one
/// minus the probability of the target class (targeted). Either way the
/// attack drives this value down.
inline double objective_from_response(const OracleResponse& resp,
                                      const AttackProblem& problem) {
  if (problem.target_label) {
    const double p_target = resp.label == *problem.target_label
                                ? resp.confidence
                                : 1.0 - resp.confidence;
    return 1.0 - p_target;
  }
  return resp.label == problem.baseline_label ? resp.confidence
                                              : 1.0 - resp.confidence;
}

struct BoAttackConfig {
  AcquisitionConfig acquisition;
  double lengthscale_factor = 0.5;  // lengthscale = factor * sqrt(dim)
  double signal_variance = 1.0;
  double noise_variance = 1e-4;
  bool seed_observation = true;  // start the surrogate from (seed, 1.0)
  int refit_every = 0;           // 0 disables hyperparameter refits

  KernelParams kernel_for(int dim) const {
    return KernelParams::shared(
        dim, lengthscale_factor * std::sqrt(static_cast<double>(dim)),
        signal_variance, noise_variance);
  }
};

/// Optional per-step observer: (record, surrogate observation count).
using AttackStepCallback =
    std::function<void(const QueryRecord&, int gp_observations)>;

namespace detail {

inline QueryRecord make_record(int step, const FeatureVector& x,
                               const OracleResponse& resp, double objective,
                               const AttackProblem& problem) {
  QueryRecord rec;
  rec.step = step;
  rec.point = x;
  rec.label = resp.label;
  rec.confidence = resp.confidence;
  rec.objective = objective;
  rec.cost = l1_distance(x, problem.seed);
  return rec;
}

/// Grid refit of the shared lengthscale by log marginal likelihood.
inline void refit_lengthscale(GaussianProcess& gp, double base_lengthscale) {
  static constexpr double kFactors[] = {0.25, 0.5, 1.0, 2.0, 4.0};
  double best_lml = -std::numeric_limits<double>::infinity();
  double best_ls = base_lengthscale;
  KernelParams params = gp.params();
  for (double f : kFactors) {
    params.lengthscale.setConstant(f * base_lengthscale);
    try {
      gp.set_params(params);
    } catch (const NumericalError&) {
      continue;
    }
    const double lml = gp.log_marginal_likelihood();
    if (lml > best_lml) {
      best_lml = lml;
      best_ls = f * base_lengthscale;
    }
  }
  params.lengthscale.setConstant(best_ls);
  gp.set_params(params);
}

}  // namespace detail

/// Surrogate-guided attack: each step maximizes the acquisition over the
/// re-centered search box under the L1 budget, spends one oracle query on
/// the maximizer, and stops at the first label flip. Failure after
/// max_iterations returns queries == max_iterations. Every query, including
/// a final flipping one, is recorded in the trace.
inline AttackOutcome bo_attack(const Oracle& oracle,
                               const AttackProblem& problem,
                               const BoAttackConfig& bo_cfg = {},
                               const DirectConfig& direct_cfg = {},
                               const AttackStepCallback& on_step = {}) {
  problem.validate();
  bo_cfg.acquisition.validate();
  const int dim = static_cast<int>(problem.seed.size());
  const double base_ls =
      bo_cfg.lengthscale_factor * std::sqrt(static_cast<double>(dim));

  GaussianProcess gp(bo_cfg.kernel_for(dim));
  if (bo_cfg.seed_observation) {
    // The seed's label is an input, so (seed, 1.0) is known before any query.
    gp.add_observation(problem.seed, 1.0);
  }
  const SearchBox box =
      build_search_box(problem.seed, problem.budget, problem.bounds);

  AttackOutcome out;
  for (int t = 1; t <= problem.max_iterations; ++t) {
    DirectResult picked;
    try {
      picked = direct_maximize(
          [&](const FeatureVector& x) {
            return acquisition(gp, x, bo_cfg.acquisition);
          },
          [&](const FeatureVector& x) {
            return l1_distance(x, problem.seed) <= problem.budget;
          },
          box, direct_cfg);
    } catch (const NumericalError& e) {
      out.success = false;
      out.queries = static_cast<int>(out.trace.size());
      out.diagnostic = std::string("inner maximization found no feasible "
                                   "point: ") +
                       e.what();
      return out;
    }

    const OracleResponse resp = oracle(picked.point);
    const double y = objective_from_response(resp, problem);
    out.trace.push_back(detail::make_record(t, picked.point, resp, y, problem));

    if (problem.is_win(resp.label)) {
      out.success = true;
      out.adversarial_point = picked.point;
      out.queries = t;
      if (on_step) on_step(out.trace.back(), gp.size());
      return out;
    }
    gp.add_observation(picked.point, y);
    if (bo_cfg.refit_every > 0 && t % bo_cfg.refit_every == 0) {
      detail::refit_lengthscale(gp, base_ls);
    }
    if (on_step) on_step(out.trace.back(), gp.size());
  }
  out.success = false;
  out.queries = problem.max_iterations;
  return out;
}

/// Uniform point on the L1 sphere of radius 1: exponential magnitudes with
/// independent signs, normalized to unit L1 norm.
inline FeatureVector sample_l1_direction(int dim, Rng& rng) {
  FeatureVector dir(dim);
  double total = 0.0;
  for (int d = 0; d < dim; ++d) {
    const double m = rng.exponential();
    dir[d] = m;
    total += m;
  }
  for (int d = 0; d < dim; ++d) dir[d] = rng.sign() * dir[d] / total;
  return dir;
}

/// Draws from the L1 annulus of radii (budget - epsilon, budget] around the
/// seed, then clips into the bounds. Clipping only shrinks per-coordinate
/// deviations, so the clipped point still satisfies the budget; its distance
/// may fall below budget - epsilon.
inline FeatureVector sample_l1_annulus(const FeatureVector& seed,
                                       double budget, double epsilon,
                                       const Box& bounds, Rng& rng) {
  if (epsilon <= 0.0 || epsilon >= budget) {
    throw std::invalid_argument(
        "sample_l1_annulus: need 0 < epsilon < budget");
  }
  const FeatureVector dir =
      sample_l1_direction(static_cast<int>(seed.size()), rng);
  const double radius = budget - epsilon * rng.uniform();
  return bounds.clamp(seed + radius * dir);
}

struct RandomSearchConfig {
  double epsilon = 0.05;
  int cap = 500;

  void validate() const {
    if (cap < 1) {
      throw std::invalid_argument("RandomSearchConfig: cap must be >= 1");
    }
  }
};

/// Baseline: query independent annulus samples until the label flips or the
/// cap is reached.
inline AttackOutcome random_search_attack(const Oracle& oracle,
                                          const AttackProblem& problem,
                                          const RandomSearchConfig& cfg,
                                          Rng& rng) {
  problem.validate();
  cfg.validate();
  AttackOutcome out;
  for (int t = 1; t <= cfg.cap; ++t) {
    const FeatureVector x = sample_l1_annulus(
        problem.seed, problem.budget, cfg.epsilon, problem.bounds, rng);
    const OracleResponse resp = oracle(x);
    const double y = objective_from_response(resp, problem);
    out.trace.push_back(detail::make_record(t, x, resp, y, problem));
    if (problem.is_win(resp.label)) {
      out.success = true;
      out.adversarial_point = x;
      out.queries = t;
      return out;
    }
  }
  out.success = false;
  out.queries = cfg.cap;
  return out;
}

}  // namespace bba
