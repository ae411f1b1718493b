#pragma once

#include <set>
#include <string>

#include "bba/config.hpp"
#include "bba/experiment.hpp"

namespace bba {

/// Every tunable default, overridable from one flat config file.
struct Settings {
  std::string dataset;
  TrainingConfig training;
  SweepConfig sweep;
};

inline AcquisitionOrientation orientation_from_string(const std::string& s) {
  if (s == "minimize") return AcquisitionOrientation::kMinimizeObjective;
  if (s == "maximize") return AcquisitionOrientation::kMaximizeObjective;
  throw ConfigError("orientation must be 'minimize' or 'maximize', got '" + s +
                    "'");
}

inline FeatureScaling::Mode scaling_mode_from_string(const std::string& s) {
  if (s == "minmax") return FeatureScaling::Mode::kMinMax;
  if (s == "raw") return FeatureScaling::Mode::kIdentity;
  throw ConfigError("scaling must be 'minmax' or 'raw', got '" + s + "'");
}

inline const std::set<std::string>& settings_keys() {
  static const std::set<std::string> keys = {
      "dataset",        "master_seed",      "scaling",
      "train_count",    "calib_fraction",
      "linear_lambda",  "linear_epochs",
      "rbf_gamma",      "rbf_cost",         "rbf_epochs",
      "ann_hidden",     "ann_learning_rate", "ann_epochs",   "ann_batch",
      "budgets",        "seeds_per_budget", "bo_cap",       "random_cap",
      "failure_value",  "epsilon",          "kappa",        "orientation",
      "lengthscale_factor", "signal_variance", "noise_variance",
      "gp_seed_observation", "refit_every",
      "inner_budget",   "direct_eps",       "direct_max_depth",
      "threads",
  };
  return keys;
}

inline Settings settings_from_config(const ConfigMap& cfg) {
  cfg.require_known(settings_keys());
  Settings s;
  s.dataset = cfg.get_string("dataset", "");
  const std::uint64_t master =
      static_cast<std::uint64_t>(cfg.get_int("master_seed", 20260810));

  s.training.seed = master;
  s.training.train_count =
      static_cast<int>(cfg.get_int("train_count", s.training.train_count));
  s.training.scaling =
      scaling_mode_from_string(cfg.get_string("scaling", "minmax"));
  const double calib =
      cfg.get_double("calib_fraction", s.training.linear.calib_fraction);
  s.training.linear.calib_fraction = calib;
  s.training.rbf.calib_fraction = calib;
  s.training.linear.lambda =
      cfg.get_double("linear_lambda", s.training.linear.lambda);
  s.training.linear.epochs =
      static_cast<int>(cfg.get_int("linear_epochs", s.training.linear.epochs));
  s.training.rbf.gamma = cfg.get_double("rbf_gamma", s.training.rbf.gamma);
  s.training.rbf.cost = cfg.get_double("rbf_cost", s.training.rbf.cost);
  s.training.rbf.epochs =
      static_cast<int>(cfg.get_int("rbf_epochs", s.training.rbf.epochs));
  s.training.ann.hidden =
      static_cast<int>(cfg.get_int("ann_hidden", s.training.ann.hidden));
  s.training.ann.learning_rate =
      cfg.get_double("ann_learning_rate", s.training.ann.learning_rate);
  s.training.ann.epochs =
      static_cast<int>(cfg.get_int("ann_epochs", s.training.ann.epochs));
  s.training.ann.batch =
      static_cast<int>(cfg.get_int("ann_batch", s.training.ann.batch));

  s.sweep.rng_seed = master;
  s.sweep.budgets = cfg.get_double_list("budgets", s.sweep.budgets);
  s.sweep.seeds_per_budget = static_cast<int>(
      cfg.get_int("seeds_per_budget", s.sweep.seeds_per_budget));
  s.sweep.bo_cap = static_cast<int>(cfg.get_int("bo_cap", s.sweep.bo_cap));
  s.sweep.random_cap =
      static_cast<int>(cfg.get_int("random_cap", s.sweep.random_cap));
  s.sweep.failure_value =
      static_cast<int>(cfg.get_int("failure_value", s.sweep.failure_value));
  s.sweep.epsilon = cfg.get_double("epsilon", s.sweep.epsilon);
  s.sweep.bo.acquisition.kappa =
      cfg.get_double("kappa", s.sweep.bo.acquisition.kappa);
  s.sweep.bo.acquisition.orientation =
      orientation_from_string(cfg.get_string("orientation", "minimize"));
  s.sweep.bo.lengthscale_factor =
      cfg.get_double("lengthscale_factor", s.sweep.bo.lengthscale_factor);
  s.sweep.bo.signal_variance =
      cfg.get_double("signal_variance", s.sweep.bo.signal_variance);
  s.sweep.bo.noise_variance =
      cfg.get_double("noise_variance", s.sweep.bo.noise_variance);
  s.sweep.bo.seed_observation =
      cfg.get_bool("gp_seed_observation", s.sweep.bo.seed_observation);
  s.sweep.bo.refit_every =
      static_cast<int>(cfg.get_int("refit_every", s.sweep.bo.refit_every));
  s.sweep.direct.budget =
      static_cast<int>(cfg.get_int("inner_budget", s.sweep.direct.budget));
  s.sweep.direct.eps = cfg.get_double("direct_eps", s.sweep.direct.eps);
  s.sweep.direct.max_depth = static_cast<int>(
      cfg.get_int("direct_max_depth", s.sweep.direct.max_depth));
  s.sweep.threads =
      static_cast<int>(cfg.get_int("threads", s.sweep.threads));
  return s;
}

}  // namespace bba
