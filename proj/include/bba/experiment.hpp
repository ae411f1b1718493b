#pragma once

#include <atomic>
#include <bit>
#include <cstdio>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "bba/attack.hpp"
#include "bba/config.hpp"
#include "bba/dataset.hpp"
#include "bba/model.hpp"
#include "bba/rng.hpp"

namespace bba {

struct TrainingConfig {
  int train_count = 3500;
  FeatureScaling::Mode scaling = FeatureScaling::Mode::kMinMax;
  std::uint64_t seed = 20260810;
  LinearSvmConfig linear;
  RbfSvmConfig rbf;
  AnnConfig ann;
};

struct TrainedModels {
  ModelSpec linear, rbf, ann;
  double accuracy_linear = 0.0, accuracy_rbf = 0.0, accuracy_ann = 0.0;
  Matrix test_points;           // model-space rows, clamped into bounds
  std::vector<int> test_labels;
  std::vector<int> seed_pool;   // test row indices labeled spam

  const ModelSpec& by_kind(ModelKind kind) const {
    switch (kind) {
      case ModelKind::kLinearSvm:
        return linear;
      case ModelKind::kRbfSvm:
        return rbf;
      case ModelKind::kAnn:
        return ann;
    }
    throw std::logic_error("by_kind: bad model kind");
  }
};

inline double accuracy(const ModelSpec& model, const Matrix& points,
                       const std::vector<int>& labels) {
  int hits = 0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const OracleResponse r = predict(model, points.row(i).transpose());
    if (r.label == labels[static_cast<std::size_t>(i)]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(points.rows());
}

/// Samples the training rows, fits the scaling on them only, trains all three
/// classifiers and evaluates on the held-out remainder. The attack seed pool
/// is every spam-labeled test row (in model space, clamped into the search
/// bounds).
inline TrainedModels split_and_train(const Dataset& data,
                                     const TrainingConfig& cfg) {
  Rng rng(cfg.seed);
  const TrainTestSplit split = split_rows(data.rows(), cfg.train_count, rng);

  Matrix train_raw(split.train_rows.size(), data.dim());
  std::vector<int> train_labels;
  train_labels.reserve(split.train_rows.size());
  for (std::size_t i = 0; i < split.train_rows.size(); ++i) {
    train_raw.row(static_cast<Eigen::Index>(i)) =
        data.features.row(split.train_rows[i]);
    train_labels.push_back(data.labels[split.train_rows[i]]);
  }

  const FeatureScaling scaling =
      cfg.scaling == FeatureScaling::Mode::kMinMax
          ? FeatureScaling::fit_minmax(train_raw)
          : FeatureScaling::identity_from(train_raw);
  const Matrix train = scaling.apply_rows(train_raw);
  const Box bounds = scaling.model_space_bounds();

  TrainedModels out;
  out.test_points.resize(split.test_rows.size(), data.dim());
  for (std::size_t i = 0; i < split.test_rows.size(); ++i) {
    const FeatureVector z =
        scaling.apply(data.features.row(split.test_rows[i]).transpose());
    out.test_points.row(static_cast<Eigen::Index>(i)) =
        bounds.clamp(z).transpose();
    out.test_labels.push_back(data.labels[split.test_rows[i]]);
    if (out.test_labels.back() == 1) {
      out.seed_pool.push_back(static_cast<int>(i));
    }
  }

  LinearSvmConfig lin = cfg.linear;
  lin.seed = derive_seed({cfg.seed, 101});
  RbfSvmConfig rbf = cfg.rbf;
  rbf.seed = derive_seed({cfg.seed, 102});
  AnnConfig ann = cfg.ann;
  ann.seed = derive_seed({cfg.seed, 103});

  out.linear = ModelSpec{ModelKind::kLinearSvm, scaling,
                         train_linear_svm(train, train_labels, lin)};
  out.rbf = ModelSpec{ModelKind::kRbfSvm, scaling,
                      train_rbf_svm(train, train_labels, rbf)};
  out.ann =
      ModelSpec{ModelKind::kAnn, scaling, train_ann(train, train_labels, ann)};

  out.accuracy_linear = accuracy(out.linear, out.test_points, out.test_labels);
  out.accuracy_rbf = accuracy(out.rbf, out.test_points, out.test_labels);
  out.accuracy_ann = accuracy(out.ann, out.test_points, out.test_labels);
  return out;
}

enum class AttackMethod { kBo, kRandom };

inline const char* to_string(AttackMethod m) {
  return m == AttackMethod::kBo ? "bo" : "random";
}

struct SweepConfig {
  std::vector<double> budgets{1, 2, 5, 10, 20, 30, 40, 50, 60};
  int seeds_per_budget = 20;
  int bo_cap = 50;
  int random_cap = 500;
  int failure_value = 500;
  double epsilon = 0.05;
  std::uint64_t rng_seed = 20260810;
  BoAttackConfig bo;
  DirectConfig direct;
  int threads = 1;

  void validate() const {
    if (budgets.empty()) throw ConfigError("sweep: budgets must be nonempty");
    for (double c : budgets) {
      if (c <= 0.0) throw ConfigError("sweep: budgets must be positive");
      if (c <= epsilon) {
        throw ConfigError("sweep: every budget must exceed epsilon");
      }
    }
    if (seeds_per_budget < 1) throw ConfigError("sweep: seeds_per_budget >= 1");
    if (bo_cap < 1 || random_cap < 1) throw ConfigError("sweep: caps >= 1");
    if (bo_cap > failure_value) {
      throw ConfigError("sweep: bo_cap must not exceed failure_value");
    }
    if (threads < 1) throw ConfigError("sweep: threads >= 1");
    direct.validate();
    bo.acquisition.validate();
  }
};

struct ExperimentRow {
  std::string model;
  double budget = 0.0;
  int seed_id = 0;
  std::string method;
  int queries_raw = 0;
  int queries_accounted = 0;
  bool success = false;
};

/// Applies the failure-accounting rule: successful runs report their raw
/// query count; failed surrogate-attack runs report the fixed penalty value,
/// failed random runs report the cap they exhausted.
inline ExperimentRow make_row(const std::string& model, double budget,
                              int seed_id, AttackMethod method,
                              const AttackOutcome& outcome,
                              const SweepConfig& cfg) {
  ExperimentRow row;
  row.model = model;
  row.budget = budget;
  row.seed_id = seed_id;
  row.method = to_string(method);
  row.queries_raw = outcome.queries;
  row.success = outcome.success;
  if (outcome.success) {
    row.queries_accounted = outcome.queries;
  } else {
    row.queries_accounted =
        method == AttackMethod::kBo ? cfg.failure_value : cfg.random_cap;
  }
  return row;
}

struct SweepModel {
  std::string name;
  const ModelSpec* model = nullptr;
};

inline std::vector<SweepModel> sweep_models(const TrainedModels& trained) {
  return {{to_string(ModelKind::kLinearSvm), &trained.linear},
          {to_string(ModelKind::kRbfSvm), &trained.rbf},
          {to_string(ModelKind::kAnn), &trained.ann}};
}

/// Runs both attacks on every (model, budget, seed) cell. Seeds misclassified
/// by a model are skipped for that model (logged); each model attacks its
/// first seeds_per_budget correctly-classified pool entries. Cells get
/// independent RNG streams derived from (master seed, model, budget, seed,
/// method), so results are reproducible cell-by-cell and independent of
/// execution order; rows come back in canonical order.
inline std::vector<ExperimentRow> run_sweep(
    const std::vector<SweepModel>& models, const Matrix& seed_pool,
    const SweepConfig& cfg, std::ostream* log = nullptr) {
  cfg.validate();
  if (seed_pool.rows() == 0) {
    throw std::invalid_argument("run_sweep: empty seed pool");
  }

  struct Cell {
    int model_index;
    double budget;
    int seed_id;
    AttackMethod method;
  };
  std::vector<Cell> cells;
  for (std::size_t mi = 0; mi < models.size(); ++mi) {
    const ModelSpec& model = *models[mi].model;
    std::vector<int> valid;
    for (int s = 0; s < seed_pool.rows() &&
                    static_cast<int>(valid.size()) < cfg.seeds_per_budget;
         ++s) {
      const OracleResponse r = predict(model, seed_pool.row(s).transpose());
      if (r.label == 1) {
        valid.push_back(s);
      } else if (log) {
        *log << "sweep: seed " << s << " skipped for " << models[mi].name
             << " (classified as ham)\n";
      }
    }
    if (log && static_cast<int>(valid.size()) < cfg.seeds_per_budget) {
      *log << "sweep: only " << valid.size() << " valid seeds for "
           << models[mi].name << " (wanted " << cfg.seeds_per_budget << ")\n";
    }
    for (double budget : cfg.budgets) {
      for (int s : valid) {
        cells.push_back({static_cast<int>(mi), budget, s, AttackMethod::kBo});
        cells.push_back(
            {static_cast<int>(mi), budget, s, AttackMethod::kRandom});
      }
    }
  }

  std::vector<ExperimentRow> rows(cells.size());
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      try {
        const Cell& cell = cells[i];
        const SweepModel& sm = models[static_cast<std::size_t>(cell.model_index)];
        const ModelSpec& model = *sm.model;

        AttackProblem problem;
        problem.seed = seed_pool.row(cell.seed_id).transpose();
        problem.baseline_label = 1;
        problem.budget = cell.budget;
        problem.max_iterations = cfg.bo_cap;
        problem.bounds = model.scaling.model_space_bounds();

        QueryCounter counter;
        const Oracle oracle = counting_oracle(
            [&model](const FeatureVector& x) { return predict(model, x); },
            counter);

        const std::uint64_t child_seed = derive_seed(
            {cfg.rng_seed, static_cast<std::uint64_t>(cell.model_index),
             std::bit_cast<std::uint64_t>(cell.budget),
             static_cast<std::uint64_t>(cell.seed_id),
             cell.method == AttackMethod::kBo ? 0ULL : 1ULL});

        AttackOutcome outcome;
        if (cell.method == AttackMethod::kBo) {
          outcome = bo_attack(oracle, problem, cfg.bo, cfg.direct);
        } else {
          RandomSearchConfig rnd;
          rnd.epsilon = cfg.epsilon;
          rnd.cap = cfg.random_cap;
          Rng rng(child_seed);
          outcome = random_search_attack(oracle, problem, rnd, rng);
        }
        if (static_cast<std::uint64_t>(outcome.queries) != counter.count()) {
          throw std::logic_error("run_sweep: query accounting mismatch");
        }
        rows[i] =
            make_row(sm.name, cell.budget, cell.seed_id, cell.method, outcome,
                     cfg);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  if (cfg.threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < cfg.threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return rows;
}

struct AggregateRow {
  std::string model;
  double budget = 0.0;
  std::string method;
  double mean_queries = 0.0;
  double success_rate = 0.0;
  int n = 0;
};

/// Per (model, budget, method) means over accounted queries. Output keeps the
/// models in first-appearance order, then budget ascending, then bo before
/// random.
inline std::vector<AggregateRow> aggregate_rows(
    const std::vector<ExperimentRow>& rows) {
  if (rows.empty()) {
    throw std::invalid_argument("aggregate_rows: no rows");
  }
  std::map<std::string, int> model_order;
  for (const ExperimentRow& r : rows) {
    model_order.emplace(r.model, static_cast<int>(model_order.size()));
  }
  struct Key {
    int model_rank;
    double budget;
    int method_rank;
    std::string model;
    std::string method;
    bool operator<(const Key& o) const {
      if (model_rank != o.model_rank) return model_rank < o.model_rank;
      if (budget != o.budget) return budget < o.budget;
      return method_rank < o.method_rank;
    }
  };
  std::map<Key, std::pair<double, std::pair<int, int>>> acc;  // sum, (n, wins)
  for (const ExperimentRow& r : rows) {
    Key key{model_order[r.model], r.budget, r.method == "bo" ? 0 : 1, r.model,
            r.method};
    auto& slot = acc[key];
    slot.first += r.queries_accounted;
    slot.second.first += 1;
    if (r.success) slot.second.second += 1;
  }
  std::vector<AggregateRow> out;
  for (const auto& [key, slot] : acc) {
    AggregateRow a;
    a.model = key.model;
    a.budget = key.budget;
    a.method = key.method;
    a.n = slot.second.first;
    a.mean_queries = slot.first / a.n;
    a.success_rate = static_cast<double>(slot.second.second) / a.n;
    out.push_back(std::move(a));
  }
  return out;
}

namespace detail {

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace detail

inline constexpr const char* kRawCsvHeader =
    "model,C,seed_id,method,queries_raw,queries_accounted,success";
inline constexpr const char* kAggregateCsvHeader =
    "model,C,method,mean_queries,success_rate,n";

inline void write_raw_csv(const std::vector<ExperimentRow>& rows,
                          std::ostream& os) {
  os << kRawCsvHeader << '\n';
  for (const ExperimentRow& r : rows) {
    os << r.model << ',' << detail::format_number(r.budget) << ',' << r.seed_id
       << ',' << r.method << ',' << r.queries_raw << ','
       << r.queries_accounted << ',' << (r.success ? 1 : 0) << '\n';
  }
}

inline void write_aggregate_csv(const std::vector<AggregateRow>& rows,
                                std::ostream& os) {
  os << kAggregateCsvHeader << '\n';
  for (const AggregateRow& a : rows) {
    os << a.model << ',' << detail::format_number(a.budget) << ',' << a.method
       << ',' << detail::format_number(a.mean_queries) << ','
       << detail::format_number(a.success_rate) << ',' << a.n << '\n';
  }
}

inline std::vector<ExperimentRow> read_raw_csv(std::istream& is,
                                               const std::string& origin) {
  std::string line;
  if (!std::getline(is, line) || line != kRawCsvHeader) {
    throw DataError(origin + ": missing or wrong raw CSV header");
  }
  std::vector<ExperimentRow> rows;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 7) {
      throw DataError(origin + ":" + std::to_string(line_no) +
                      ": expected 7 columns");
    }
    try {
      ExperimentRow r;
      r.model = cells[0];
      r.budget = std::stod(cells[1]);
      r.seed_id = std::stoi(cells[2]);
      r.method = cells[3];
      r.queries_raw = std::stoi(cells[4]);
      r.queries_accounted = std::stoi(cells[5]);
      r.success = std::stoi(cells[6]) != 0;
      rows.push_back(std::move(r));
    } catch (const std::exception&) {
      throw DataError(origin + ":" + std::to_string(line_no) + ": bad value");
    }
  }
  return rows;
}

/// Prints the bo/random mean-query ratio per (model, budget) pair that has
/// both methods aggregated.
inline void print_query_ratios(const std::vector<AggregateRow>& aggregates,
                               std::ostream& os) {
  std::map<std::pair<std::string, double>, std::pair<double, double>> pairs;
  std::vector<std::pair<std::string, double>> order;
  for (const AggregateRow& a : aggregates) {
    const auto key = std::make_pair(a.model, a.budget);
    if (!pairs.count(key)) order.push_back(key);
    if (a.method == "bo") {
      pairs[key].first = a.mean_queries;
    } else {
      pairs[key].second = a.mean_queries;
    }
  }
  for (const auto& key : order) {
    const auto& [bo_mean, random_mean] = pairs[key];
    if (bo_mean <= 0.0 || random_mean <= 0.0) continue;
    os << key.first << " C=" << detail::format_number(key.second)
       << ": mean queries bo=" << detail::format_number(bo_mean)
       << " random=" << detail::format_number(random_mean)
       << " ratio=" << detail::format_number(bo_mean / random_mean) << '\n';
  }
}

}  // namespace bba
