// Acceptance suite: one checkable criterion per section, one PASS/FAIL line
// each. Run with no selector to execute everything, or pass a criterion
// number to run one. argv: <dataset.csv> [criterion] [cli-binary].

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bba/ann.hpp"
#include "bba/attack.hpp"
#include "bba/dataset.hpp"
#include "bba/direct.hpp"
#include "bba/experiment.hpp"
#include "bba/gp.hpp"
#include "bba/model.hpp"
#include "bba/rng.hpp"

using namespace bba;

namespace {

struct Criterion {
  int number;
  bool pass;
  std::string detail;
};

std::string dataset_path;
std::string cli_path;

// ---------------------------------------------------------------------------
// 1. GP posterior equivalence against an independent dense solve.

Posterior dense_posterior(const std::vector<FeatureVector>& xs,
                          const std::vector<double>& ys,
                          const FeatureVector& query, const KernelParams& p) {
  const int n = static_cast<int>(xs.size());
  auto kf = [&](const FeatureVector& a, const FeatureVector& b) {
    double q = 0.0;
    for (int d = 0; d < a.size(); ++d) {
      const double u = (a[d] - b[d]) / p.lengthscale[d];
      q += u * u;
    }
    return p.signal_variance * std::exp(-0.5 * q);
  };
  Eigen::MatrixXd gram(n, n);
  Eigen::VectorXd kvec(n), y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) gram(i, j) = kf(xs[i], xs[j]);
    gram(i, i) += p.noise_variance;
    kvec[i] = kf(xs[i], query);
    y[i] = ys[i];
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(gram);
  return Posterior{kvec.dot(lu.solve(y)),
                   p.signal_variance - kvec.dot(lu.solve(kvec))};
}

Criterion criterion_1() {
  Rng rng(20260810);
  double worst = 0.0;
  for (int instance = 0; instance < 200; ++instance) {
    const int dim = 1 + static_cast<int>(rng.below(5));
    const int count = 1 + static_cast<int>(rng.below(10));
    const KernelParams p =
        KernelParams::shared(dim, rng.uniform(0.3, 2.0), rng.uniform(0.5, 2.0),
                             rng.uniform(1e-6, 1e-2));
    GaussianProcess gp(p);
    std::vector<FeatureVector> xs;
    std::vector<double> ys;
    for (int i = 0; i < count; ++i) {
      FeatureVector x(dim);
      for (int d = 0; d < dim; ++d) x[d] = rng.uniform(0.0, 1.0);
      xs.push_back(x);
      ys.push_back(rng.uniform(0.0, 1.0));
      gp.add_observation(xs.back(), ys.back());
    }
    FeatureVector q(dim);
    for (int d = 0; d < dim; ++d) q[d] = rng.uniform(0.0, 1.0);
    const Posterior got = gp.posterior(q);
    const Posterior want = dense_posterior(xs, ys, q, p);
    worst = std::max(worst, std::abs(got.mean - want.mean));
    worst = std::max(worst, std::abs(got.variance - want.variance));
  }
  std::ostringstream detail;
  detail << "200 random instances, max posterior deviation " << worst
         << " (bound 1e-8)";
  return {1, worst < 1e-8, detail.str()};
}

// ---------------------------------------------------------------------------
// 2. Rectangle-division maximizer accuracy and partition conservation.

Criterion criterion_2() {
  Rng rng(9);
  double worst_err = 0.0;
  int worst_evals = 0;
  for (int d : {1, 2, 5}) {
    for (int trial = 0; trial < 5; ++trial) {
      const FeatureVector seed = FeatureVector::Constant(d, 0.5);
      FeatureVector target(d);
      for (int j = 0; j < d; ++j) target[j] = rng.uniform(0.2, 0.8);
      const SearchBox box = build_search_box(seed, 1.0, Box::unit(d));
      const DirectResult res = direct_maximize(
          [&](const FeatureVector& x) { return -(x - target).squaredNorm(); },
          [](const FeatureVector&) { return true; }, box, DirectConfig{});
      worst_err = std::max(worst_err, (res.point - target).norm());
      worst_evals = std::max(worst_evals, res.evaluations);
    }
  }

  // Partition-volume invariant tracked round by round on a monitored run.
  const SearchBox box =
      build_search_box(FeatureVector::Constant(2, 0.5), 1.0, Box::unit(2));
  DirectState state(box);
  const auto objective = [](const FeatureVector& x) {
    return std::sin(11.0 * x[0]) + std::cos(5.0 * x[1]);
  };
  const auto feasible = [](const FeatureVector&) { return true; };
  state.initialize(objective, feasible);
  double worst_volume_gap = 0.0;
  for (int round = 0; round < 8; ++round) {
    for (std::size_t idx : state.potentially_optimal(1e-4)) {
      state.trisect(idx, objective, feasible);
    }
    double volume = 0.0;
    for (const Rectangle& r : state.rectangles()) {
      double v = 1.0;
      for (int k : r.depth) v *= std::pow(3.0, -k);
      volume += v;
    }
    worst_volume_gap = std::max(worst_volume_gap, std::abs(volume - 1.0));
  }

  std::ostringstream detail;
  detail << "worst distance to optimum " << worst_err
         << " (bound 1e-2), max evaluations " << worst_evals
         << " (cap 500), partition volume gap " << worst_volume_gap
         << " (bound 1e-9)";
  return {2, worst_err < 1e-2 && worst_evals <= 500 &&
                 worst_volume_gap < 1e-9,
          detail.str()};
}

// ---------------------------------------------------------------------------
// 3. Classifier accuracy gates on the seeded 3500/1101 split.

Criterion criterion_3() {
  const Dataset data = load_spambase(dataset_path);
  const TrainingConfig cfg;  // frozen defaults, master seed 20260810
  const TrainedModels models = split_and_train(data, cfg);
  const int test_rows = static_cast<int>(models.test_points.rows());
  std::ostringstream detail;
  detail << "split 3500/" << test_rows << ", test accuracy linear-svm="
         << models.accuracy_linear << " (gate 0.88), rbf-svm="
         << models.accuracy_rbf << " (gate 0.91), ann=" << models.accuracy_ann
         << " (gate 0.91)";
  const bool pass = data.rows() == 4601 && test_rows == 1101 &&
                    models.accuracy_linear >= 0.88 &&
                    models.accuracy_rbf >= 0.91 &&
                    models.accuracy_ann >= 0.91;
  return {3, pass, detail.str()};
}

// ---------------------------------------------------------------------------
// 4 and 5. Query-reduction bounds and the feasibility/accounting audit over
// the same attack set.

struct AttackAudit {
  double mean_bo_ann = 0.0;
  double mean_random_ann = 0.0;
  double mean_bo_rbf = 0.0;
  double mean_random_rbf = 0.0;
  int attacks = 0;
  int feasibility_violations = 0;
  int accounting_mismatches = 0;
};

AttackAudit run_attack_audit() {
  const Dataset data = load_spambase(dataset_path);
  const TrainedModels trained = split_and_train(data, TrainingConfig{});
  const SweepConfig cfg;  // defaults: caps 50/500, penalty 500, epsilon 0.05

  AttackAudit audit;
  struct Target {
    const ModelSpec* model;
    std::string name;
    int model_index;
    double budget;
    double* mean_bo;
    double* mean_random;
  };
  const std::vector<Target> targets = {
      {&trained.ann, "ann", 2, 10.0, &audit.mean_bo_ann,
       &audit.mean_random_ann},
      {&trained.rbf, "rbf-svm", 1, 5.0, &audit.mean_bo_rbf,
       &audit.mean_random_rbf},
  };

  for (const Target& target : targets) {
    std::vector<int> seeds;
    for (int s = 0;
         s < trained.test_points.rows() && static_cast<int>(seeds.size()) < 20;
         ++s) {
      bool in_pool = false;
      for (int p : trained.seed_pool) {
        if (p == s) in_pool = true;
      }
      if (!in_pool) continue;
      if (predict(*target.model, trained.test_points.row(s).transpose())
              .label == 1) {
        seeds.push_back(s);
      }
    }

    double sum_bo = 0.0, sum_random = 0.0;
    for (int s : seeds) {
      AttackProblem problem;
      problem.seed = trained.test_points.row(s).transpose();
      problem.baseline_label = 1;
      problem.budget = target.budget;
      problem.max_iterations = cfg.bo_cap;
      problem.bounds = target.model->scaling.model_space_bounds();

      for (const AttackMethod method :
           {AttackMethod::kBo, AttackMethod::kRandom}) {
        QueryCounter counter;
        const ModelSpec* model = target.model;
        const Oracle oracle = counting_oracle(
            [model](const FeatureVector& x) { return predict(*model, x); },
            counter);
        AttackOutcome outcome;
        if (method == AttackMethod::kBo) {
          outcome = bo_attack(oracle, problem, cfg.bo, cfg.direct);
        } else {
          RandomSearchConfig rnd;
          rnd.epsilon = cfg.epsilon;
          rnd.cap = cfg.random_cap;
          Rng rng(derive_seed({cfg.rng_seed,
                               static_cast<std::uint64_t>(target.model_index),
                               std::bit_cast<std::uint64_t>(target.budget),
                               static_cast<std::uint64_t>(s), 1ULL}));
          outcome = random_search_attack(oracle, problem, rnd, rng);
        }
        ++audit.attacks;
        for (const QueryRecord& rec : outcome.trace) {
          if (l1_distance(rec.point, problem.seed) >
              target.budget + 1e-9) {
            ++audit.feasibility_violations;
          }
        }
        if (static_cast<std::uint64_t>(outcome.queries) != counter.count() ||
            outcome.queries != static_cast<int>(outcome.trace.size())) {
          ++audit.accounting_mismatches;
        }
        const ExperimentRow row = make_row(target.name, target.budget, s,
                                           method, outcome, cfg);
        if (method == AttackMethod::kBo) {
          sum_bo += row.queries_accounted;
        } else {
          sum_random += row.queries_accounted;
        }
      }
    }
    *target.mean_bo = sum_bo / static_cast<double>(seeds.size());
    *target.mean_random = sum_random / static_cast<double>(seeds.size());
  }
  return audit;
}

Criterion criterion_4() {
  const AttackAudit audit = run_attack_audit();
  const double ratio_ann = audit.mean_bo_ann / audit.mean_random_ann;
  const double ratio_rbf = audit.mean_bo_rbf / audit.mean_random_rbf;
  std::ostringstream detail;
  detail << "ann C=10: mean bo=" << audit.mean_bo_ann << " (bound 100), "
         << "mean random=" << audit.mean_random_ann << ", ratio=" << ratio_ann
         << " (bound 0.3); rbf-svm C=5: ratio=" << ratio_rbf
         << " (bound 0.3)";
  const bool pass =
      audit.mean_bo_ann <= 100.0 && ratio_ann <= 0.3 && ratio_rbf <= 0.3;
  return {4, pass, detail.str()};
}

Criterion criterion_5() {
  const AttackAudit audit = run_attack_audit();
  std::ostringstream detail;
  detail << audit.attacks << " attacks audited, "
         << audit.feasibility_violations << " trace points over budget, "
         << audit.accounting_mismatches << " query-count mismatches";
  return {5, audit.attacks == 80 && audit.feasibility_violations == 0 &&
                 audit.accounting_mismatches == 0,
          detail.str()};
}

// ---------------------------------------------------------------------------
// 6. Failure accounting on a synthetic oracle that never flips.

Criterion criterion_6() {
  AttackProblem problem;
  problem.seed = FeatureVector::Constant(4, 0.5);
  problem.baseline_label = 1;
  problem.budget = 0.5;
  problem.max_iterations = 50;
  problem.bounds = Box::unit(4);

  const Oracle never = [](const FeatureVector&) {
    return OracleResponse{1, 0.95};
  };
  SweepConfig cfg;  // failure_value 500, random cap 500

  const AttackOutcome bo = bo_attack(never, problem, cfg.bo, cfg.direct);
  const ExperimentRow bo_row =
      make_row("synthetic", 0.5, 0, AttackMethod::kBo, bo, cfg);

  RandomSearchConfig rnd;
  rnd.epsilon = cfg.epsilon;
  rnd.cap = cfg.random_cap;
  Rng rng(7);
  const AttackOutcome random = random_search_attack(never, problem, rnd, rng);
  const ExperimentRow random_row =
      make_row("synthetic", 0.5, 0, AttackMethod::kRandom, random, cfg);

  std::ostringstream detail;
  detail << "bo row " << bo_row.queries_accounted << "/" << bo_row.queries_raw
         << " (want 500/50), random row " << random_row.queries_accounted
         << "/" << random_row.queries_raw << " (want 500/500)";
  const bool pass =
      bo_row.queries_accounted == 500 && bo_row.queries_raw == 50 &&
      random_row.queries_accounted == 500 && random_row.queries_raw == 500;
  return {6, pass, detail.str()};
}

// ---------------------------------------------------------------------------
// 7. Byte-identical outputs from two sweep runs with the same master seed.

std::string slurp(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Criterion criterion_7() {
  namespace fs = std::filesystem;
  const fs::path work = fs::temp_directory_path() / "bba_acceptance_sweep";
  fs::remove_all(work);
  fs::create_directories(work);
  const fs::path config = work / "sweep.conf";
  {
    std::ofstream os(config);
    os << "dataset = " << dataset_path << "\n";
    os << "seeds_per_budget = 8\n";
    os << "budgets = 1, 5, 10\n";
  }

  bool pass = false;
  std::ostringstream detail;
  if (!cli_path.empty()) {
    const std::string base = "\"" + cli_path + "\" sweep --config \"" +
                             config.string() + "\" --out \"";
    const std::string run1 =
        base + (work / "run1").string() + "\" >/dev/null 2>&1";
    const std::string run2 =
        base + (work / "run2").string() + "\" >/dev/null 2>&1";
    if (std::system(run1.c_str()) != 0 || std::system(run2.c_str()) != 0) {
      return {7, false, "sweep subcommand failed"};
    }
    const std::string raw1 = slurp(work / "run1" / "raw.csv");
    const std::string raw2 = slurp(work / "run2" / "raw.csv");
    const std::string agg1 = slurp(work / "run1" / "aggregate.csv");
    const std::string agg2 = slurp(work / "run2" / "aggregate.csv");
    pass = !raw1.empty() && raw1 == raw2 && !agg1.empty() && agg1 == agg2;
    detail << "two `sweep` invocations: raw.csv "
           << (raw1 == raw2 ? "identical" : "differ") << " ("
           << raw1.size() << " bytes), aggregate.csv "
           << (agg1 == agg2 ? "identical" : "differ");
  } else {
    // No CLI binary supplied: run the pipeline twice in-process.
    const Dataset data = load_spambase(dataset_path);
    SweepConfig cfg;
    cfg.budgets = {1, 5, 10};
    cfg.seeds_per_budget = 8;
    std::string outputs[2];
    for (int run = 0; run < 2; ++run) {
      const TrainedModels trained = split_and_train(data, TrainingConfig{});
      Matrix pool(trained.seed_pool.size(), trained.test_points.cols());
      for (std::size_t i = 0; i < trained.seed_pool.size(); ++i) {
        pool.row(static_cast<Eigen::Index>(i)) =
            trained.test_points.row(trained.seed_pool[i]);
      }
      std::stringstream raw, agg;
      const auto rows = run_sweep(sweep_models(trained), pool, cfg);
      write_raw_csv(rows, raw);
      write_aggregate_csv(aggregate_rows(rows), agg);
      outputs[run] = raw.str() + "\n---\n" + agg.str();
    }
    pass = !outputs[0].empty() && outputs[0] == outputs[1];
    detail << "two in-process sweep runs "
           << (pass ? "identical" : "differ");
  }
  fs::remove_all(work);
  return {7, pass, detail.str()};
}

// ---------------------------------------------------------------------------
// 8. Backpropagation against central finite differences.

Criterion criterion_8() {
  Rng rng(5);
  const int d = 4, hidden = 3, n = 6;
  Matrix x(n, d);
  std::vector<int> y;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) x(i, j) = rng.uniform(-1.0, 1.0);
    y.push_back(static_cast<int>(rng.below(2)));
  }
  AnnModel model;
  model.w1 = Matrix::Zero(d, hidden);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < hidden; ++j) model.w1(i, j) = 0.5 * rng.normal();
  }
  model.b1 = Eigen::VectorXd::Zero(hidden);
  model.w2 = Eigen::VectorXd::Zero(hidden);
  for (int j = 0; j < hidden; ++j) model.w2[j] = 0.5 * rng.normal();
  model.b2 = 0.1;

  const AnnGradients grad = ann_gradients(model, x, y);
  const double h = 1e-5;
  double max_rel = 0.0;
  const auto check = [&](double* param, double analytic) {
    const double saved = *param;
    *param = saved + h;
    const double hi = ann_loss(model, x, y);
    *param = saved - h;
    const double lo = ann_loss(model, x, y);
    *param = saved;
    const double fd = (hi - lo) / (2.0 * h);
    const double rel = std::abs(analytic - fd) /
                       std::max(1e-6, std::abs(analytic) + std::abs(fd));
    max_rel = std::max(max_rel, rel);
  };
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < hidden; ++j) check(&model.w1(i, j), grad.w1(i, j));
  }
  for (int j = 0; j < hidden; ++j) check(&model.b1[j], grad.b1[j]);
  for (int j = 0; j < hidden; ++j) check(&model.w2[j], grad.w2[j]);
  check(&model.b2, grad.b2);

  std::ostringstream detail;
  detail << "max relative gradient error " << max_rel << " (bound 1e-4)";
  return {8, max_rel < 1e-4, detail.str()};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <dataset.csv> [criterion] [cli-binary]\n";
    return 2;
  }
  dataset_path = argv[1];
  int selected = 0;
  if (argc >= 3) selected = std::atoi(argv[2]);
  if (argc >= 4) cli_path = argv[3];

  const std::vector<std::function<Criterion()>> criteria = {
      criterion_1, criterion_2, criterion_3, criterion_4,
      criterion_5, criterion_6, criterion_7, criterion_8};

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (selected != 0 && number != selected) continue;
    const Criterion result = criteria[i]();
    std::cout << "criterion " << result.number << ": "
              << (result.pass ? "PASS" : "FAIL") << " - " << result.detail
              << std::endl;
    if (!result.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
