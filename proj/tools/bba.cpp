// Command-line front end: train the target classifiers, run single attacks,
// run the budget-sweep experiment, and aggregate raw result files.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bba/attack.hpp"
#include "bba/dataset.hpp"
#include "bba/experiment.hpp"
#include "bba/model.hpp"
#include "bba/settings.hpp"
#include "bba/trace.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

void write_points_csv(const bba::Matrix& points, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw bba::DataError("cannot write " + path);
  os.precision(17);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index j = 0; j < points.cols(); ++j) {
      os << (j ? "," : "") << points(i, j);
    }
    os << '\n';
  }
}

bba::Matrix read_points_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw bba::DataError("cannot open seed file: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw bba::DataError(path + ":" + std::to_string(line_no) +
                             ": bad value '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw bba::DataError(path + ":" + std::to_string(line_no) +
                           ": inconsistent column count");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw bba::DataError(path + ": no rows");
  bba::Matrix out(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows.front().size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
    }
  }
  return out;
}

struct TrainArgs {
  std::string dataset;
  std::string out_dir;
  std::uint64_t seed = 20260810;
  std::string scaling = "minmax";
  std::string config_path;
};

int run_train(const TrainArgs& args) {
  bba::Settings settings;
  if (!args.config_path.empty()) {
    settings = bba::settings_from_config(
        bba::ConfigMap::parse_file(args.config_path));
  }
  settings.training.seed = args.seed;
  settings.training.scaling = bba::scaling_mode_from_string(args.scaling);

  const bba::Dataset data = bba::load_spambase(args.dataset);
  std::cout << "loaded " << data.rows() << " rows (" << data.count_label(1)
            << " spam) from " << data.source << '\n';

  const bba::TrainedModels trained =
      bba::split_and_train(data, settings.training);
  std::filesystem::create_directories(args.out_dir);
  bba::save_model(trained.linear, args.out_dir + "/linear-svm.model");
  bba::save_model(trained.rbf, args.out_dir + "/rbf-svm.model");
  bba::save_model(trained.ann, args.out_dir + "/ann.model");

  bba::Matrix seeds(trained.seed_pool.size(), trained.test_points.cols());
  for (std::size_t i = 0; i < trained.seed_pool.size(); ++i) {
    seeds.row(static_cast<Eigen::Index>(i)) =
        trained.test_points.row(trained.seed_pool[i]);
  }
  write_points_csv(seeds, args.out_dir + "/seeds.csv");

  std::cout << "train split: " << settings.training.train_count << " / "
            << data.rows() - settings.training.train_count << '\n';
  std::cout << "test accuracy linear-svm: " << trained.accuracy_linear << '\n';
  std::cout << "test accuracy rbf-svm:    " << trained.accuracy_rbf << '\n';
  std::cout << "test accuracy ann:        " << trained.accuracy_ann << '\n';
  std::cout << "wrote models and " << seeds.rows() << " attack seeds to "
            << args.out_dir << '\n';
  return kExitOk;
}

struct AttackArgs {
  std::string model_path;
  std::string seeds_path;
  int seed_index = 0;
  double budget = 1.0;
  std::string method = "bo";
  int iterations = 50;
  int cap = 500;
  double epsilon = 0.05;
  double kappa = 2.0;
  std::string orientation = "minimize";
  double lengthscale_factor = 0.5;
  int inner_budget = 500;
  std::uint64_t rng_seed = 1;
  bool no_seed_observation = false;
  int target_label = -1;
  std::string trace_path;
};

int run_attack(const AttackArgs& args) {
  const bba::ModelSpec model = bba::load_model(args.model_path);
  const bba::Matrix seeds = read_points_csv(args.seeds_path);
  if (seeds.cols() != model.dim()) {
    throw bba::DataError("seed dimension does not match model");
  }
  if (args.seed_index < 0 || args.seed_index >= seeds.rows()) {
    throw bba::ConfigError("seed index out of range");
  }

  bba::AttackProblem problem;
  problem.seed = seeds.row(args.seed_index).transpose();
  problem.bounds = model.scaling.model_space_bounds();
  problem.budget = args.budget;
  problem.max_iterations = args.iterations;
  const bba::OracleResponse baseline = bba::predict(model, problem.seed);
  problem.baseline_label = baseline.label;
  if (args.target_label >= 0) problem.target_label = args.target_label;

  bba::QueryCounter counter;
  const bba::Oracle oracle = bba::counting_oracle(
      [&model](const bba::FeatureVector& x) { return bba::predict(model, x); },
      counter);

  bba::AttackOutcome outcome;
  if (args.method == "bo") {
    bba::BoAttackConfig bo;
    bo.acquisition.kappa = args.kappa;
    bo.acquisition.orientation =
        bba::orientation_from_string(args.orientation);
    bo.lengthscale_factor = args.lengthscale_factor;
    bo.seed_observation = !args.no_seed_observation;
    bba::DirectConfig direct;
    direct.budget = args.inner_budget;
    outcome = bba::bo_attack(oracle, problem, bo, direct);
  } else if (args.method == "random") {
    bba::RandomSearchConfig rnd;
    rnd.epsilon = args.epsilon;
    rnd.cap = args.cap;
    bba::Rng rng(args.rng_seed);
    outcome = bba::random_search_attack(oracle, problem, rnd, rng);
  } else {
    throw bba::ConfigError("method must be 'bo' or 'random'");
  }

  std::cout << "baseline label " << problem.baseline_label << " (confidence "
            << baseline.confidence << ")\n";
  std::cout << (outcome.success ? "success" : "failure") << " after "
            << outcome.queries << " queries\n";
  if (!outcome.diagnostic.empty()) {
    std::cout << "diagnostic: " << outcome.diagnostic << '\n';
  }
  if (outcome.success) {
    const bba::QueryRecord& last = outcome.trace.back();
    std::cout << "adversarial label " << last.label << " (confidence "
              << last.confidence << ") at L1 cost " << last.cost << '\n';
  }
  if (!args.trace_path.empty()) {
    std::ofstream os(args.trace_path);
    if (!os) throw bba::DataError("cannot write trace: " + args.trace_path);
    bba::write_trace_jsonl(outcome, problem.seed, os);
    std::cout << "trace written to " << args.trace_path << '\n';
  }
  return kExitOk;
}

struct SweepArgs {
  std::string config_path;
  std::string out_dir;
};

int run_sweep_cmd(const SweepArgs& args) {
  const bba::Settings settings =
      bba::settings_from_config(bba::ConfigMap::parse_file(args.config_path));
  if (settings.dataset.empty()) {
    throw bba::ConfigError(args.config_path + ": 'dataset' is required");
  }
  const bba::Dataset data = bba::load_spambase(settings.dataset);
  std::cout << "loaded " << data.rows() << " rows from " << data.source
            << "; training models...\n";
  const bba::TrainedModels trained =
      bba::split_and_train(data, settings.training);
  std::cout << "test accuracy linear-svm=" << trained.accuracy_linear
            << " rbf-svm=" << trained.accuracy_rbf
            << " ann=" << trained.accuracy_ann << '\n';

  bba::Matrix pool(trained.seed_pool.size(), trained.test_points.cols());
  for (std::size_t i = 0; i < trained.seed_pool.size(); ++i) {
    pool.row(static_cast<Eigen::Index>(i)) =
        trained.test_points.row(trained.seed_pool[i]);
  }

  const std::vector<bba::ExperimentRow> rows = bba::run_sweep(
      bba::sweep_models(trained), pool, settings.sweep, &std::clog);
  const std::vector<bba::AggregateRow> aggregates = bba::aggregate_rows(rows);

  std::filesystem::create_directories(args.out_dir);
  {
    std::ofstream os(args.out_dir + "/raw.csv");
    if (!os) throw bba::DataError("cannot write raw.csv");
    bba::write_raw_csv(rows, os);
  }
  {
    std::ofstream os(args.out_dir + "/aggregate.csv");
    if (!os) throw bba::DataError("cannot write aggregate.csv");
    bba::write_aggregate_csv(aggregates, os);
  }
  bba::print_query_ratios(aggregates, std::cout);
  std::cout << "wrote " << rows.size() << " rows to " << args.out_dir
            << "/raw.csv\n";
  return kExitOk;
}

struct ReportArgs {
  std::string raw_path;
  std::string out_path;
};

int run_report(const ReportArgs& args) {
  std::ifstream is(args.raw_path);
  if (!is) throw bba::DataError("cannot open " + args.raw_path);
  const std::vector<bba::ExperimentRow> rows =
      bba::read_raw_csv(is, args.raw_path);
  const std::vector<bba::AggregateRow> aggregates = bba::aggregate_rows(rows);
  std::ofstream os(args.out_path);
  if (!os) throw bba::DataError("cannot write " + args.out_path);
  bba::write_aggregate_csv(aggregates, os);
  bba::print_query_ratios(aggregates, std::cout);
  std::cout << "wrote " << aggregates.size() << " aggregate rows to "
            << args.out_path << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"query-efficient black-box attacks on spam classifiers"};
  app.require_subcommand(1);

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand(
      "train", "train the target classifiers and export attack seeds");
  train->add_option("--data", train_args.dataset, "spambase-format CSV")
      ->required();
  train->add_option("--out", train_args.out_dir, "output directory")
      ->required();
  train->add_option("--seed", train_args.seed, "split/training seed");
  train->add_option("--scaling", train_args.scaling, "minmax or raw");
  train->add_option("--config", train_args.config_path,
                    "config file with training overrides");

  AttackArgs attack_args;
  CLI::App* attack =
      app.add_subcommand("attack", "attack one seed instance");
  attack->add_option("--model", attack_args.model_path, "model file")
      ->required();
  attack->add_option("--seeds", attack_args.seeds_path, "seeds.csv from train")
      ->required();
  attack->add_option("--seed-index", attack_args.seed_index, "row in seeds");
  attack->add_option("--budget", attack_args.budget, "L1 modification budget")
      ->required();
  attack->add_option("--method", attack_args.method, "bo or random");
  attack->add_option("--iterations", attack_args.iterations,
                     "surrogate attack iteration cap");
  attack->add_option("--cap", attack_args.cap, "random search query cap");
  attack->add_option("--epsilon", attack_args.epsilon,
                     "random search annulus width");
  attack->add_option("--kappa", attack_args.kappa, "exploration weight");
  attack->add_option("--orientation", attack_args.orientation,
                     "acquisition orientation: minimize or maximize");
  attack->add_option("--lengthscale-factor", attack_args.lengthscale_factor,
                     "kernel lengthscale = factor * sqrt(dim)");
  attack->add_option("--inner-budget", attack_args.inner_budget,
                     "acquisition maximizer evaluation budget");
  attack->add_option("--rng-seed", attack_args.rng_seed, "random search seed");
  attack->add_flag("--no-seed-observation", attack_args.no_seed_observation,
                   "start the surrogate empty");
  attack->add_option("--target-label", attack_args.target_label,
                     "targeted mode: required output label");
  attack->add_option("--trace", attack_args.trace_path,
                     "write per-query JSONL trace here");

  SweepArgs sweep_args;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "budget sweep over all models, both attack methods");
  sweep->add_option("--config", sweep_args.config_path, "sweep config file")
      ->required();
  sweep->add_option("--out", sweep_args.out_dir, "output directory")
      ->required();

  ReportArgs report_args;
  CLI::App* report =
      app.add_subcommand("report", "aggregate a raw sweep CSV");
  report->add_option("--raw", report_args.raw_path, "raw.csv path")
      ->required();
  report->add_option("--out", report_args.out_path, "aggregate CSV path")
      ->required();

  try {
    app.parse(argc, argv);
    if (train->parsed()) return run_train(train_args);
    if (attack->parsed()) return run_attack(attack_args);
    if (sweep->parsed()) return run_sweep_cmd(sweep_args);
    if (report->parsed()) return run_report(report_args);
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const bba::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const bba::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const bba::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}
