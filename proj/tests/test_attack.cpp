#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "bba/attack.hpp"
#include "bba/oracle.hpp"
#include "bba/rng.hpp"
#include "bba/trace.hpp"

using bba::AttackOutcome;
using bba::AttackProblem;
using bba::BoAttackConfig;
using bba::Box;
using bba::FeatureVector;
using bba::Oracle;
using bba::OracleResponse;
using bba::QueryCounter;
using bba::RandomSearchConfig;

namespace {

FeatureVector vec(std::initializer_list<double> values) {
  FeatureVector v(static_cast<Eigen::Index>(values.size()));
  int i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

AttackProblem make_problem(const FeatureVector& seed, double budget,
                           int iterations) {
  AttackProblem p;
  p.seed = seed;
  p.baseline_label = 1;
  p.budget = budget;
  p.max_iterations = iterations;
  p.bounds = Box::unit(static_cast<int>(seed.size()));
  return p;
}

// Flips to ham once the first coordinate moves past seed[0] + margin.
Oracle threshold_oracle(double boundary) {
  return [boundary](const FeatureVector& x) {
    const bool spam = x[0] <= boundary;
    const double p_spam =
        std::clamp(0.5 + (boundary - x[0]), 0.02, 0.98);
    OracleResponse r;
    r.label = spam ? 1 : 0;
    r.confidence = spam ? p_spam : 1.0 - p_spam;
    if (r.confidence < 0.5) r.confidence = 0.5;
    return r;
  };
}

const Oracle kNeverFlips = [](const FeatureVector&) {
  return OracleResponse{1, 0.9};
};

const Oracle kAlwaysFlips = [](const FeatureVector&) {
  return OracleResponse{0, 0.8};
};

}  // namespace

TEST_CASE("objective is the probability of keeping the baseline label") {
  AttackProblem p = make_problem(vec({0.5}), 1.0, 10);
  p.baseline_label = 1;
  CHECK(bba::objective_from_response({1, 0.9}, p) == Catch::Approx(0.9));
  CHECK(bba::objective_from_response({0, 0.8}, p) == Catch::Approx(0.2));
}

TEST_CASE("targeted objective is one minus the target probability") {
  AttackProblem p = make_problem(vec({0.5}), 1.0, 10);
  p.baseline_label = 1;
  p.target_label = 0;
  CHECK(bba::objective_from_response({0, 0.8}, p) == Catch::Approx(0.2));
  CHECK(bba::objective_from_response({1, 0.7}, p) == Catch::Approx(0.7));
}

TEST_CASE("surrogate attack crosses a nearby decision boundary") {
  const FeatureVector seed = vec({0.4, 0.5, 0.6});
  const AttackProblem problem = make_problem(seed, 0.5, 50);
  QueryCounter counter;
  const Oracle oracle =
      bba::counting_oracle(threshold_oracle(seed[0] + 0.05), counter);
  const AttackOutcome out = bba::bo_attack(oracle, problem);
  REQUIRE(out.success);
  CHECK(out.queries == static_cast<int>(out.trace.size()));
  CHECK(out.queries == static_cast<int>(counter.count()));
  CHECK(out.queries <= 50);
  for (const auto& rec : out.trace) {
    CHECK(bba::l1_distance(rec.point, seed) <= 0.5 + 1e-9);
  }
  // Success soundness: an out-of-band query reproduces the flip.
  REQUIRE(out.adversarial_point.has_value());
  CHECK(threshold_oracle(seed[0] + 0.05)(*out.adversarial_point).label == 0);
}

TEST_CASE("an unreachable boundary fails after exactly the iteration cap") {
  const AttackProblem problem = make_problem(vec({0.5, 0.5}), 0.3, 17);
  QueryCounter counter;
  const Oracle oracle = bba::counting_oracle(kNeverFlips, counter);
  const AttackOutcome out = bba::bo_attack(oracle, problem);
  CHECK(!out.success);
  CHECK(out.queries == 17);
  CHECK(counter.count() == 17);
  CHECK(out.trace.size() == 17);
}

TEST_CASE("the surrogate holds the seed plus one point per completed step") {
  const AttackProblem problem = make_problem(vec({0.5, 0.5}), 0.4, 9);
  std::vector<int> gp_sizes;
  const AttackOutcome out = bba::bo_attack(
      kNeverFlips, problem, BoAttackConfig{}, bba::DirectConfig{},
      [&](const bba::QueryRecord& rec, int gp_observations) {
        (void)rec;
        gp_sizes.push_back(gp_observations);
      });
  REQUIRE(!out.success);
  REQUIRE(gp_sizes.size() == 9);
  for (int t = 1; t <= 9; ++t) {
    CHECK(gp_sizes[static_cast<std::size_t>(t - 1)] == t + 1);
  }
}

TEST_CASE("without the seed observation the first query is the seed itself") {
  const FeatureVector seed = vec({0.4, 0.6});
  const AttackProblem problem = make_problem(seed, 0.3, 2);
  BoAttackConfig cfg;
  cfg.seed_observation = false;
  const AttackOutcome out =
      bba::bo_attack(kNeverFlips, problem, cfg, bba::DirectConfig{});
  REQUIRE(out.trace.size() == 2);
  // Empty surrogate makes the acquisition constant; the maximizer keeps the
  // first evaluated point, which is the cube center.
  CHECK(out.trace[0].point == seed);
}

TEST_CASE("targeted attack succeeds on the matching label") {
  const FeatureVector seed = vec({0.4, 0.5});
  AttackProblem problem = make_problem(seed, 0.5, 50);
  problem.target_label = 0;
  const AttackOutcome out =
      bba::bo_attack(threshold_oracle(seed[0] + 0.04), problem);
  REQUIRE(out.success);
  CHECK(out.trace.back().label == 0);
}

TEST_CASE("annulus samples from an interior seed stay in the radius band") {
  bba::Rng rng(2);
  const FeatureVector seed = FeatureVector::Constant(8, 0.5);
  const Box bounds = Box::unit(8);
  for (int i = 0; i < 2000; ++i) {
    const FeatureVector x =
        bba::sample_l1_annulus(seed, 0.4, 0.05, bounds, rng);
    const double dist = bba::l1_distance(x, seed);
    CHECK(dist > 0.35 - 1e-12);
    CHECK(dist <= 0.4 + 1e-12);
    CHECK(bounds.contains(x));
  }
}

TEST_CASE("clipped annulus samples never exceed the budget") {
  bba::Rng rng(3);
  FeatureVector seed(4);
  seed << 0.02, 0.97, 0.5, 0.01;  // close to the bounds, clipping certain
  const Box bounds = Box::unit(4);
  for (int i = 0; i < 2000; ++i) {
    const FeatureVector x =
        bba::sample_l1_annulus(seed, 0.6, 0.05, bounds, rng);
    CHECK(bba::l1_distance(x, seed) <= 0.6 + 1e-12);
    CHECK(bounds.contains(x));
  }
}

TEST_CASE("mean per-coordinate offset matches the sphere geometry") {
  bba::Rng rng(4);
  const int dim = 8;
  const double budget = 0.4;
  const FeatureVector seed = FeatureVector::Constant(dim, 0.5);
  const Box bounds = Box::unit(dim);
  double total = 0.0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    const FeatureVector x =
        bba::sample_l1_annulus(seed, budget, 0.005, bounds, rng);
    total += (x - seed).cwiseAbs().mean();
  }
  const double mean_offset = total / draws;
  // Uniform direction on the L1 sphere spreads the radius evenly: C/d.
  CHECK(mean_offset == Catch::Approx(budget / dim).epsilon(0.05));
}

TEST_CASE("annulus sampling validates the width") {
  bba::Rng rng(5);
  const FeatureVector seed = FeatureVector::Constant(2, 0.5);
  CHECK_THROWS_AS(bba::sample_l1_annulus(seed, 0.1, 0.2, Box::unit(2), rng),
                  std::invalid_argument);
}

TEST_CASE("random search succeeds immediately on an always-flipping oracle") {
  const AttackProblem problem = make_problem(vec({0.5, 0.5}), 0.4, 50);
  QueryCounter counter;
  const Oracle oracle = bba::counting_oracle(kAlwaysFlips, counter);
  bba::Rng rng(6);
  const AttackOutcome out =
      bba::random_search_attack(oracle, problem, RandomSearchConfig{}, rng);
  CHECK(out.success);
  CHECK(out.queries == 1);
  CHECK(counter.count() == 1);
}

TEST_CASE("random search exhausts the cap on a never-flipping oracle") {
  const AttackProblem problem = make_problem(vec({0.5, 0.5}), 0.4, 50);
  QueryCounter counter;
  const Oracle oracle = bba::counting_oracle(kNeverFlips, counter);
  RandomSearchConfig cfg;
  cfg.cap = 123;
  bba::Rng rng(7);
  const AttackOutcome out =
      bba::random_search_attack(oracle, problem, cfg, rng);
  CHECK(!out.success);
  CHECK(out.queries == 123);
  CHECK(counter.count() == 123);
  for (const auto& rec : out.trace) {
    CHECK(bba::l1_distance(rec.point, problem.seed) <= 0.4 + 1e-9);
  }
}

TEST_CASE("random search with a fixed seed repeats its trace exactly") {
  const AttackProblem problem = make_problem(vec({0.3, 0.7, 0.5}), 0.5, 50);
  RandomSearchConfig cfg;
  cfg.cap = 40;
  bba::Rng rng_a(99), rng_b(99);
  const AttackOutcome a =
      bba::random_search_attack(kNeverFlips, problem, cfg, rng_a);
  const AttackOutcome b =
      bba::random_search_attack(kNeverFlips, problem, cfg, rng_b);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].point == b.trace[i].point);
  }
}

TEST_CASE("query counter tracks invocations exactly") {
  QueryCounter counter;
  CHECK(counter.count() == 0);
  const Oracle oracle = bba::counting_oracle(kNeverFlips, counter);
  const FeatureVector x = vec({0.1});
  for (int i = 0; i < 16; ++i) oracle(x);
  CHECK(counter.count() == 16);
  counter.reset();
  for (int i = 0; i < 3; ++i) oracle(x);
  CHECK(counter.count() == 3);
}

TEST_CASE("trace export writes one parseable line per query") {
  const FeatureVector seed = vec({0.4, 0.5});
  const AttackProblem problem = make_problem(seed, 0.5, 50);
  const AttackOutcome out =
      bba::bo_attack(threshold_oracle(seed[0] + 0.05), problem);
  REQUIRE(out.success);
  std::stringstream buffer;
  bba::write_trace_jsonl(out, seed, buffer);
  std::string line;
  int lines = 0;
  while (std::getline(buffer, line)) {
    ++lines;
    const nlohmann::json j = nlohmann::json::parse(line);
    CHECK(j["step"].get<int>() == lines);
    CHECK(j["confidence"].get<double>() >= 0.0);
    CHECK(j["cost"].get<double>() <= 0.5 + 1e-9);
    double reconstructed = 0.0;
    for (const auto& d : j["deltas"]) {
      reconstructed += std::abs(d[1].get<double>());
    }
    CHECK(reconstructed == Catch::Approx(j["cost"].get<double>()).margin(1e-9));
  }
  CHECK(lines == out.queries);
}

TEST_CASE("periodic lengthscale refits keep the attack deterministic") {
  const FeatureVector seed = vec({0.45, 0.55, 0.5});
  const AttackProblem problem = make_problem(seed, 0.4, 10);
  BoAttackConfig cfg;
  cfg.refit_every = 3;
  const AttackOutcome a =
      bba::bo_attack(kNeverFlips, problem, cfg, bba::DirectConfig{});
  const AttackOutcome b =
      bba::bo_attack(kNeverFlips, problem, cfg, bba::DirectConfig{});
  CHECK(!a.success);
  CHECK(a.queries == 10);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].point == b.trace[i].point);
  }
}

TEST_CASE("the maximize orientation also finds a nearby flip") {
  const FeatureVector seed = vec({0.4, 0.5});
  const AttackProblem problem = make_problem(seed, 0.5, 50);
  BoAttackConfig cfg;
  cfg.acquisition.orientation =
      bba::AcquisitionOrientation::kMaximizeObjective;
  const AttackOutcome out =
      bba::bo_attack(threshold_oracle(seed[0] + 0.05), problem, cfg,
                     bba::DirectConfig{});
  CHECK(out.queries <= 50);
  for (const auto& rec : out.trace) {
    CHECK(bba::l1_distance(rec.point, seed) <= 0.5 + 1e-9);
  }
}

TEST_CASE("fixed configuration reproduces the surrogate attack exactly") {
  const FeatureVector seed = vec({0.45, 0.55, 0.5});
  const AttackProblem problem = make_problem(seed, 0.4, 12);
  const AttackOutcome a = bba::bo_attack(kNeverFlips, problem);
  const AttackOutcome b = bba::bo_attack(kNeverFlips, problem);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].point == b.trace[i].point);
  }
}
