#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "splitopt/config_space.hpp"
#include "splitopt/flops_model.hpp"
#include "splitopt/ga_engine.hpp"
#include "splitopt/oracle.hpp"

using namespace splitopt;

namespace {

const ParameterSpace& default_space() {
  static const ParameterSpace space = ParameterSpace::defaults();
  return space;
}

const ArchPolicy& default_policy() {
  static const ArchPolicy policy;
  return policy;
}

EvaluatorStack oracle_stack(const SyntheticOracle& oracle, double budget,
                            double snr_db) {
  EvaluatorStack stack;
  stack.policy = &default_policy();
  stack.accuracy = oracle.as_accuracy_fn(default_policy());
  stack.budget = budget;
  stack.snr_db = snr_db;
  return stack;
}

}  // namespace

TEST_CASE("utilization anchors are exact") {
  for (const double budget : {20.0, 1e6, 1e7, 12345600.0}) {
    CHECK(utilization(0.9 * budget, budget) == 0.0);
    CHECK(utilization(0.95 * budget, budget) == 0.5);
    CHECK(utilization(budget, budget) == 1.0);
  }

  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double budget = 1e5 + rng.uniform_unit() * 1e8;
    const double ratio = rng.uniform_unit() * 0.899;
    CHECK(utilization(ratio * budget, budget) == 0.0);
  }

  // Linear between the knee and the budget.
  CHECK(utilization(0.925 * 1e7, 1e7) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK_THROWS_AS(utilization(10.0, 0.0), std::invalid_argument);
}

TEST_CASE("utilization is non-decreasing in the cost") {
  const double budget = 3.3e7;
  double prev = -1.0;
  for (double f = 0.0; f <= budget; f += budget / 997.0) {
    const double u = utilization(f, budget);
    REQUIRE(u >= prev);
    prev = u;
  }
}

TEST_CASE("the infeasible sentinel loses against any feasible tuple") {
  const FitnessTuple sentinel = FitnessTuple::infeasible();
  CHECK_FALSE(sentinel.feasible());
  CHECK(fitness_greater({0.0, 1e9}, sentinel));
  CHECK(fitness_greater({-1000.0, 1e12}, sentinel));
  CHECK_FALSE(fitness_greater(sentinel, {-1000.0, 1e12}));
  CHECK_FALSE(fitness_greater(sentinel, sentinel));
}

TEST_CASE("fitness comparison is a strict total order") {
  Rng rng(19);
  std::vector<FitnessTuple> tuples;
  for (int i = 0; i < 60; ++i) {
    if (i % 7 == 0) {
      tuples.push_back(FitnessTuple::infeasible());
    } else {
      tuples.push_back(FitnessTuple{std::floor(rng.uniform_unit() * 10.0),
                                    std::floor(rng.uniform_unit() * 10.0)});
    }
  }

  for (const auto& a : tuples) {
    CHECK_FALSE(fitness_greater(a, a));  // irreflexive
    for (const auto& b : tuples) {
      // trichotomy
      const int relations = (a == b ? 1 : 0) + (fitness_greater(a, b) ? 1 : 0) +
                            (fitness_greater(b, a) ? 1 : 0);
      REQUIRE(relations == 1);
      for (const auto& c : tuples) {
        if (fitness_greater(a, b) && fitness_greater(b, c)) {
          REQUIRE(fitness_greater(a, c));  // transitive
        }
      }
    }
  }
}

TEST_CASE("evaluation serves dataset rows first and screens the budget") {
  const ParameterSpace& space = default_space();
  const double budget = 1e7;

  const Configuration stored{8, 3, 32, 1};
  const Configuration over{8, 3, 32, 2};
  const Configuration missing{8, 3, 32, 3};
  const OfflineDataset dataset = OfflineDataset::from_records(
      {{stored, -10.0, static_cast<std::int64_t>(budget), 60.0},
       {over, -10.0, static_cast<std::int64_t>(budget) + 1, 70.0}},
      space);

  const SyntheticOracle oracle;
  EvaluatorStack stack = oracle_stack(oracle, budget, -10.0);
  stack.dataset = &dataset;

  SUBCASE("stored row at exactly the budget earns the full reward") {
    const Evaluation eval = stack.evaluate(stored);
    CHECK(eval.source == EvalSource::kDataset);
    CHECK(eval.accuracy == 60.0);
    CHECK(eval.fitness.primary == 61.0);
    CHECK(eval.fitness.gap == 0.0);
  }

  SUBCASE("stored row over the budget carries the sentinel") {
    const Evaluation eval = stack.evaluate(over);
    CHECK(eval.source == EvalSource::kDataset);
    CHECK(eval.fitness == FitnessTuple::infeasible());
  }

  SUBCASE("missing rows fall through to the estimators") {
    const Evaluation eval = stack.evaluate(missing);
    CHECK(eval.source == EvalSource::kSurrogate);
    CHECK(eval.flops ==
          static_cast<double>(device_flops(missing, default_policy()).total));
    CHECK(eval.accuracy ==
          oracle.accuracy(missing, -10.0, default_policy()));
  }
}

TEST_CASE("evaluator stack validation catches wiring mistakes") {
  EvaluatorStack stack;
  CHECK_THROWS_AS(stack.validate(), std::invalid_argument);  // budget
  stack.budget = 1.0;
  CHECK_THROWS_AS(stack.validate(), std::invalid_argument);  // policy
  stack.policy = &default_policy();
  CHECK_THROWS_AS(stack.validate(), std::invalid_argument);  // accuracy
  const SyntheticOracle oracle;
  stack.accuracy = oracle.as_accuracy_fn(default_policy());
  CHECK_NOTHROW(stack.validate());
  stack.flops_source = FlopsSource::kSurrogate;
  CHECK_THROWS_AS(stack.validate(), std::invalid_argument);  // missing model
}

TEST_CASE("tournaments return the best entrant") {
  std::vector<FitnessTuple> fitness;
  for (int i = 0; i < 20; ++i) {
    fitness.push_back(FitnessTuple{static_cast<double>(i), 0.0});
  }
  Rng rng(3);
  // A tournament spanning the whole population always finds the maximum.
  for (int i = 0; i < 50; ++i) {
    CHECK(tournament_select(fitness, 20, rng) == 19);
  }

  CHECK_THROWS_AS(tournament_select(fitness, 21, rng), std::invalid_argument);
  CHECK_THROWS_AS(tournament_select({}, 1, rng), std::invalid_argument);
}

TEST_CASE("an all-infeasible tournament still yields a member") {
  const std::vector<FitnessTuple> fitness(10, FitnessTuple::infeasible());
  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    const std::size_t pick = tournament_select(fitness, 3, rng);
    REQUIRE(pick < fitness.size());
  }
}

TEST_CASE("selection probability grows with fitness rank") {
  std::vector<FitnessTuple> fitness;
  for (int i = 0; i < 20; ++i) {
    fitness.push_back(FitnessTuple{static_cast<double>(i), 0.0});
  }
  Rng rng(29);
  std::vector<int> wins(20, 0);
  const int draws = 200000;
  for (int i = 0; i < draws; ++i) {
    ++wins[tournament_select(fitness, 3, rng)];
  }
  // Expected win counts grow quadratically in rank; adjacent-rank gaps are
  // far above sampling noise at this draw count.
  for (int r = 1; r < 20; ++r) {
    REQUIRE(wins[r] >= wins[r - 1]);
  }
}

TEST_CASE("degenerate operators reduce a step to tournament winners") {
  const SyntheticOracle oracle;
  const EvaluatorStack stack = oracle_stack(oracle, 1e8, 0.0);

  GaParams params;
  params.crossover_prob = 0.0;
  params.mutation_prob = 0.0;
  // Sentinel mode passes offspring through untouched, so with both
  // operators off the next generation is exactly a multiset of winners.
  params.constraint_handling = ConstraintHandling::kSentinel;

  Rng rng(41);
  std::vector<Configuration> population;
  std::vector<FitnessTuple> fitness;
  for (int i = 0; i < params.population; ++i) {
    population.push_back(sample_uniform(default_space(), rng));
    fitness.push_back(stack.evaluate(population.back()).fitness);
  }

  const auto next =
      step_generation(population, fitness, default_space(), stack, params, rng);
  REQUIRE(next.size() == population.size());
  for (const Configuration& child : next) {
    CHECK(std::count(population.begin(), population.end(), child) > 0);
  }

  // The resampling mode may additionally swap over-budget offspring for
  // fresh on-budget draws.
  params.constraint_handling = ConstraintHandling::kResample;
  const auto repaired =
      step_generation(population, fitness, default_space(), stack, params, rng);
  for (const Configuration& child : repaired) {
    const bool from_parent =
        std::count(population.begin(), population.end(), child) > 0;
    const bool on_budget = stack.effective_flops(child) <= stack.budget;
    CHECK((from_parent || on_budget));
  }
}

TEST_CASE("a singleton space fixes the population") {
  const ParameterSpace space({8}, {3}, {32}, {1});
  const SyntheticOracle oracle;
  const EvaluatorStack stack = oracle_stack(oracle, 1e7, 0.0);

  GaParams params;
  Rng rng(2);
  std::vector<Configuration> population(20, Configuration{8, 3, 32, 1});
  std::vector<FitnessTuple> fitness(
      20, stack.evaluate(population.front()).fitness);
  const auto next = step_generation(population, fitness, space, stack, params, rng);
  for (const Configuration& child : next) {
    CHECK(child == Configuration{8, 3, 32, 1});
  }
}

TEST_CASE("selection pressure lifts the population mean") {
  const SyntheticOracle oracle;
  // A budget above the whole space keeps every configuration feasible, so
  // the mean is finite throughout.
  const EvaluatorStack stack = oracle_stack(oracle, 8e12, 0.0);
  GaParams params;

  int steps = 0;
  int non_decreasing = 0;
  int improved_runs = 0;
  const int seeds = 20;
  for (int seed = 0; seed < seeds; ++seed) {
    Rng rng(Rng::mix(static_cast<std::uint64_t>(seed), 0));
    std::vector<Configuration> population;
    for (int i = 0; i < params.population; ++i) {
      population.push_back(sample_uniform(default_space(), rng));
    }
    const auto mean_primary = [&](const std::vector<Configuration>& pop) {
      double sum = 0.0;
      for (const Configuration& c : pop) {
        sum += stack.evaluate(c).fitness.primary;
      }
      return sum / static_cast<double>(pop.size());
    };

    const double start = mean_primary(population);
    double prev = start;
    for (int g = 0; g < params.generations; ++g) {
      std::vector<FitnessTuple> fitness;
      for (const Configuration& c : population) {
        fitness.push_back(stack.evaluate(c).fitness);
      }
      population = step_generation(population, fitness, default_space(), stack,
                                   params, rng);
      const double cur = mean_primary(population);
      ++steps;
      if (cur >= prev) ++non_decreasing;
      prev = cur;
    }
    if (prev > start) ++improved_runs;
  }

  // Improvement dominates while the search converges; after convergence the
  // mean hovers under mutation noise, so a bit over half of all steps are
  // non-decreasing while every run ends far above its start.
  CHECK(improved_runs == seeds);
  CHECK(non_decreasing >= steps / 2);
}

TEST_CASE("a singleton feasible space is returned directly") {
  const ParameterSpace space({8}, {3}, {32}, {1});
  const SyntheticOracle oracle;
  const EvaluatorStack stack = oracle_stack(oracle, 1e7, 0.0);
  GaParams params;
  params.seed = 123;

  const OptimizationResult result =
      optimize(space, default_policy(), stack, params);
  CHECK(result.best == Configuration{8, 3, 32, 1});
  CHECK(result.flops == 966656.0);
}

TEST_CASE("a budget below the cheapest point raises the explicit error") {
  const SyntheticOracle oracle;
  const EvaluatorStack stack = oracle_stack(oracle, 7e5, 0.0);
  CHECK_THROWS_AS(
      optimize(default_space(), default_policy(), stack, GaParams{}),
      NoFeasibleConfiguration);
}

TEST_CASE("optimization is deterministic under its seed") {
  const SyntheticOracle oracle;
  const EvaluatorStack stack = oracle_stack(oracle, 1e7, -10.0);
  GaParams params;
  params.seed = 77;

  const OptimizationResult a =
      optimize(default_space(), default_policy(), stack, params);
  const OptimizationResult b =
      optimize(default_space(), default_policy(), stack, params);
  CHECK(a.best == b.best);
  CHECK(a.predicted_accuracy == b.predicted_accuracy);
  CHECK(a.flops == b.flops);
  CHECK(a.restart_index == b.restart_index);
  REQUIRE(a.history.size() == b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    CHECK(a.history[i] == b.history[i]);
  }
  CHECK(a.history.size() ==
        static_cast<std::size_t>(params.generations) + 1);
}

TEST_CASE("a uniform accuracy shift never changes the winner") {
  SyntheticOracle oracle;
  const EvaluatorStack stack = oracle_stack(oracle, 1e7, -10.0);
  GaParams params;
  params.seed = 5;
  const OptimizationResult base =
      optimize(default_space(), default_policy(), stack, params);

  SyntheticOracle shifted = oracle;
  shifted.floor_accuracy += 5.0;
  shifted.ceiling_accuracy += 5.0;
  const EvaluatorStack shifted_stack = oracle_stack(shifted, 1e7, -10.0);
  const OptimizationResult moved =
      optimize(default_space(), default_policy(), shifted_stack, params);

  CHECK(moved.best == base.best);
  CHECK(moved.predicted_accuracy ==
        doctest::Approx(base.predicted_accuracy + 5.0).epsilon(1e-12));
}

TEST_CASE("returned configurations always respect the budget") {
  const SyntheticOracle oracle;
  GaParams params;
  params.restarts = 2;
  params.generations = 15;

  Rng fuzz(99);
  for (int i = 0; i < 100; ++i) {
    const double budget = 1e5 + fuzz.uniform_unit() * (1e8 - 1e5);
    const double snr = -20.0 + fuzz.uniform_unit() * 45.0;
    params.seed = fuzz.next_u64();
    const EvaluatorStack stack = oracle_stack(oracle, budget, snr);
    try {
      const OptimizationResult result =
          optimize(default_space(), default_policy(), stack, params);
      const auto exact =
          device_flops(result.best, default_policy()).total;
      REQUIRE(static_cast<double>(exact) <= budget);
      REQUIRE(result.fitness.feasible());
    } catch (const NoFeasibleConfiguration&) {
      REQUIRE(static_cast<double>(min_device_flops(default_space(),
                                                   default_policy())) > budget);
    }
  }
}

TEST_CASE("the sentinel constraint mode also returns feasible winners") {
  const SyntheticOracle oracle;
  const EvaluatorStack stack = oracle_stack(oracle, 1e7, -10.0);
  GaParams params;
  params.constraint_handling = ConstraintHandling::kSentinel;
  params.seed = 31;

  const OptimizationResult result =
      optimize(default_space(), default_policy(), stack, params);
  CHECK(static_cast<double>(
            device_flops(result.best, default_policy()).total) <= 1e7);
}

TEST_CASE("ga parameter validation") {
  GaParams params;
  CHECK_NOTHROW(params.validate());
  params.population = 1;
  CHECK_THROWS_AS(params.validate(), std::invalid_argument);
  params = {};
  params.tournament = 21;
  CHECK_THROWS_AS(params.validate(), std::invalid_argument);
  params = {};
  params.crossover_prob = 1.5;
  CHECK_THROWS_AS(params.validate(), std::invalid_argument);
  params = {};
  params.mutation_prob = -0.1;
  CHECK_THROWS_AS(params.validate(), std::invalid_argument);
  params = {};
  params.restarts = 0;
  CHECK_THROWS_AS(params.validate(), std::invalid_argument);
}
