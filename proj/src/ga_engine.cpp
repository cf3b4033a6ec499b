#include "splitopt/ga_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "splitopt/flops_model.hpp"

namespace splitopt {

namespace {

constexpr int kResampleTries = 100;

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

std::string to_string(ConstraintHandling c) {
  return c == ConstraintHandling::kResample ? "resample" : "sentinel";
}

ConstraintHandling constraint_handling_from_string(const std::string& s) {
  if (s == "resample") return ConstraintHandling::kResample;
  if (s == "sentinel") return ConstraintHandling::kSentinel;
  throw std::invalid_argument("unknown constraint handling '" + s +
                              "' (expected resample or sentinel)");
}

void GaParams::validate() const {
  if (population < 2) throw std::invalid_argument("population must be >= 2");
  if (generations < 1) throw std::invalid_argument("generations must be >= 1");
  if (tournament < 2 || tournament > population) {
    throw std::invalid_argument("tournament size must be in [2, population]");
  }
  if (!(crossover_prob >= 0.0 && crossover_prob <= 1.0)) {
    throw std::invalid_argument("crossover_prob must be in [0, 1]");
  }
  if (!(mutation_prob >= 0.0 && mutation_prob <= 1.0)) {
    throw std::invalid_argument("mutation_prob must be in [0, 1]");
  }
  if (restarts < 1) throw std::invalid_argument("restarts must be >= 1");
}

FitnessTuple FitnessTuple::infeasible() { return FitnessTuple{-kInf, kInf}; }

bool FitnessTuple::feasible() const { return std::isfinite(primary); }

bool fitness_greater(const FitnessTuple& a, const FitnessTuple& b) {
  if (a.primary != b.primary) return a.primary > b.primary;
  return a.gap < b.gap;
}

double utilization(double flops, double budget) {
  if (!(budget > 0.0)) {
    throw std::invalid_argument("budget must be positive");
  }
  // (10F - 9B)/B instead of (F - 0.9B)/(0.1B): for integer-valued doubles
  // the three anchor ratios 0.9, 0.95 and 1.0 then evaluate exactly.
  return std::max(0.0, (10.0 * flops - 9.0 * budget) / budget);
}

std::string to_string(FlopsSource s) {
  return s == FlopsSource::kExact ? "exact" : "surrogate";
}

FlopsSource flops_source_from_string(const std::string& s) {
  if (s == "exact") return FlopsSource::kExact;
  if (s == "surrogate") return FlopsSource::kSurrogate;
  throw std::invalid_argument("unknown flops source '" + s +
                              "' (expected exact or surrogate)");
}

std::string to_string(EvalSource s) {
  return s == EvalSource::kDataset ? "dataset" : "surrogate";
}

void EvaluatorStack::validate() const {
  if (!(budget > 0.0)) {
    throw std::invalid_argument("budget must be positive");
  }
  if (flops_source == FlopsSource::kExact && policy == nullptr) {
    throw std::invalid_argument("exact cost source needs an ArchPolicy");
  }
  if (flops_source == FlopsSource::kSurrogate) {
    if (flops_regressor == nullptr) {
      throw std::invalid_argument("surrogate cost source needs a model");
    }
    if (flops_regressor->target() != RegressionTarget::kFlops) {
      throw std::invalid_argument("cost regressor has the wrong target");
    }
  }
  if (!accuracy) {
    throw std::invalid_argument("accuracy estimator missing");
  }
}

double EvaluatorStack::effective_flops(const Configuration& c) const {
  if (dataset != nullptr) {
    if (const OfflineRecord* rec = dataset->lookup(c, snr_db)) {
      return static_cast<double>(rec->flops);
    }
  }
  if (flops_source == FlopsSource::kExact) {
    return static_cast<double>(device_flops(c, *policy).total);
  }
  return flops_regressor->predict(c, snr_db);
}

Evaluation EvaluatorStack::evaluate(const Configuration& c) const {
  Evaluation eval;
  if (dataset != nullptr) {
    if (const OfflineRecord* rec = dataset->lookup(c, snr_db)) {
      eval.flops = static_cast<double>(rec->flops);
      eval.accuracy = rec->accuracy;
      eval.source = EvalSource::kDataset;
    }
  }
  if (eval.source != EvalSource::kDataset) {
    eval.flops = flops_source == FlopsSource::kExact
                     ? static_cast<double>(device_flops(c, *policy).total)
                     : flops_regressor->predict(c, snr_db);
    eval.accuracy = accuracy(c, snr_db);
    eval.source = EvalSource::kSurrogate;
  }

  if (eval.flops > budget) {
    eval.fitness = FitnessTuple::infeasible();
  } else {
    eval.fitness =
        FitnessTuple{eval.accuracy + utilization(eval.flops, budget),
                     budget - eval.flops};
  }
  return eval;
}

std::size_t tournament_select(std::span<const FitnessTuple> fitness,
                              int tournament_size, Rng& rng) {
  const std::size_t n = fitness.size();
  if (n == 0) throw std::invalid_argument("empty population");
  if (tournament_size < 1 || static_cast<std::size_t>(tournament_size) > n) {
    throw std::invalid_argument("tournament size out of range");
  }

  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), 0);

  std::size_t best = 0;
  for (int j = 0; j < tournament_size; ++j) {
    const std::size_t pick =
        static_cast<std::size_t>(j) +
        rng.uniform_index(n - static_cast<std::size_t>(j));
    std::swap(pool[static_cast<std::size_t>(j)], pool[pick]);
    const std::size_t idx = pool[static_cast<std::size_t>(j)];
    if (j == 0 || fitness_greater(fitness[idx], fitness[best])) {
      best = idx;
    }
  }
  return best;
}

namespace {

// Uniform draw, rejecting over-budget configurations for a bounded number
// of tries. The last draw is kept even if it failed the screen; the
// sentinel fitness still covers that case.
Configuration draw_screened(const ParameterSpace& space,
                            const EvaluatorStack& stack, Rng& rng) {
  Configuration c = sample_uniform(space, rng);
  for (int t = 0; t < kResampleTries; ++t) {
    if (stack.effective_flops(c) <= stack.budget) break;
    c = sample_uniform(space, rng);
  }
  return c;
}

std::vector<Evaluation> evaluate_population(
    const std::vector<Configuration>& population,
    const EvaluatorStack& stack) {
  std::vector<Evaluation> evals;
  evals.reserve(population.size());
  for (const Configuration& c : population) {
    evals.push_back(stack.evaluate(c));
  }
  return evals;
}

FitnessTuple best_fitness(const std::vector<Evaluation>& evals) {
  FitnessTuple best = evals.front().fitness;
  for (const Evaluation& e : evals) {
    if (fitness_greater(e.fitness, best)) best = e.fitness;
  }
  return best;
}

}  // namespace

std::vector<Configuration> step_generation(
    const std::vector<Configuration>& population,
    std::span<const FitnessTuple> fitness, const ParameterSpace& space,
    const EvaluatorStack& stack, const GaParams& params, Rng& rng) {
  const std::size_t v = population.size();
  if (fitness.size() != v) {
    throw std::invalid_argument("fitness/population size mismatch");
  }

  std::vector<Configuration> offspring;
  offspring.reserve(v);
  for (std::size_t i = 0; i < v; ++i) {
    offspring.push_back(
        population[tournament_select(fitness, params.tournament, rng)]);
  }

  for (std::size_t i = 0; i + 1 < v; i += 2) {
    if (rng.uniform_unit() < params.crossover_prob) {
      const auto [a, b] = uniform_crossover(offspring[i], offspring[i + 1], rng);
      offspring[i] = a;
      offspring[i + 1] = b;
    }
  }

  for (Configuration& child : offspring) {
    if (rng.uniform_unit() < params.mutation_prob) {
      child = mutate_one_axis(child, space, rng);
    }
  }

  if (params.constraint_handling == ConstraintHandling::kResample) {
    for (Configuration& child : offspring) {
      if (stack.effective_flops(child) > stack.budget) {
        child = draw_screened(space, stack, rng);
      }
    }
  }

  return offspring;
}

OptimizationResult optimize(const ParameterSpace& space,
                            const ArchPolicy& policy,
                            const EvaluatorStack& stack,
                            const GaParams& params) {
  params.validate();
  stack.validate();

  // The analytic minimum over the space certifies whether any configuration
  // can fit the budget at all.
  const std::int64_t cheapest = min_device_flops(space, policy);
  if (static_cast<double>(cheapest) > stack.budget) {
    throw NoFeasibleConfiguration(
        "no feasible configuration: the cheapest point of the space needs " +
        std::to_string(cheapest) + " FLOPs, over the budget");
  }

  bool have_winner = false;
  OptimizationResult winner;
  std::optional<TrackedBest> best_ever;
  const auto track = [&](const std::vector<Configuration>& population,
                         const std::vector<Evaluation>& evals) {
    if (!params.track_best) return;
    for (std::size_t i = 0; i < population.size(); ++i) {
      if (!best_ever.has_value() ||
          fitness_greater(evals[i].fitness, best_ever->eval.fitness)) {
        best_ever = TrackedBest{population[i], evals[i]};
      }
    }
  };

  for (int r = 0; r < params.restarts; ++r) {
    Rng rng(Rng::mix(params.seed, static_cast<std::uint64_t>(r)));

    std::vector<Configuration> population;
    population.reserve(static_cast<std::size_t>(params.population));
    for (int i = 0; i < params.population; ++i) {
      population.push_back(
          params.constraint_handling == ConstraintHandling::kResample
              ? draw_screened(space, stack, rng)
              : sample_uniform(space, rng));
    }

    std::vector<Evaluation> evals = evaluate_population(population, stack);
    std::vector<FitnessTuple> history;
    history.reserve(static_cast<std::size_t>(params.generations) + 1);
    history.push_back(best_fitness(evals));
    track(population, evals);

    std::vector<FitnessTuple> fitness(population.size());
    for (int g = 0; g < params.generations; ++g) {
      for (std::size_t i = 0; i < evals.size(); ++i) {
        fitness[i] = evals[i].fitness;
      }
      population =
          step_generation(population, fitness, space, stack, params, rng);
      evals = evaluate_population(population, stack);
      history.push_back(best_fitness(evals));
      track(population, evals);
    }

    // Final pick inside this restart: highest predicted accuracy among the
    // feasible members, ties toward the smaller budget gap.
    int pick = -1;
    for (std::size_t i = 0; i < population.size(); ++i) {
      if (!evals[i].fitness.feasible()) continue;
      if (pick < 0 ||
          evals[i].accuracy > evals[static_cast<std::size_t>(pick)].accuracy ||
          (evals[i].accuracy ==
               evals[static_cast<std::size_t>(pick)].accuracy &&
           evals[i].fitness.gap <
               evals[static_cast<std::size_t>(pick)].fitness.gap)) {
        pick = static_cast<int>(i);
      }
    }
    if (pick < 0) continue;

    const Evaluation& eval = evals[static_cast<std::size_t>(pick)];
    const bool better =
        !have_winner || eval.accuracy > winner.predicted_accuracy ||
        (eval.accuracy == winner.predicted_accuracy &&
         eval.fitness.gap < winner.fitness.gap);
    if (better) {
      have_winner = true;
      winner.best = population[static_cast<std::size_t>(pick)];
      winner.predicted_accuracy = eval.accuracy;
      winner.flops = eval.flops;
      winner.fitness = eval.fitness;
      winner.source = eval.source;
      winner.restart_index = r;
      winner.history = std::move(history);
    }
  }

  if (!have_winner) {
    throw NoFeasibleConfiguration(
        "no feasible configuration surfaced in any restart");
  }
  winner.best_ever = std::move(best_ever);
  return winner;
}

}  // namespace splitopt
