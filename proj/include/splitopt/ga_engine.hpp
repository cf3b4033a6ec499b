#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "splitopt/config_space.hpp"
#include "splitopt/offline_dataset.hpp"
#include "splitopt/random_forest.hpp"
#include "splitopt/rng.hpp"

namespace splitopt {

// How the search treats candidates that exceed the budget.
//   kResample: invalid candidates never enter the population; initial draws
//              and offspring that fail the budget screen are replaced with
//              fresh uniform draws (bounded retries). The population evolves
//              over valid configurations only.
//   kSentinel: invalid candidates stay in the population carrying the
//              (-inf, +inf) fitness and die out through selection.
enum class ConstraintHandling { kResample, kSentinel };

std::string to_string(ConstraintHandling c);
ConstraintHandling constraint_handling_from_string(const std::string& s);

struct GaParams {
  int population = 20;
  int generations = 50;
  int tournament = 3;
  double crossover_prob = 0.5;
  double mutation_prob = 0.2;
  int restarts = 10;
  std::uint64_t seed = 0;
  ConstraintHandling constraint_handling = ConstraintHandling::kResample;
  // Diagnostics only: additionally record the best individual ever
  // evaluated. Never changes the returned winner.
  bool track_best = false;

  void validate() const;
};

// Lexicographic fitness: higher primary (accuracy plus utilization reward)
// wins; equal primaries break toward the smaller budget gap. Configurations
// over budget carry exactly (-inf, +inf) and lose against any feasible one.
struct FitnessTuple {
  double primary = 0.0;
  double gap = 0.0;

  static FitnessTuple infeasible();
  bool feasible() const;

  friend bool operator==(const FitnessTuple&, const FitnessTuple&) = default;
};

bool fitness_greater(const FitnessTuple& a, const FitnessTuple& b);

// Reward in [0, 1] for consuming 90-100% of the budget; 0 below the knee.
// Exact at the anchors: 0 at 0.9*budget, 0.5 at 0.95*budget, 1 at budget.
double utilization(double flops, double budget);

enum class FlopsSource { kExact, kSurrogate };
enum class EvalSource { kDataset, kSurrogate };

std::string to_string(FlopsSource s);
FlopsSource flops_source_from_string(const std::string& s);
std::string to_string(EvalSource s);

struct Evaluation {
  double flops = 0.0;
  double accuracy = 0.0;
  FitnessTuple fitness;
  EvalSource source = EvalSource::kSurrogate;
};

using AccuracyFn = std::function<double(const Configuration&, double snr_db)>;

// Evaluation pipeline: exact dataset hits at (config, snr) are served first;
// everything else falls through to the configured cost source and accuracy
// estimator. The analytic cost model is the default cost source, so the
// budget screen is exact; the regressor source reproduces the surrogate
// pipeline at the price of an approximate screen.
struct EvaluatorStack {
  const OfflineDataset* dataset = nullptr;   // optional
  const ArchPolicy* policy = nullptr;        // required for kExact
  const ForestModel* flops_regressor = nullptr;  // required for kSurrogate
  AccuracyFn accuracy;                       // required
  FlopsSource flops_source = FlopsSource::kExact;
  double budget = 0.0;
  double snr_db = 0.0;

  void validate() const;

  // F(c) as the evaluator sees it (dataset value, exact model or regressor).
  double effective_flops(const Configuration& c) const;

  Evaluation evaluate(const Configuration& c) const;
};

// Best-of-T parent pick: draws tournament_size members without replacement
// and returns the index of the fitness maximum; ties keep the earliest draw.
std::size_t tournament_select(std::span<const FitnessTuple> fitness,
                              int tournament_size, Rng& rng);

// One generational update: tournament parents, pairwise uniform crossover
// with probability crossover_prob, one-axis mutation with probability
// mutation_prob. Under kResample, offspring over budget are replaced by
// fresh uniform draws that pass the screen. Output size equals input size.
std::vector<Configuration> step_generation(
    const std::vector<Configuration>& population,
    std::span<const FitnessTuple> fitness, const ParameterSpace& space,
    const EvaluatorStack& stack, const GaParams& params, Rng& rng);

struct TrackedBest {
  Configuration config;
  Evaluation eval;
};

struct OptimizationResult {
  Configuration best;
  double predicted_accuracy = 0.0;
  double flops = 0.0;
  FitnessTuple fitness;
  EvalSource source = EvalSource::kSurrogate;
  int restart_index = 0;
  // Best population fitness per generation of the winning restart
  // (entry 0 is the initial population).
  std::vector<FitnessTuple> history;
  // Highest-fitness individual seen across all restarts; only recorded
  // under GaParams::track_best.
  std::optional<TrackedBest> best_ever;
};

class NoFeasibleConfiguration : public std::runtime_error {
 public:
  explicit NoFeasibleConfiguration(const std::string& what)
      : std::runtime_error(what) {}
};

// Runs params.restarts independent searches (streams derived from
// params.seed) and picks the winner: within each final population the
// highest predicted accuracy with ties broken by the smaller budget gap,
// and the same rule across restarts. Throws NoFeasibleConfiguration when
// the cheapest corner of the space already exceeds the budget, or when no
// restart surfaced a feasible candidate.
OptimizationResult optimize(const ParameterSpace& space,
                            const ArchPolicy& policy,
                            const EvaluatorStack& stack,
                            const GaParams& params);

}  // namespace splitopt
