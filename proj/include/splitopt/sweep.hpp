#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "splitopt/config_space.hpp"
#include "splitopt/ga_engine.hpp"

namespace splitopt {

enum class SweepAxis { kBudget, kSnr, kLayers };

std::string to_string(SweepAxis a);
SweepAxis sweep_axis_from_string(const std::string& s);

struct SweepSpec {
  SweepAxis axis = SweepAxis::kBudget;
  std::vector<double> points;  // non-empty, strictly increasing
  double fixed_budget = 0.0;   // used unless axis == kBudget
  double fixed_snr = 0.0;      // used unless axis == kSnr

  void validate() const;
};

struct SweepPointOutcome {
  double axis_value = 0.0;
  bool feasible = false;
  OptimizationResult result;  // meaningful only when feasible
};

struct SweepReport {
  SweepSpec spec;
  std::vector<SweepPointOutcome> points;
};

// Runs one optimization per sweep point. Budget sweeps vary the budget at
// the fixed SNR, SNR sweeps the reverse. Layer sweeps pin the split axis to
// the point value (which must be a member of the splits axis) with both
// budget and SNR fixed. Every point uses the same GA seed, so a single-point
// sweep reproduces a direct optimize call. Points with no feasible
// configuration are recorded, not fatal. jobs > 1 runs points in parallel;
// the report order is always the spec order.
SweepReport run_sweep(const SweepSpec& spec, const ParameterSpace& space,
                      const ArchPolicy& policy, const EvaluatorStack& base,
                      const GaParams& params, int jobs = 1);

// Plot-ready table, one row per point:
//   axis_value,f,k,l_s,m,flops,accuracy
// Infeasible points keep the axis value and leave the other columns empty.
void write_sweep_csv(const SweepReport& report, std::ostream& out);

// Cost-versus-depth table (header "m,flops") for a fixed f, k, l_s.
void write_layers_flops_csv(const ParameterSpace& space,
                            const ArchPolicy& policy, int filters, int kernel,
                            int latent_dim, std::ostream& out);

}  // namespace splitopt
