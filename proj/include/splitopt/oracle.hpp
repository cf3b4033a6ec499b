#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "splitopt/config_space.hpp"
#include "splitopt/flops_model.hpp"
#include "splitopt/ga_engine.hpp"
#include "splitopt/offline_dataset.hpp"
#include "splitopt/rng.hpp"

namespace splitopt {

// Closed-form stand-in for a trained classifier's accuracy surface:
//
//   a = floor + (ceiling - floor) * logistic(snr/snr_scale)
//                                 * (1 - exp(-depth_gain * m))
//                                 * (1 - exp(-device_flops / capacity_scale))
//
// plus optional seeded gaussian noise, clipped to [0, 100]. Noise is a pure
// function of (seed, config, snr), so repeated calls agree. With zero noise
// the surface is strictly increasing in SNR, in the split depth and in the
// device cost. The default constants are arbitrary desk-scale choices, not
// measurements.
struct SyntheticOracle {
  double floor_accuracy = 10.0;
  double ceiling_accuracy = 90.0;
  double snr_scale_db = 10.0;
  double depth_gain = 0.5;
  double capacity_scale_flops = 1e7;
  double noise_sd = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
  double accuracy(const Configuration& c, double snr_db,
                  const ArchPolicy& policy) const;

  AccuracyFn as_accuracy_fn(const ArchPolicy& policy) const;
};

struct BruteForceResult {
  Configuration best;
  Evaluation best_eval;
  std::size_t feasible_count = 0;
  std::size_t evaluated_count = 0;
};

// Exhaustive scan of the whole space with the same evaluate() the search
// uses, so any disagreement with the search is a search-quality gap, never
// a scoring one. Refuses spaces above the guard size.
BruteForceResult brute_force_optimize(const ParameterSpace& space,
                                      const ArchPolicy& policy,
                                      const EvaluatorStack& stack,
                                      std::size_t guard = 1000000);

// Operational cost count: walks explicit loop nests over output positions,
// channels and kernel taps, adding 2 per multiply-accumulate, with no
// closed-form shortcuts. Exists solely to cross-check the analytic model.
std::int64_t loop_count_conv(const LayerShape& shape);
std::int64_t loop_count_latent(int out_channels, int height, int width,
                               int latent_dim);
std::int64_t independent_flops_count(const Configuration& c,
                                     const ArchPolicy& policy);

// Samples sample_count distinct configurations (kept in enumeration order)
// and records exact cost plus oracle accuracy. With one_snr_per_config a
// single random grid SNR is drawn per configuration; otherwise every grid
// SNR produces a row.
OfflineDataset generate_corpus(const ParameterSpace& space,
                               const ArchPolicy& policy,
                               const SyntheticOracle& oracle,
                               std::span<const double> snr_grid_db,
                               std::size_t sample_count,
                               bool one_snr_per_config, Rng& rng);

}  // namespace splitopt
