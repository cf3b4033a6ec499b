#include "splitopt/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "splitopt/flops_model.hpp"

namespace splitopt {

void SyntheticOracle::validate() const {
  if (!(floor_accuracy < ceiling_accuracy)) {
    throw std::invalid_argument("oracle floor must be below the ceiling");
  }
  if (!(snr_scale_db > 0.0) || !(depth_gain > 0.0) ||
      !(capacity_scale_flops > 0.0)) {
    throw std::invalid_argument("oracle scales must be positive");
  }
  if (noise_sd < 0.0) {
    throw std::invalid_argument("oracle noise_sd must be non-negative");
  }
}

double SyntheticOracle::accuracy(const Configuration& c, double snr_db,
                                 const ArchPolicy& policy) const {
  validate();
  const auto flops = static_cast<double>(device_flops(c, policy).total);
  const double snr_factor = 1.0 / (1.0 + std::exp(-snr_db / snr_scale_db));
  const double depth_factor =
      1.0 - std::exp(-depth_gain * static_cast<double>(c.split));
  const double capacity_factor = 1.0 - std::exp(-flops / capacity_scale_flops);
  double value = floor_accuracy + (ceiling_accuracy - floor_accuracy) *
                                      snr_factor * depth_factor *
                                      capacity_factor;
  if (noise_sd > 0.0) {
    // Noise keyed by (seed, config, snr) so the surface stays a function.
    std::uint64_t h = Rng::mix(seed, static_cast<std::uint64_t>(c.filters));
    h = Rng::mix(h, static_cast<std::uint64_t>(c.kernel));
    h = Rng::mix(h, static_cast<std::uint64_t>(c.latent_dim));
    h = Rng::mix(h, static_cast<std::uint64_t>(c.split));
    h = Rng::mix(h, static_cast<std::uint64_t>(OfflineDataset::snr_key(snr_db)));
    Rng noise_rng(h);
    value += noise_sd * noise_rng.gaussian();
  }
  return std::clamp(value, 0.0, 100.0);
}

AccuracyFn SyntheticOracle::as_accuracy_fn(const ArchPolicy& policy) const {
  return [oracle = *this, policy](const Configuration& c, double snr_db) {
    return oracle.accuracy(c, snr_db, policy);
  };
}

BruteForceResult brute_force_optimize(const ParameterSpace& space,
                                      const ArchPolicy& policy,
                                      const EvaluatorStack& stack,
                                      std::size_t guard) {
  stack.validate();
  policy.validate();
  if (space.size() > guard) {
    throw std::invalid_argument("space has " + std::to_string(space.size()) +
                                " points, over the exhaustive-scan guard of " +
                                std::to_string(guard));
  }

  BruteForceResult result;
  bool have_best = false;
  for (const Configuration& c : enumerate_space(space)) {
    const Evaluation eval = stack.evaluate(c);
    ++result.evaluated_count;
    if (eval.fitness.feasible()) ++result.feasible_count;
    if (!have_best || fitness_greater(eval.fitness, result.best_eval.fitness)) {
      have_best = true;
      result.best = c;
      result.best_eval = eval;
    }
  }
  return result;
}

std::int64_t loop_count_conv(const LayerShape& shape) {
  std::int64_t count = 0;
  for (int oy = 0; oy < shape.height; ++oy) {
    for (int ox = 0; ox < shape.width; ++ox) {
      for (int oc = 0; oc < shape.out_channels; ++oc) {
        for (int ic = 0; ic < shape.in_channels; ++ic) {
          for (int ky = 0; ky < shape.kernel; ++ky) {
            for (int kx = 0; kx < shape.kernel; ++kx) {
              count += 2;
            }
          }
        }
      }
    }
  }
  return count;
}

std::int64_t loop_count_latent(int out_channels, int height, int width,
                               int latent_dim) {
  std::int64_t count = 0;
  for (int unit = 0; unit < latent_dim; ++unit) {
    for (int oc = 0; oc < out_channels; ++oc) {
      for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
          count += 2;
        }
      }
    }
  }
  return count;
}

std::int64_t independent_flops_count(const Configuration& c,
                                     const ArchPolicy& policy) {
  const auto layers = expand_layers(c, policy);
  std::int64_t count = 0;
  for (const LayerShape& layer : layers) {
    count += loop_count_conv(layer);
  }
  const LayerShape& last = layers.back();
  count += loop_count_latent(last.out_channels, last.height, last.width,
                             c.latent_dim);
  return count;
}

OfflineDataset generate_corpus(const ParameterSpace& space,
                               const ArchPolicy& policy,
                               const SyntheticOracle& oracle,
                               std::span<const double> snr_grid_db,
                               std::size_t sample_count,
                               bool one_snr_per_config, Rng& rng) {
  oracle.validate();
  policy.validate();
  if (snr_grid_db.empty()) {
    throw std::invalid_argument("snr grid must be non-empty");
  }
  const auto all = enumerate_space(space);
  if (sample_count == 0 || sample_count > all.size()) {
    throw std::invalid_argument("sample_count must be in [1, " +
                                std::to_string(all.size()) + "]");
  }

  // Partial shuffle picks distinct configurations; sorting the picks keeps
  // the emitted corpus in enumeration order.
  std::vector<std::size_t> order(all.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = 0; i < sample_count; ++i) {
    const std::size_t j = i + rng.uniform_index(order.size() - i);
    std::swap(order[i], order[j]);
  }
  std::vector<std::size_t> picks(order.begin(),
                                 order.begin() + static_cast<std::ptrdiff_t>(
                                                     sample_count));
  std::sort(picks.begin(), picks.end());

  std::vector<OfflineRecord> records;
  records.reserve(one_snr_per_config ? sample_count
                                     : sample_count * snr_grid_db.size());
  for (const std::size_t pick : picks) {
    const Configuration& c = all[pick];
    const std::int64_t flops = device_flops(c, policy).total;
    if (one_snr_per_config) {
      const double snr = snr_grid_db[rng.uniform_index(snr_grid_db.size())];
      records.push_back(
          OfflineRecord{c, snr, flops, oracle.accuracy(c, snr, policy)});
    } else {
      for (const double snr : snr_grid_db) {
        records.push_back(
            OfflineRecord{c, snr, flops, oracle.accuracy(c, snr, policy)});
      }
    }
  }
  return OfflineDataset::from_records(std::move(records), space);
}

}  // namespace splitopt
