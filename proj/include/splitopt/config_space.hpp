#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "splitopt/rng.hpp"

namespace splitopt {

// One point of the discrete search space: base filter count f, kernel size k,
// latent dimension l_s, and the number of blocks executed on the device m.
struct Configuration {
  int filters = 0;
  int kernel = 0;
  int latent_dim = 0;
  int split = 0;

  friend bool operator==(const Configuration&, const Configuration&) = default;
};

std::string to_string(const Configuration& c);

// Discrete axes of allowed values. Validated on construction: every axis is
// non-empty, strictly increasing and positive.
class ParameterSpace {
 public:
  ParameterSpace(std::vector<int> filters, std::vector<int> kernels,
                 std::vector<int> latent_dims, std::vector<int> splits);

  // f in {8..256}, k in {2..9}, l_s in {32..512}, m in {1..6}.
  static ParameterSpace defaults();

  const std::vector<int>& filters() const { return filters_; }
  const std::vector<int>& kernels() const { return kernels_; }
  const std::vector<int>& latent_dims() const { return latent_dims_; }
  const std::vector<int>& splits() const { return splits_; }

  bool contains(const Configuration& c) const;

  // Product of axis cardinalities (saturates at SIZE_MAX).
  std::size_t size() const;

  // Same space with the splits axis replaced (used by per-layer sweeps).
  ParameterSpace with_splits(std::vector<int> splits) const;

 private:
  std::vector<int> filters_;
  std::vector<int> kernels_;
  std::vector<int> latent_dims_;
  std::vector<int> splits_;
};

enum class FilterProgression { kDoubling, kFixed };
enum class SpatialPolicy { kConstant, kHalving };

std::string to_string(FilterProgression p);
std::string to_string(SpatialPolicy p);
FilterProgression filter_progression_from_string(const std::string& s);
SpatialPolicy spatial_policy_from_string(const std::string& s);

// Rules that expand a Configuration into concrete per-layer shapes on the
// device side. The doubling progression widens the filter count by 2x per
// layer starting from f; the constant spatial policy keeps feature maps at
// the input resolution, the halving policy shrinks them 2x per layer
// (clamped at 1 pixel).
struct ArchPolicy {
  int input_height = 32;
  int input_width = 32;
  int input_channels = 3;
  int total_blocks = 6;
  FilterProgression filter_progression = FilterProgression::kDoubling;
  SpatialPolicy spatial_policy = SpatialPolicy::kConstant;

  void validate() const;

  // Layer indices are 1-based; layer must not exceed total_blocks.
  int out_channels(const Configuration& c, int layer) const;
  int in_channels(const Configuration& c, int layer) const;
  std::pair<int, int> feature_dims(int layer) const;  // {height, width}
};

// Channel SNR grid used when no explicit grid is given (dB).
inline constexpr std::array<double, 10> kDefaultSnrGridDb = {
    -20.0, -15.0, -10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0};

// Full Cartesian product in axis order (filters slowest, splits fastest).
std::vector<Configuration> enumerate_space(const ParameterSpace& space);

// Each axis value drawn independently and uniformly.
Configuration sample_uniform(const ParameterSpace& space, Rng& rng);

// Picks one axis uniformly and redraws its value uniformly from that axis;
// the redraw may return the current value.
Configuration mutate_one_axis(const Configuration& c,
                              const ParameterSpace& space, Rng& rng);

// Swaps each axis between the two children with probability 1/2.
std::pair<Configuration, Configuration> uniform_crossover(
    const Configuration& a, const Configuration& b, Rng& rng);

// Declarative key/value config file for the space and policy. Recognized
// keys: filters, kernels, latent_dims, splits, input_hw, input_channels,
// total_blocks, filter_progression, spatial_policy. Missing keys fall back
// to defaults; unknown keys are an error.
struct SpaceConfig {
  ParameterSpace space = ParameterSpace::defaults();
  ArchPolicy policy;
};

SpaceConfig load_space_config(const std::filesystem::path& path);

}  // namespace splitopt
