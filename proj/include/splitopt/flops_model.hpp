#pragma once

#include <cstdint>
#include <vector>

#include "splitopt/config_space.hpp"

namespace splitopt {

// Shape of one convolutional layer as it enters the cost model.
struct LayerShape {
  int kernel = 0;
  int in_channels = 0;
  int out_channels = 0;
  int height = 0;
  int width = 0;
};

// Device-side cost split into per-layer convolution counts plus the latent
// projection. total is always the sum of the parts.
struct FlopsBreakdown {
  std::vector<std::int64_t> per_layer;
  std::int64_t latent = 0;
  std::int64_t total = 0;
};

// 2 * k^2 * f_in * f_out * h * w, in checked 64-bit arithmetic. Counts only
// convolution multiply-adds: batch norm, activation, bias and pooling are
// intentionally excluded from the cost model.
std::int64_t conv_layer_flops(const LayerShape& shape);

// 2 * f_out * h * w * l_s for the fully connected latent projection.
std::int64_t latent_flops(int out_channels, int height, int width,
                          int latent_dim);

// Concrete shapes of the c.split device-side layers under the policy.
std::vector<LayerShape> expand_layers(const Configuration& c,
                                      const ArchPolicy& policy);

// Total device-side cost of a configuration: conv layers plus latent
// projection. Throws std::overflow_error if any count exceeds int64.
FlopsBreakdown device_flops(const Configuration& c, const ArchPolicy& policy);

// Minimum cost over the whole space: the f/k/l_s axes at their smallest
// values, scanned over the split axis.
std::int64_t min_device_flops(const ParameterSpace& space,
                              const ArchPolicy& policy);

}  // namespace splitopt
