#include "splitopt/flops_model.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace splitopt {

namespace {

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) {
    throw std::overflow_error("flops count overflows 64-bit integer");
  }
  return out;
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_add_overflow(a, b, &out)) {
    throw std::overflow_error("flops count overflows 64-bit integer");
  }
  return out;
}

void check_positive(std::int64_t v, const char* name) {
  if (v <= 0) {
    throw std::invalid_argument(std::string(name) + " must be positive");
  }
}

}  // namespace

std::int64_t conv_layer_flops(const LayerShape& shape) {
  check_positive(shape.kernel, "kernel");
  check_positive(shape.in_channels, "in_channels");
  check_positive(shape.out_channels, "out_channels");
  check_positive(shape.height, "height");
  check_positive(shape.width, "width");

  std::int64_t flops = checked_mul(shape.kernel, shape.kernel);
  flops = checked_mul(flops, shape.in_channels);
  flops = checked_mul(flops, shape.out_channels);
  flops = checked_mul(flops, shape.height);
  flops = checked_mul(flops, shape.width);
  return checked_mul(flops, 2);
}

std::int64_t latent_flops(int out_channels, int height, int width,
                          int latent_dim) {
  check_positive(out_channels, "out_channels");
  check_positive(height, "height");
  check_positive(width, "width");
  check_positive(latent_dim, "latent_dim");

  std::int64_t flops = checked_mul(out_channels, height);
  flops = checked_mul(flops, width);
  flops = checked_mul(flops, latent_dim);
  return checked_mul(flops, 2);
}

std::vector<LayerShape> expand_layers(const Configuration& c,
                                      const ArchPolicy& policy) {
  policy.validate();
  if (c.split < 1 || c.split > policy.total_blocks) {
    throw std::invalid_argument("split " + std::to_string(c.split) +
                                " outside [1, " +
                                std::to_string(policy.total_blocks) + "]");
  }
  std::vector<LayerShape> layers;
  layers.reserve(static_cast<std::size_t>(c.split));
  for (int i = 1; i <= c.split; ++i) {
    const auto [h, w] = policy.feature_dims(i);
    layers.push_back(LayerShape{c.kernel, policy.in_channels(c, i),
                                policy.out_channels(c, i), h, w});
  }
  return layers;
}

FlopsBreakdown device_flops(const Configuration& c, const ArchPolicy& policy) {
  const auto layers = expand_layers(c, policy);

  FlopsBreakdown breakdown;
  breakdown.per_layer.reserve(layers.size());
  std::int64_t total = 0;
  for (const auto& layer : layers) {
    const std::int64_t flops = conv_layer_flops(layer);
    breakdown.per_layer.push_back(flops);
    total = checked_add(total, flops);
  }

  const LayerShape& last = layers.back();
  breakdown.latent =
      latent_flops(last.out_channels, last.height, last.width, c.latent_dim);
  breakdown.total = checked_add(total, breakdown.latent);
  return breakdown;
}

std::int64_t min_device_flops(const ParameterSpace& space,
                              const ArchPolicy& policy) {
  // Cost is strictly increasing in f, k and l_s under both spatial policies,
  // but not necessarily in m (a halving policy shrinks the latent projection
  // with depth), so the split axis is scanned.
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  for (const int split : space.splits()) {
    const Configuration c{space.filters().front(), space.kernels().front(),
                          space.latent_dims().front(), split};
    best = std::min(best, device_flops(c, policy).total);
  }
  return best;
}

}  // namespace splitopt
