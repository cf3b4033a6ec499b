#include "splitopt/config_space.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace splitopt {

namespace {

void check_axis(const std::vector<int>& axis, const char* name) {
  if (axis.empty()) {
    throw std::invalid_argument(std::string("axis '") + name +
                                "' must not be empty");
  }
  for (std::size_t i = 0; i < axis.size(); ++i) {
    if (axis[i] <= 0) {
      throw std::invalid_argument(std::string("axis '") + name +
                                  "' must contain positive values");
    }
    if (i > 0 && axis[i] <= axis[i - 1]) {
      throw std::invalid_argument(std::string("axis '") + name +
                                  "' must be strictly increasing");
    }
  }
}

bool axis_contains(const std::vector<int>& axis, int value) {
  return std::binary_search(axis.begin(), axis.end(), value);
}

}  // namespace

std::string to_string(const Configuration& c) {
  std::ostringstream out;
  out << "(f=" << c.filters << ", k=" << c.kernel << ", l_s=" << c.latent_dim
      << ", m=" << c.split << ")";
  return out.str();
}

ParameterSpace::ParameterSpace(std::vector<int> filters,
                               std::vector<int> kernels,
                               std::vector<int> latent_dims,
                               std::vector<int> splits)
    : filters_(std::move(filters)),
      kernels_(std::move(kernels)),
      latent_dims_(std::move(latent_dims)),
      splits_(std::move(splits)) {
  check_axis(filters_, "filters");
  check_axis(kernels_, "kernels");
  check_axis(latent_dims_, "latent_dims");
  check_axis(splits_, "splits");
}

ParameterSpace ParameterSpace::defaults() {
  return ParameterSpace({8, 16, 32, 64, 128, 256}, {2, 3, 4, 5, 6, 7, 8, 9},
                        {32, 64, 128, 256, 512}, {1, 2, 3, 4, 5, 6});
}

bool ParameterSpace::contains(const Configuration& c) const {
  return axis_contains(filters_, c.filters) &&
         axis_contains(kernels_, c.kernel) &&
         axis_contains(latent_dims_, c.latent_dim) &&
         axis_contains(splits_, c.split);
}

std::size_t ParameterSpace::size() const {
  std::size_t total = 1;
  for (const auto* axis : {&filters_, &kernels_, &latent_dims_, &splits_}) {
    const std::size_t n = axis->size();
    if (total > std::numeric_limits<std::size_t>::max() / n) {
      return std::numeric_limits<std::size_t>::max();
    }
    total *= n;
  }
  return total;
}

ParameterSpace ParameterSpace::with_splits(std::vector<int> splits) const {
  return ParameterSpace(filters_, kernels_, latent_dims_, std::move(splits));
}

std::string to_string(FilterProgression p) {
  return p == FilterProgression::kDoubling ? "doubling" : "fixed";
}

std::string to_string(SpatialPolicy p) {
  return p == SpatialPolicy::kConstant ? "constant" : "halving";
}

FilterProgression filter_progression_from_string(const std::string& s) {
  if (s == "doubling") return FilterProgression::kDoubling;
  if (s == "fixed") return FilterProgression::kFixed;
  throw std::invalid_argument("unknown filter_progression '" + s +
                              "' (expected doubling or fixed)");
}

SpatialPolicy spatial_policy_from_string(const std::string& s) {
  if (s == "constant") return SpatialPolicy::kConstant;
  if (s == "halving") return SpatialPolicy::kHalving;
  throw std::invalid_argument("unknown spatial_policy '" + s +
                              "' (expected constant or halving)");
}

void ArchPolicy::validate() const {
  if (input_height <= 0 || input_width <= 0 || input_channels <= 0) {
    throw std::invalid_argument("policy input dimensions must be positive");
  }
  if (total_blocks < 1) {
    throw std::invalid_argument("policy total_blocks must be at least 1");
  }
}

int ArchPolicy::out_channels(const Configuration& c, int layer) const {
  if (layer < 1 || layer > total_blocks) {
    throw std::invalid_argument("layer index out of range");
  }
  if (filter_progression == FilterProgression::kFixed) {
    return c.filters;
  }
  long long width = c.filters;
  for (int i = 1; i < layer; ++i) {
    width *= 2;
    if (width > std::numeric_limits<int>::max()) {
      throw std::overflow_error("filter progression overflows int");
    }
  }
  return static_cast<int>(width);
}

int ArchPolicy::in_channels(const Configuration& c, int layer) const {
  return layer == 1 ? input_channels : out_channels(c, layer - 1);
}

std::pair<int, int> ArchPolicy::feature_dims(int layer) const {
  if (layer < 1 || layer > total_blocks) {
    throw std::invalid_argument("layer index out of range");
  }
  if (spatial_policy == SpatialPolicy::kConstant) {
    return {input_height, input_width};
  }
  int h = input_height;
  int w = input_width;
  for (int i = 0; i < layer; ++i) {
    h = std::max(1, (h + 1) / 2);
    w = std::max(1, (w + 1) / 2);
  }
  return {h, w};
}

std::vector<Configuration> enumerate_space(const ParameterSpace& space) {
  std::vector<Configuration> out;
  out.reserve(space.size());
  for (int f : space.filters()) {
    for (int k : space.kernels()) {
      for (int l : space.latent_dims()) {
        for (int m : space.splits()) {
          out.push_back(Configuration{f, k, l, m});
        }
      }
    }
  }
  return out;
}

Configuration sample_uniform(const ParameterSpace& space, Rng& rng) {
  Configuration c;
  c.filters = space.filters()[rng.uniform_index(space.filters().size())];
  c.kernel = space.kernels()[rng.uniform_index(space.kernels().size())];
  c.latent_dim =
      space.latent_dims()[rng.uniform_index(space.latent_dims().size())];
  c.split = space.splits()[rng.uniform_index(space.splits().size())];
  return c;
}

Configuration mutate_one_axis(const Configuration& c,
                              const ParameterSpace& space, Rng& rng) {
  Configuration out = c;
  switch (rng.uniform_index(4)) {
    case 0:
      out.filters = space.filters()[rng.uniform_index(space.filters().size())];
      break;
    case 1:
      out.kernel = space.kernels()[rng.uniform_index(space.kernels().size())];
      break;
    case 2:
      out.latent_dim =
          space.latent_dims()[rng.uniform_index(space.latent_dims().size())];
      break;
    default:
      out.split = space.splits()[rng.uniform_index(space.splits().size())];
      break;
  }
  return out;
}

std::pair<Configuration, Configuration> uniform_crossover(
    const Configuration& a, const Configuration& b, Rng& rng) {
  Configuration x = a;
  Configuration y = b;
  if (rng.uniform_unit() < 0.5) std::swap(x.filters, y.filters);
  if (rng.uniform_unit() < 0.5) std::swap(x.kernel, y.kernel);
  if (rng.uniform_unit() < 0.5) std::swap(x.latent_dim, y.latent_dim);
  if (rng.uniform_unit() < 0.5) std::swap(x.split, y.split);
  return {x, y};
}

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<int> parse_int_list(const std::string& value,
                                const std::string& key) {
  std::vector<int> out;
  std::stringstream stream(value);
  std::string item;
  while (std::getline(stream, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      std::size_t consumed = 0;
      const int v = std::stoi(item, &consumed);
      if (consumed != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw std::invalid_argument("key '" + key + "': bad integer '" + item +
                                  "'");
    }
  }
  if (out.empty()) {
    throw std::invalid_argument("key '" + key + "': empty list");
  }
  return out;
}

int parse_int(const std::string& value, const std::string& key) {
  try {
    std::size_t consumed = 0;
    const int v = std::stoi(value, &consumed);
    if (consumed != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("key '" + key + "': bad integer '" + value +
                                "'");
  }
}

}  // namespace

SpaceConfig load_space_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config file: " + path.string());
  }

  SpaceConfig cfg;
  auto filters = cfg.space.filters();
  auto kernels = cfg.space.kernels();
  auto latent_dims = cfg.space.latent_dims();
  auto splits = cfg.space.splits();

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line.erase(comment);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    try {
      if (key == "filters") {
        filters = parse_int_list(value, key);
      } else if (key == "kernels") {
        kernels = parse_int_list(value, key);
      } else if (key == "latent_dims") {
        latent_dims = parse_int_list(value, key);
      } else if (key == "splits") {
        splits = parse_int_list(value, key);
      } else if (key == "input_hw") {
        const auto x = value.find('x');
        if (x == std::string::npos) {
          throw std::invalid_argument("expected HxW, e.g. 32x32");
        }
        cfg.policy.input_height = parse_int(trim(value.substr(0, x)), key);
        cfg.policy.input_width = parse_int(trim(value.substr(x + 1)), key);
      } else if (key == "input_channels") {
        cfg.policy.input_channels = parse_int(value, key);
      } else if (key == "total_blocks") {
        cfg.policy.total_blocks = parse_int(value, key);
      } else if (key == "filter_progression") {
        cfg.policy.filter_progression = filter_progression_from_string(value);
      } else if (key == "spatial_policy") {
        cfg.policy.spatial_policy = spatial_policy_from_string(value);
      } else {
        throw std::invalid_argument("unknown key '" + key + "'");
      }
    } catch (const std::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": " + e.what());
    }
  }

  cfg.space = ParameterSpace(std::move(filters), std::move(kernels),
                             std::move(latent_dims), std::move(splits));
  cfg.policy.validate();
  return cfg;
}

}  // namespace splitopt
