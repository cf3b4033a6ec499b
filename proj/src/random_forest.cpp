#include "splitopt/random_forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace splitopt {

std::string to_string(RegressionTarget t) {
  return t == RegressionTarget::kFlops ? "flops" : "accuracy";
}

RegressionTarget regression_target_from_string(const std::string& s) {
  if (s == "flops") return RegressionTarget::kFlops;
  if (s == "accuracy") return RegressionTarget::kAccuracy;
  throw std::invalid_argument("unknown regression target '" + s +
                              "' (expected flops or accuracy)");
}

std::vector<double> feature_vector(const Configuration& c, double snr_db,
                                   RegressionTarget target) {
  std::vector<double> x = {static_cast<double>(c.filters),
                           static_cast<double>(c.kernel),
                           static_cast<double>(c.latent_dim),
                           static_cast<double>(c.split)};
  if (target == RegressionTarget::kAccuracy) {
    x.push_back(snr_db);
  }
  return x;
}

std::vector<std::string> feature_names(RegressionTarget target) {
  std::vector<std::string> names = {"f", "k", "l_s", "m"};
  if (target == RegressionTarget::kAccuracy) {
    names.push_back("snr_db");
  }
  return names;
}

double RegressionTree::predict(std::span<const double> features) const {
  int node = 0;
  while (!nodes[node].is_leaf()) {
    const TreeNode& n = nodes[node];
    node = features[static_cast<std::size_t>(n.feature)] <= n.threshold
               ? n.left
               : n.right;
  }
  return nodes[node].value;
}

namespace {

struct TreeBuilder {
  const std::vector<std::vector<double>>& x;
  const std::vector<double>& y;
  const ForestHyperparams& hp;
  int feature_count;
  int features_per_split;
  Rng& rng;
  std::vector<TreeNode> nodes;

  // Scratch reused across nodes.
  std::vector<int> feature_pool;

  double node_mean(const std::vector<int>& idx) const {
    double sum = 0.0;
    for (int i : idx) sum += y[static_cast<std::size_t>(i)];
    return sum / static_cast<double>(idx.size());
  }

  double node_sse(const std::vector<int>& idx, double mean) const {
    double sse = 0.0;
    for (int i : idx) {
      const double d = y[static_cast<std::size_t>(i)] - mean;
      sse += d * d;
    }
    return sse;
  }

  int make_leaf(double mean) {
    TreeNode leaf;
    leaf.value = mean;
    nodes.push_back(leaf);
    return static_cast<int>(nodes.size()) - 1;
  }

  int build(std::vector<int> idx, int depth) {
    const double mean = node_mean(idx);
    const double sse = node_sse(idx, mean);
    const auto n = static_cast<int>(idx.size());

    if (depth >= hp.max_depth || n < 2 * hp.min_samples_leaf || sse == 0.0) {
      return make_leaf(mean);
    }

    // Candidate features for this node, evaluated in ascending order so
    // reduction ties resolve toward the lower feature index.
    feature_pool.resize(static_cast<std::size_t>(feature_count));
    std::iota(feature_pool.begin(), feature_pool.end(), 0);
    for (int i = 0; i < features_per_split; ++i) {
      const auto j =
          i + static_cast<int>(rng.uniform_index(
                  static_cast<std::size_t>(feature_count - i)));
      std::swap(feature_pool[static_cast<std::size_t>(i)],
                feature_pool[static_cast<std::size_t>(j)]);
    }
    std::vector<int> candidates(
        feature_pool.begin(), feature_pool.begin() + features_per_split);
    std::sort(candidates.begin(), candidates.end());

    int best_feature = -1;
    double best_threshold = 0.0;
    double best_reduction = 0.0;

    std::vector<int> sorted = idx;
    for (int feat : candidates) {
      const auto fu = static_cast<std::size_t>(feat);
      std::sort(sorted.begin(), sorted.end(), [&](int a, int b) {
        const double va = x[static_cast<std::size_t>(a)][fu];
        const double vb = x[static_cast<std::size_t>(b)][fu];
        return va != vb ? va < vb : a < b;
      });

      // Prefix sums over values centered at the node mean keep the
      // magnitudes proportional to the spread.
      double left_sum = 0.0;
      double left_sq = 0.0;
      double total_sum = 0.0;
      double total_sq = 0.0;
      for (int i : sorted) {
        const double z = y[static_cast<std::size_t>(i)] - mean;
        total_sum += z;
        total_sq += z * z;
      }

      for (int p = 1; p < n; ++p) {
        const double z =
            y[static_cast<std::size_t>(sorted[static_cast<std::size_t>(p - 1)])] -
            mean;
        left_sum += z;
        left_sq += z * z;

        const double prev = x[static_cast<std::size_t>(
            sorted[static_cast<std::size_t>(p - 1)])][fu];
        const double next =
            x[static_cast<std::size_t>(sorted[static_cast<std::size_t>(p)])][fu];
        if (prev == next) continue;
        if (p < hp.min_samples_leaf || n - p < hp.min_samples_leaf) continue;

        const double right_sum = total_sum - left_sum;
        const double right_sq = total_sq - left_sq;
        const double sse_left =
            left_sq - left_sum * left_sum / static_cast<double>(p);
        const double sse_right =
            right_sq - right_sum * right_sum / static_cast<double>(n - p);
        const double reduction = total_sq - (sse_left + sse_right);

        if (reduction > best_reduction) {
          best_reduction = reduction;
          best_feature = feat;
          best_threshold = (prev + next) / 2.0;
        }
      }
    }

    if (best_feature < 0) {
      return make_leaf(mean);
    }

    std::vector<int> left_idx;
    std::vector<int> right_idx;
    for (int i : idx) {
      const double v =
          x[static_cast<std::size_t>(i)][static_cast<std::size_t>(best_feature)];
      (v <= best_threshold ? left_idx : right_idx).push_back(i);
    }

    const auto self = static_cast<int>(nodes.size());
    nodes.emplace_back();
    nodes[static_cast<std::size_t>(self)].feature = best_feature;
    nodes[static_cast<std::size_t>(self)].threshold = best_threshold;
    const int left = build(std::move(left_idx), depth + 1);
    const int right = build(std::move(right_idx), depth + 1);
    nodes[static_cast<std::size_t>(self)].left = left;
    nodes[static_cast<std::size_t>(self)].right = right;
    return self;
  }
};

void validate_hyperparams(const ForestHyperparams& hp, int feature_count) {
  if (hp.n_trees < 1) throw std::invalid_argument("n_trees must be >= 1");
  if (hp.max_depth < 1) throw std::invalid_argument("max_depth must be >= 1");
  if (hp.min_samples_leaf < 1) {
    throw std::invalid_argument("min_samples_leaf must be >= 1");
  }
  if (hp.feature_subsample < 0 || hp.feature_subsample > feature_count) {
    throw std::invalid_argument("feature_subsample must be in [0, " +
                                std::to_string(feature_count) + "]");
  }
}

}  // namespace

double ForestModel::regression_value(const OfflineRecord& rec) const {
  return target_ == RegressionTarget::kFlops
             ? std::log(static_cast<double>(rec.flops))
             : rec.accuracy;
}

ForestModel ForestModel::fit(const OfflineDataset& train,
                             RegressionTarget target,
                             const ForestHyperparams& hp) {
  if (train.empty()) {
    throw std::invalid_argument("cannot fit a forest on an empty dataset");
  }

  ForestModel model;
  model.target_ = target;
  model.hp_ = hp;
  model.feature_count_ = feature_names(target).size();
  const auto d = static_cast<int>(model.feature_count_);
  validate_hyperparams(hp, d);

  const int features_per_split =
      hp.feature_subsample == 0
          ? static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))))
          : hp.feature_subsample;

  const std::size_t n = train.size();
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  x.reserve(n);
  y.reserve(n);
  for (const auto& rec : train.records()) {
    x.push_back(feature_vector(rec.config, rec.snr_db, target));
    const double value = model.regression_value(rec);
    if (!std::isfinite(value)) {
      throw std::invalid_argument("non-finite regression target");
    }
    y.push_back(value);
  }

  const Rng base(hp.seed);
  model.trees_.reserve(static_cast<std::size_t>(hp.n_trees));
  for (int t = 0; t < hp.n_trees; ++t) {
    Rng tree_rng = base.derive(static_cast<std::uint64_t>(t));

    std::vector<int> bootstrap(n);
    for (std::size_t i = 0; i < n; ++i) {
      bootstrap[i] = static_cast<int>(tree_rng.uniform_index(n));
    }

    TreeBuilder builder{x, y, hp, d, features_per_split, tree_rng, {}, {}};
    builder.build(std::move(bootstrap), 0);
    model.trees_.push_back(RegressionTree{std::move(builder.nodes)});
  }
  return model;
}

ForestModel ForestModel::from_parts(RegressionTarget target,
                                    const ForestHyperparams& hp,
                                    std::vector<RegressionTree> trees) {
  if (trees.empty()) {
    throw std::invalid_argument("forest must contain at least one tree");
  }
  ForestModel model;
  model.target_ = target;
  model.hp_ = hp;
  model.trees_ = std::move(trees);
  model.feature_count_ = feature_names(target).size();
  for (const auto& tree : model.trees_) {
    if (tree.nodes.empty()) {
      throw std::invalid_argument("tree without nodes");
    }
    for (const auto& node : tree.nodes) {
      if (node.is_leaf()) continue;
      const auto size = static_cast<int>(tree.nodes.size());
      if (node.feature >= static_cast<int>(model.feature_count_) ||
          node.left < 0 || node.left >= size || node.right < 0 ||
          node.right >= size) {
        throw std::invalid_argument("malformed tree node");
      }
    }
  }
  return model;
}

double ForestModel::ensemble_mean(std::span<const double> features) const {
  if (features.size() != feature_count_) {
    throw std::invalid_argument(
        "feature layout mismatch: expected " + std::to_string(feature_count_) +
        " features, got " + std::to_string(features.size()));
  }
  // Summing in sorted order makes the mean independent of tree order.
  std::vector<double> values;
  values.reserve(trees_.size());
  for (const auto& tree : trees_) {
    values.push_back(tree.predict(features));
  }
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double ForestModel::predict(std::span<const double> features) const {
  const double mean = ensemble_mean(features);
  return log_domain() ? std::exp(mean) : mean;
}

double ForestModel::predict(const Configuration& c, double snr_db) const {
  const auto features = feature_vector(c, snr_db, target_);
  return predict(features);
}

double ForestModel::r2_score(const OfflineDataset& test) const {
  if (test.empty()) {
    throw std::invalid_argument("cannot score on an empty dataset");
  }

  std::vector<double> targets;
  std::vector<double> predictions;
  targets.reserve(test.size());
  predictions.reserve(test.size());
  for (const auto& rec : test.records()) {
    targets.push_back(regression_value(rec));
    predictions.push_back(
        ensemble_mean(feature_vector(rec.config, rec.snr_db, target_)));
  }

  double mean = 0.0;
  for (double t : targets) mean += t;
  mean /= static_cast<double>(targets.size());

  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double r = targets[i] - predictions[i];
    const double d = targets[i] - mean;
    ss_res += r * r;
    ss_tot += d * d;
  }

  if (ss_tot == 0.0) {
    return ss_res == 0.0 ? 1.0 : -std::numeric_limits<double>::infinity();
  }
  return 1.0 - ss_res / ss_tot;
}

}  // namespace splitopt
