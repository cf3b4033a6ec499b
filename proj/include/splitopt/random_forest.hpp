#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "splitopt/config_space.hpp"
#include "splitopt/offline_dataset.hpp"

namespace splitopt {

enum class RegressionTarget { kFlops, kAccuracy };

std::string to_string(RegressionTarget t);
RegressionTarget regression_target_from_string(const std::string& s);

// Fixed feature layouts. The cost model depends only on the configuration;
// the accuracy model additionally sees the channel SNR.
//   kFlops:    {f, k, l_s, m}
//   kAccuracy: {f, k, l_s, m, snr_db}
std::vector<double> feature_vector(const Configuration& c, double snr_db,
                                   RegressionTarget target);
std::vector<std::string> feature_names(RegressionTarget target);

struct ForestHyperparams {
  int n_trees = 100;
  int max_depth = 12;
  int min_samples_leaf = 2;
  // Features examined per split; 0 selects ceil(sqrt(feature count)).
  int feature_subsample = 0;
  std::uint64_t seed = 0;
};

// Flat node storage; feature < 0 marks a leaf carrying the prediction.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool is_leaf() const { return feature < 0; }
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(std::span<const double> features) const;
};

// Bootstrap-aggregated regression trees grown by greedy variance-reduction
// splits. Splits fall on midpoints between consecutive sorted feature
// values; ties in reduction break toward the lower feature index, then the
// lower threshold. Growth stops at max_depth, min_samples_leaf or a
// zero-variance node. Fitting is deterministic under the hyperparameter
// seed (per-tree streams are derived from (seed, tree index)).
//
// The cost target spans many orders of magnitude and is multiplicative in
// the configuration axes, so it is regressed on the log scale; predictions
// are mapped back to raw counts. The accuracy target is regressed as-is.
class ForestModel {
 public:
  ForestModel() = default;

  static ForestModel fit(const OfflineDataset& train, RegressionTarget target,
                         const ForestHyperparams& hp);

  // Prediction in natural units (percent or FLOPs). The ensemble mean is
  // summed in sorted order, so it is invariant under tree reordering.
  double predict(std::span<const double> features) const;
  double predict(const Configuration& c, double snr_db) const;

  // 1 - SS_res/SS_tot on the model's regression scale (log scale for the
  // cost target). A zero-variance test target gives 1 when residuals are
  // all zero and -infinity otherwise.
  double r2_score(const OfflineDataset& test) const;

  RegressionTarget target() const { return target_; }
  const ForestHyperparams& hyperparams() const { return hp_; }
  const std::vector<RegressionTree>& trees() const { return trees_; }
  std::size_t feature_count() const { return feature_count_; }
  bool log_domain() const { return target_ == RegressionTarget::kFlops; }

  // Reassembles a model from stored parts (deserialization path).
  static ForestModel from_parts(RegressionTarget target,
                                const ForestHyperparams& hp,
                                std::vector<RegressionTree> trees);

  // Regression-domain target value of a record under this model's target.
  double regression_value(const OfflineRecord& rec) const;

 private:
  double ensemble_mean(std::span<const double> features) const;

  RegressionTarget target_ = RegressionTarget::kAccuracy;
  ForestHyperparams hp_;
  std::vector<RegressionTree> trees_;
  std::size_t feature_count_ = 0;
};

}  // namespace splitopt
