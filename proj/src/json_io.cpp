#include "splitopt/json_io.hpp"

#include <fstream>
#include <stdexcept>

#include "splitopt/version.hpp"

namespace splitopt {

using nlohmann::json;

nlohmann::json forest_to_json(const ForestModel& model) {
  json trees = json::array();
  for (const RegressionTree& tree : model.trees()) {
    json nodes = json::array();
    for (const TreeNode& node : tree.nodes) {
      nodes.push_back(json::array(
          {node.feature, node.threshold, node.left, node.right, node.value}));
    }
    trees.push_back(json{{"nodes", std::move(nodes)}});
  }

  const ForestHyperparams& hp = model.hyperparams();
  return json{
      {"schema_version", kReportSchemaVersion},
      {"model", "random_forest_regression"},
      {"target", to_string(model.target())},
      {"feature_names", feature_names(model.target())},
      {"log_domain", model.log_domain()},
      {"hyperparams",
       {{"n_trees", hp.n_trees},
        {"max_depth", hp.max_depth},
        {"min_samples_leaf", hp.min_samples_leaf},
        {"feature_subsample", hp.feature_subsample},
        {"seed", hp.seed}}},
      {"trees", std::move(trees)},
  };
}

ForestModel forest_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || doc.value("schema_version", -1) != kReportSchemaVersion) {
    throw std::runtime_error("unsupported model document schema");
  }
  if (doc.value("model", "") != "random_forest_regression") {
    throw std::runtime_error("not a random forest model document");
  }
  const RegressionTarget target =
      regression_target_from_string(doc.at("target").get<std::string>());

  ForestHyperparams hp;
  const json& hp_doc = doc.at("hyperparams");
  hp.n_trees = hp_doc.at("n_trees").get<int>();
  hp.max_depth = hp_doc.at("max_depth").get<int>();
  hp.min_samples_leaf = hp_doc.at("min_samples_leaf").get<int>();
  hp.feature_subsample = hp_doc.at("feature_subsample").get<int>();
  hp.seed = hp_doc.at("seed").get<std::uint64_t>();

  std::vector<RegressionTree> trees;
  for (const json& tree_doc : doc.at("trees")) {
    RegressionTree tree;
    for (const json& node_doc : tree_doc.at("nodes")) {
      if (!node_doc.is_array() || node_doc.size() != 5) {
        throw std::runtime_error("malformed tree node entry");
      }
      TreeNode node;
      node.feature = node_doc[0].get<int>();
      node.threshold = node_doc[1].get<double>();
      node.left = node_doc[2].get<int>();
      node.right = node_doc[3].get<int>();
      node.value = node_doc[4].get<double>();
      tree.nodes.push_back(node);
    }
    trees.push_back(std::move(tree));
  }

  ForestModel model = ForestModel::from_parts(target, hp, std::move(trees));
  if (doc.value("log_domain", model.log_domain()) != model.log_domain()) {
    throw std::runtime_error("model document domain flag disagrees with target");
  }
  return model;
}

void save_forest(const ForestModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write model file: " + path.string());
  }
  out << forest_to_json(model).dump(2) << '\n';
  if (!out) {
    throw std::runtime_error("write failed: " + path.string());
  }
}

ForestModel load_forest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open model file: " + path.string());
  }
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw std::runtime_error("bad model file " + path.string() + ": " +
                             e.what());
  }
  return forest_from_json(doc);
}

nlohmann::json to_json(const Configuration& c) {
  return json{{"f", c.filters},
              {"k", c.kernel},
              {"l_s", c.latent_dim},
              {"m", c.split}};
}

nlohmann::json to_json(const FitnessTuple& f) {
  // Non-finite sentinel values serialize as null.
  return json{{"primary", f.primary}, {"gap", f.gap}};
}

nlohmann::json to_json(const FlopsBreakdown& b) {
  return json{
      {"per_layer", b.per_layer}, {"latent", b.latent}, {"total", b.total}};
}

nlohmann::json to_json(const ParameterSpace& space) {
  return json{{"filters", space.filters()},
              {"kernels", space.kernels()},
              {"latent_dims", space.latent_dims()},
              {"splits", space.splits()}};
}

nlohmann::json to_json(const ArchPolicy& policy) {
  return json{{"input_height", policy.input_height},
              {"input_width", policy.input_width},
              {"input_channels", policy.input_channels},
              {"total_blocks", policy.total_blocks},
              {"filter_progression", to_string(policy.filter_progression)},
              {"spatial_policy", to_string(policy.spatial_policy)}};
}

nlohmann::json to_json(const GaParams& params) {
  return json{{"population", params.population},
              {"generations", params.generations},
              {"tournament", params.tournament},
              {"crossover_prob", params.crossover_prob},
              {"mutation_prob", params.mutation_prob},
              {"restarts", params.restarts},
              {"seed", params.seed},
              {"constraint_handling", to_string(params.constraint_handling)},
              {"track_best", params.track_best}};
}

nlohmann::json to_json(const SyntheticOracle& oracle) {
  return json{{"floor_accuracy", oracle.floor_accuracy},
              {"ceiling_accuracy", oracle.ceiling_accuracy},
              {"snr_scale_db", oracle.snr_scale_db},
              {"depth_gain", oracle.depth_gain},
              {"capacity_scale_flops", oracle.capacity_scale_flops},
              {"noise_sd", oracle.noise_sd},
              {"seed", oracle.seed}};
}

nlohmann::json to_json(const OptimizationResult& result) {
  json history = json::array();
  for (const FitnessTuple& f : result.history) {
    history.push_back(to_json(f));
  }
  json doc{{"config", to_json(result.best)},
           {"accuracy", result.predicted_accuracy},
           {"flops", result.flops},
           {"fitness", to_json(result.fitness)},
           {"provenance", to_string(result.source)},
           {"restart_index", result.restart_index},
           {"history", std::move(history)}};
  if (result.best_ever.has_value()) {
    doc["best_ever"] = json{{"config", to_json(result.best_ever->config)},
                            {"accuracy", result.best_ever->eval.accuracy},
                            {"flops", result.best_ever->eval.flops},
                            {"fitness", to_json(result.best_ever->eval.fitness)}};
  }
  return doc;
}

nlohmann::json to_json(const BruteForceResult& result) {
  json doc{{"feasible_count", result.feasible_count},
           {"evaluated_count", result.evaluated_count}};
  if (result.feasible_count > 0) {
    doc["best"] = to_json(result.best);
    doc["accuracy"] = result.best_eval.accuracy;
    doc["flops"] = result.best_eval.flops;
    doc["fitness"] = to_json(result.best_eval.fitness);
    doc["provenance"] = to_string(result.best_eval.source);
  } else {
    doc["best"] = nullptr;
  }
  return doc;
}

}  // namespace splitopt
