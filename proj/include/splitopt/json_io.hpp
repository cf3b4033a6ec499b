#pragma once

#include <filesystem>

#include <json.hpp>

#include "splitopt/config_space.hpp"
#include "splitopt/flops_model.hpp"
#include "splitopt/ga_engine.hpp"
#include "splitopt/oracle.hpp"
#include "splitopt/random_forest.hpp"

namespace splitopt {

// Versioned model document: tree structure, thresholds, leaf values,
// hyperparameters and the feature layout. Doubles survive the round trip
// bit-exactly.
nlohmann::json forest_to_json(const ForestModel& model);
ForestModel forest_from_json(const nlohmann::json& doc);
void save_forest(const ForestModel& model, const std::filesystem::path& path);
ForestModel load_forest(const std::filesystem::path& path);

nlohmann::json to_json(const Configuration& c);
nlohmann::json to_json(const FitnessTuple& f);
nlohmann::json to_json(const FlopsBreakdown& b);
nlohmann::json to_json(const ParameterSpace& space);
nlohmann::json to_json(const ArchPolicy& policy);
nlohmann::json to_json(const GaParams& params);
nlohmann::json to_json(const SyntheticOracle& oracle);
nlohmann::json to_json(const OptimizationResult& result);
nlohmann::json to_json(const BruteForceResult& result);

}  // namespace splitopt
