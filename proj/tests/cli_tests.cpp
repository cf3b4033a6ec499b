// End-to-end checks of the splitopt command line. Takes the binary path as
// argv[1], drives it through every subcommand and verifies payloads, exit
// codes and seeded reproducibility.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "splitopt/config_space.hpp"
#include "splitopt/json_io.hpp"
#include "splitopt/offline_dataset.hpp"
#include "splitopt/random_forest.hpp"

namespace {

using nlohmann::json;

int g_checks = 0;
int g_failures = 0;

#define CHECK_MSG(cond, msg)                                          \
  do {                                                                \
    ++g_checks;                                                       \
    if (!(cond)) {                                                    \
      ++g_failures;                                                   \
      std::cerr << "[FAIL] " << __FILE__ << ":" << __LINE__ << " "    \
                << (msg) << "\n";                                     \
    }                                                                 \
  } while (0)

struct CommandResult {
  int exit_code = -1;
  std::string output;
};

CommandResult run(const std::string& command) {
  CommandResult result;
  FILE* pipe = popen((command + " 2>&1").c_str(), "r");
  if (pipe == nullptr) {
    result.output = "popen failed";
    return result;
  }
  char buffer[4096];
  while (std::fgets(buffer, sizeof(buffer), pipe) != nullptr) {
    result.output += buffer;
  }
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

json parse_json(const std::string& text) {
  return json::parse(text, nullptr, /*allow_exceptions=*/true);
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: cli_tests <path-to-splitopt>\n";
    return 1;
  }
  const std::string tool = argv[1];
  const splitopt::ParameterSpace space = splitopt::ParameterSpace::defaults();

  // --- flops ---------------------------------------------------------------
  {
    const auto res =
        run(tool + " flops --filters 8 --kernel 3 --latent 32 --split 2");
    CHECK_MSG(res.exit_code == 0, "flops exit code");
    const json doc = parse_json(res.output);
    CHECK_MSG(doc["per_layer"] == json::array({442368, 2359296}),
              "flops per_layer payload");
    CHECK_MSG(doc["latent"] == 1048576, "flops latent payload");
    CHECK_MSG(doc["total"] == 3850240, "flops total payload");
    CHECK_MSG(doc["schema_version"] == 1, "flops schema_version");
  }

  // --- layers-table ----------------------------------------------------------
  {
    const auto res =
        run(tool + " layers-table --filters 32 --kernel 3 --latent 128");
    CHECK_MSG(res.exit_code == 0, "layers-table exit code");
    std::istringstream lines(res.output);
    std::string line;
    std::getline(lines, line);
    CHECK_MSG(line == "m,flops", "layers-table header");
    long long prev = 0;
    int rows = 0;
    while (std::getline(lines, line)) {
      if (line.empty()) continue;
      const auto comma = line.find(',');
      CHECK_MSG(comma != std::string::npos, "layers-table row shape");
      const long long flops = std::stoll(line.substr(comma + 1));
      CHECK_MSG(flops > prev, "layers-table strictly increasing");
      prev = flops;
      ++rows;
    }
    CHECK_MSG(rows == 6, "layers-table row count");
  }

  // Restricted splits axis through --config.
  {
    const auto cfg = temp_path("splitopt_cli_space.cfg");
    std::ofstream(cfg) << "splits = 3\n";
    const auto res = run(tool + " layers-table --filters 32 --kernel 3 "
                                "--latent 128 --config " + cfg.string());
    CHECK_MSG(res.exit_code == 0, "restricted layers-table exit code");
    CHECK_MSG(res.output == "m,flops\n3,224067584\n",
              "restricted layers-table payload");
    std::filesystem::remove(cfg);
  }

  // --- gen-corpus + dataset validate -----------------------------------------
  const auto corpus_path = temp_path("splitopt_cli_corpus.csv");
  {
    const auto res = run(tool + " gen-corpus --count 120 --paper-protocol "
                                "--seed 3 --out " + corpus_path.string());
    CHECK_MSG(res.exit_code == 0, "gen-corpus exit code");
    CHECK_MSG(parse_json(res.output)["rows"] == 120, "gen-corpus row count");

    const auto ok = run(tool + " dataset validate " + corpus_path.string());
    CHECK_MSG(ok.exit_code == 0, "dataset validate accepts a clean corpus");
    CHECK_MSG(ok.output.find("ok: 120 records") != std::string::npos,
              "dataset validate summary");
  }
  {
    const auto broken = temp_path("splitopt_cli_broken.csv");
    std::ofstream(broken) << "f,k,l_s,m,snr_db,flops,accuracy\n"
                          << "8,3,32,1,0,966656,50\n"
                          << "8,3,32,1,0,966656,150\n"
                          << "9,3,32,1,0,966656,50\n";
    const auto res = run(tool + " dataset validate " + broken.string());
    CHECK_MSG(res.exit_code == 3, "dataset validate flags violations");
    CHECK_MSG(res.output.find(":3:") != std::string::npos,
              "diagnostics carry line numbers");
    CHECK_MSG(res.output.find("filters") != std::string::npos,
              "diagnostics name the violated axis");
    std::filesystem::remove(broken);
  }

  // --- fit-surrogate ----------------------------------------------------------
  const auto model_path = temp_path("splitopt_cli_model.json");
  {
    const auto res = run(tool + " fit-surrogate --dataset " +
                         corpus_path.string() + " --target accuracy --seed 5 " +
                         "--out " + model_path.string());
    CHECK_MSG(res.exit_code == 0, "fit-surrogate exit code");
    const auto model = splitopt::load_forest(model_path);
    CHECK_MSG(model.target() == splitopt::RegressionTarget::kAccuracy,
              "stored model target");
    CHECK_MSG(model.trees().size() == 100, "stored model tree count");
  }

  // --- optimize ---------------------------------------------------------------
  {
    const auto out_a = temp_path("splitopt_cli_opt_a.json");
    const auto out_b = temp_path("splitopt_cli_opt_b.json");
    const std::string base = tool + " optimize --budget 1e7 --snr -10 "
                                    "--oracle synthetic --seed 7 -o ";
    CHECK_MSG(run(base + out_a.string()).exit_code == 0, "optimize exit code");
    CHECK_MSG(run(base + out_b.string()).exit_code == 0,
              "optimize second run exit code");

    json a = parse_json(slurp(out_a));
    json b = parse_json(slurp(out_b));
    CHECK_MSG(a.contains("timings"), "optimize reports timings");
    a.erase("timings");
    b.erase("timings");
    CHECK_MSG(a.dump() == b.dump(),
              "seeded optimize runs are byte-identical minus timings");
    CHECK_MSG(a["result"]["config"].dump() != "null", "optimize found a config");
    CHECK_MSG(a["result"]["flops"].get<double>() <= 1e7,
              "optimize respects the budget");
    CHECK_MSG(a["result"]["history"].size() == 51, "optimize history length");
    std::filesystem::remove(out_a);
    std::filesystem::remove(out_b);
  }

  // Surrogate-driven run with a trained accuracy model.
  {
    const auto res = run(tool + " optimize --budget 1e7 --snr -10 "
                                "--dataset " + corpus_path.string() +
                         " --acc-model " + model_path.string() + " --seed 2");
    CHECK_MSG(res.exit_code == 0, "surrogate optimize exit code");
    const json doc = parse_json(res.output);
    CHECK_MSG(doc["result"]["flops"].get<double>() <= 1e7,
              "surrogate optimize respects the budget");
  }

  // Infeasible budget.
  {
    const auto res = run(tool + " optimize --budget 1e5 --snr 0 --oracle synthetic");
    CHECK_MSG(res.exit_code == 4, "infeasible budget exits with 4");
    CHECK_MSG(res.output.find("no feasible configuration") != std::string::npos,
              "infeasible budget message");
  }

  // Best-ever tracking is diagnostics only.
  {
    const std::string base = tool + " optimize --budget 1e7 --snr -10 "
                                    "--oracle synthetic --seed 7";
    const json plain = parse_json(run(base).output);
    const json tracked = parse_json(run(base + " --track-best").output);
    CHECK_MSG(!plain["result"].contains("best_ever"),
              "best_ever absent by default");
    CHECK_MSG(tracked["result"].contains("best_ever"),
              "best_ever present under --track-best");
    CHECK_MSG(plain["result"]["config"].dump() ==
                  tracked["result"]["config"].dump(),
              "tracking does not change the winner");
  }

  // Per-SNR filtered surrogate training.
  {
    const auto grid_corpus = temp_path("splitopt_cli_grid_corpus.csv");
    const auto filtered_model = temp_path("splitopt_cli_filtered.json");
    CHECK_MSG(run(tool + " gen-corpus --count 40 --seed 8 --out " +
                  grid_corpus.string()).exit_code == 0,
              "full-grid corpus generation");
    const auto res = run(tool + " fit-surrogate --dataset " +
                         grid_corpus.string() +
                         " --target accuracy --snr-filter -10 --out " +
                         filtered_model.string());
    CHECK_MSG(res.exit_code == 0, "snr-filtered fit exit code");
    CHECK_MSG(parse_json(res.output)["rows"] == 40,
              "snr filter keeps one row per configuration");
    const auto none = run(tool + " fit-surrogate --dataset " +
                          grid_corpus.string() +
                          " --target accuracy --snr-filter 7.5 --out " +
                          filtered_model.string());
    CHECK_MSG(none.exit_code == 3, "off-grid snr filter is a validation error");
    std::filesystem::remove(grid_corpus);
    std::filesystem::remove(filtered_model);
  }

  // Usage errors.
  {
    CHECK_MSG(run(tool + " optimize --budget 1e7").exit_code == 2,
              "missing required flag exits with 2");
    CHECK_MSG(run(tool + " optimize --budget 1e7 --snr 0 --oracle synthetic "
                         "--no-such-flag 1").exit_code == 2,
              "unknown flag exits with 2");
    CHECK_MSG(run(tool).exit_code == 2, "missing subcommand exits with 2");
    CHECK_MSG(run(tool + " --help").exit_code == 0, "--help exits cleanly");
    CHECK_MSG(run(tool + " optimize --budget 1e7 --snr 0 --oracle synthetic "
                         "--acc-model x.json").exit_code == 3,
              "conflicting accuracy sources exit with 3");
  }

  // --- brute-force --------------------------------------------------------------
  {
    const auto res = run(tool + " brute-force --budget 1e7 --snr -10 --oracle synthetic");
    CHECK_MSG(res.exit_code == 0, "brute-force exit code");
    const json doc = parse_json(res.output);
    CHECK_MSG(doc["result"]["evaluated_count"] == 1440,
              "brute-force covers the space");
    const json optimum = doc["result"]["best"];
    const auto ga = run(tool + " optimize --budget 1e7 --snr -10 --oracle synthetic "
                               "--seed 21");
    const json pick = parse_json(ga.output)["result"]["config"];
    CHECK_MSG(optimum.dump() == pick.dump(),
              "search agrees with the exhaustive optimum");
  }

  // --- sweep ---------------------------------------------------------------------
  {
    const auto csv_path = temp_path("splitopt_cli_sweep.csv");
    const auto res = run(tool + " sweep --axis budget "
                                "--points 1e6,5e6,1e7,3e7,7e7 --snr -10 "
                                "--oracle synthetic --seed 4 --out-csv " +
                         csv_path.string());
    CHECK_MSG(res.exit_code == 0, "sweep exit code");
    const json doc = parse_json(res.output);
    CHECK_MSG(doc["points"].size() == 5, "sweep point count");

    std::istringstream lines(slurp(csv_path));
    std::string line;
    std::getline(lines, line);
    CHECK_MSG(line == "axis_value,f,k,l_s,m,flops,accuracy", "sweep csv header");
    int rows = 0;
    int prev_m = 0;
    while (std::getline(lines, line)) {
      if (line.empty()) continue;
      ++rows;
      std::vector<std::string> fields;
      std::stringstream ss(line);
      std::string field;
      while (std::getline(ss, field, ',')) fields.push_back(field);
      CHECK_MSG(fields.size() == 7, "sweep csv row width");
      const int m = std::stoi(fields[4]);
      CHECK_MSG(m >= prev_m, "selected depth non-decreasing over budgets");
      prev_m = m;
    }
    CHECK_MSG(rows == 5, "sweep csv row count");

    // Re-running the same seeded sweep reproduces the CSV byte for byte.
    const auto csv_again = temp_path("splitopt_cli_sweep_again.csv");
    run(tool + " sweep --axis budget --points 1e6,5e6,1e7,3e7,7e7 --snr -10 "
               "--oracle synthetic --seed 4 --out-csv " + csv_again.string());
    CHECK_MSG(slurp(csv_path) == slurp(csv_again),
              "seeded sweep csv is reproducible");
    std::filesystem::remove(csv_again);
    std::filesystem::remove(csv_path);
  }

  // A single-point sweep reproduces a direct optimize call with equal seed.
  {
    const auto sweep_res = run(tool + " sweep --axis budget --points 1e7 "
                                      "--snr -10 --oracle synthetic --seed 7");
    const auto direct_res = run(tool + " optimize --budget 1e7 --snr -10 "
                                       "--oracle synthetic --seed 7");
    const json sweep_doc = parse_json(sweep_res.output);
    const json direct_doc = parse_json(direct_res.output);
    CHECK_MSG(sweep_doc["points"][0]["result"].dump() ==
                  direct_doc["result"].dump(),
              "single-point sweep equals a direct optimize run");
  }

  // An infeasible sweep point is recorded, not fatal.
  {
    const auto res = run(tool + " sweep --axis budget --points 1e5,1e7 "
                                "--snr -10 --oracle synthetic --seed 4");
    CHECK_MSG(res.exit_code == 0, "sweep with infeasible point exit code");
    const json doc = parse_json(res.output);
    CHECK_MSG(doc["points"][0]["status"] == "infeasible",
              "infeasible point recorded");
    CHECK_MSG(doc["points"][1]["status"] == "feasible",
              "feasible point recorded");
  }

  // Layer sweep at fixed budget and SNR.
  {
    const auto res = run(tool + " sweep --axis layers --points 1,2,3 "
                                "--budget 1e8 --snr 0 --oracle synthetic --seed 6");
    CHECK_MSG(res.exit_code == 0, "layer sweep exit code");
    const json doc = parse_json(res.output);
    for (int i = 0; i < 3; ++i) {
      CHECK_MSG(doc["points"][i]["result"]["config"]["m"] == i + 1,
                "layer sweep pins the split");
    }
  }

  // --- channel ----------------------------------------------------------------
  {
    const auto res =
        run(tool + " channel --dim 50000 --snr -10 --trials 2 --seed 5");
    CHECK_MSG(res.exit_code == 0, "channel exit code");
    const json doc = parse_json(res.output);
    const double mean = doc["measured_snr_db"]["mean"].get<double>();
    CHECK_MSG(std::abs(mean + 10.0) < 0.1, "channel calibration");
  }

  std::filesystem::remove(corpus_path);
  std::filesystem::remove(model_path);

  std::cout << (g_checks - g_failures) << "/" << g_checks
            << " cli checks passed\n";
  return g_failures == 0 ? 0 : 1;
}
