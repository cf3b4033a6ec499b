// splitopt — SNR- and budget-adaptive configuration search for split CNN
// inference. Subcommands cover the optimizer, sweeps, the analytic cost
// model, surrogate training, corpus generation, exhaustive search, channel
// statistics and dataset validation. Machine-readable JSON goes to stdout
// (or --out); diagnostics go to stderr.
//
// Exit codes: 0 success, 2 usage error, 3 validation error,
// 4 no feasible configuration.

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "splitopt/channel_sim.hpp"
#include "splitopt/config_space.hpp"
#include "splitopt/flops_model.hpp"
#include "splitopt/ga_engine.hpp"
#include "splitopt/json_io.hpp"
#include "splitopt/number_format.hpp"
#include "splitopt/offline_dataset.hpp"
#include "splitopt/oracle.hpp"
#include "splitopt/random_forest.hpp"
#include "splitopt/sweep.hpp"
#include "splitopt/version.hpp"

namespace {

using nlohmann::json;
using namespace splitopt;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitValidation = 3;
constexpr int kExitNoFeasible = 4;

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}

  double elapsed_ms() const {
    const auto now = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(now - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void emit(const json& doc, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << doc.dump(2) << '\n';
    return;
  }
  std::ofstream out(out_path);
  if (!out) {
    throw std::runtime_error("cannot write output file: " + out_path);
  }
  out << doc.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Option bundles shared by several subcommands.

struct SpaceOpts {
  std::string config_path;

  void attach(CLI::App& cmd) {
    cmd.add_option("--config", config_path,
                   "key/value file overriding the search space and "
                   "architecture policy");
  }

  SpaceConfig resolve() const {
    if (config_path.empty()) return SpaceConfig{};
    return load_space_config(config_path);
  }
};

struct OracleOpts {
  SyntheticOracle oracle;

  void attach(CLI::App& cmd) {
    cmd.add_option("--oracle-floor", oracle.floor_accuracy,
                   "accuracy floor of the synthetic surface (percent)");
    cmd.add_option("--oracle-ceiling", oracle.ceiling_accuracy,
                   "accuracy ceiling of the synthetic surface (percent)");
    cmd.add_option("--oracle-snr-scale", oracle.snr_scale_db,
                   "SNR scale of the synthetic surface (dB)");
    cmd.add_option("--oracle-depth-gain", oracle.depth_gain,
                   "per-layer gain of the synthetic surface");
    cmd.add_option("--oracle-capacity", oracle.capacity_scale_flops,
                   "FLOPs scale of the synthetic surface");
    cmd.add_option("--oracle-noise-sd", oracle.noise_sd,
                   "gaussian noise added to the surface (percent)");
    cmd.add_option("--oracle-seed", oracle.seed, "noise seed");
  }
};

struct GaOpts {
  GaParams params;
  std::string constraint = "resample";

  void attach(CLI::App& cmd) {
    cmd.add_option("--population", params.population, "population size");
    cmd.add_option("--generations", params.generations, "generation count");
    cmd.add_option("--tournament", params.tournament, "tournament size");
    cmd.add_option("--cxpb", params.crossover_prob, "crossover probability");
    cmd.add_option("--mutpb", params.mutation_prob, "mutation probability");
    cmd.add_option("--restarts", params.restarts, "independent restarts");
    cmd.add_option("--seed", params.seed, "master seed");
    cmd.add_option("--constraint", constraint,
                   "budget handling inside the search: resample keeps the "
                   "population on-budget, sentinel only down-ranks violators")
        ->check(CLI::IsMember({"resample", "sentinel"}));
    cmd.add_flag("--track-best", params.track_best,
                 "also report the best individual ever evaluated "
                 "(diagnostics; the returned winner is unchanged)");
  }

  GaParams resolve() const {
    GaParams out = params;
    out.constraint_handling = constraint_handling_from_string(constraint);
    return out;
  }
};

struct EvaluatorOpts {
  std::string dataset_path;
  std::string acc_model_path;
  std::string flops_model_path;
  std::string flops_source = "exact";
  std::string oracle_kind;
  OracleOpts oracle_opts;

  void attach(CLI::App& cmd) {
    cmd.add_option("--dataset", dataset_path,
                   "offline corpus CSV served before any estimator");
    cmd.add_option("--oracle", oracle_kind,
                   "score accuracy with a closed-form surface "
                   "(only 'synthetic' is available)")
        ->check(CLI::IsMember({"synthetic"}));
    cmd.add_option("--acc-model", acc_model_path,
                   "accuracy regressor JSON (fit-surrogate output)");
    cmd.add_option("--flops-source", flops_source,
                   "cost source for the budget screen")
        ->check(CLI::IsMember({"exact", "surrogate"}));
    cmd.add_option("--flops-model", flops_model_path,
                   "cost regressor JSON, required with "
                   "--flops-source surrogate");
    oracle_opts.attach(cmd);
  }

  bool use_oracle() const { return !oracle_kind.empty(); }

  json accuracy_source_json() const {
    return use_oracle() ? json("synthetic-oracle")
                        : json("model:" + acc_model_path);
  }
};

// Owns everything the evaluator points at.
struct EvalContext {
  SpaceConfig sc;
  std::optional<OfflineDataset> dataset;
  std::optional<ForestModel> acc_model;
  std::optional<ForestModel> flops_model;
  SyntheticOracle oracle;
  bool use_oracle = false;
  EvaluatorStack stack;
};

EvalContext build_context(const SpaceOpts& space_opts,
                          const EvaluatorOpts& eval_opts, double budget,
                          double snr_db) {
  EvalContext ctx;
  ctx.sc = space_opts.resolve();
  ctx.oracle = eval_opts.oracle_opts.oracle;
  ctx.use_oracle = eval_opts.use_oracle();

  if (ctx.use_oracle == !eval_opts.acc_model_path.empty()) {
    throw std::invalid_argument(
        "choose exactly one accuracy source: --oracle synthetic or "
        "--acc-model <file>");
  }

  if (!eval_opts.dataset_path.empty()) {
    ctx.dataset = OfflineDataset::load_csv(eval_opts.dataset_path, ctx.sc.space);
  }
  if (!eval_opts.acc_model_path.empty()) {
    ctx.acc_model = load_forest(eval_opts.acc_model_path);
    if (ctx.acc_model->target() != RegressionTarget::kAccuracy) {
      throw std::invalid_argument("--acc-model must carry an accuracy target");
    }
  }
  if (!eval_opts.flops_model_path.empty()) {
    ctx.flops_model = load_forest(eval_opts.flops_model_path);
  }

  ctx.stack.policy = &ctx.sc.policy;
  ctx.stack.budget = budget;
  ctx.stack.snr_db = snr_db;
  ctx.stack.flops_source = flops_source_from_string(eval_opts.flops_source);
  if (ctx.stack.flops_source == FlopsSource::kSurrogate &&
      !ctx.flops_model.has_value()) {
    throw std::invalid_argument(
        "--flops-source surrogate needs --flops-model");
  }
  if (ctx.dataset.has_value()) ctx.stack.dataset = &*ctx.dataset;
  if (ctx.flops_model.has_value()) ctx.stack.flops_regressor = &*ctx.flops_model;
  if (ctx.use_oracle) {
    ctx.stack.accuracy = ctx.oracle.as_accuracy_fn(ctx.sc.policy);
  } else {
    const ForestModel* model = &*ctx.acc_model;
    ctx.stack.accuracy = [model](const Configuration& c, double snr) {
      return model->predict(c, snr);
    };
  }
  return ctx;
}

json inputs_json(const EvalContext& ctx, const EvaluatorOpts& eval_opts,
                 const GaParams* ga) {
  json doc{{"space", to_json(ctx.sc.space)},
           {"policy", to_json(ctx.sc.policy)},
           {"flops_source", to_string(ctx.stack.flops_source)},
           {"accuracy_source", eval_opts.accuracy_source_json()},
           {"dataset", eval_opts.dataset_path.empty()
                           ? json(nullptr)
                           : json(eval_opts.dataset_path)}};
  if (ctx.use_oracle) doc["oracle"] = to_json(ctx.oracle);
  if (ga != nullptr) doc["ga"] = to_json(*ga);
  return doc;
}

// ---------------------------------------------------------------------------
// Subcommand runners.

int run_optimize(const SpaceOpts& space_opts, const EvaluatorOpts& eval_opts,
                 const GaOpts& ga_opts, double budget, double snr_db,
                 const std::string& out_path) {
  const Stopwatch watch;
  EvalContext ctx = build_context(space_opts, eval_opts, budget, snr_db);
  const GaParams params = ga_opts.resolve();

  const OptimizationResult result =
      optimize(ctx.sc.space, ctx.sc.policy, ctx.stack, params);

  json doc{{"schema_version", kReportSchemaVersion},
           {"artifact_version", kArtifactVersion},
           {"command", "optimize"},
           {"inputs", inputs_json(ctx, eval_opts, &params)},
           {"result", to_json(result)}};
  doc["inputs"]["budget"] = budget;
  doc["inputs"]["snr_db"] = snr_db;
  doc["timings"] = json{{"total_ms", watch.elapsed_ms()}};
  emit(doc, out_path);
  return kExitOk;
}

int run_brute_force(const SpaceOpts& space_opts,
                    const EvaluatorOpts& eval_opts, double budget,
                    double snr_db, const std::string& out_path) {
  const Stopwatch watch;
  EvalContext ctx = build_context(space_opts, eval_opts, budget, snr_db);
  const BruteForceResult result =
      brute_force_optimize(ctx.sc.space, ctx.sc.policy, ctx.stack);

  json doc{{"schema_version", kReportSchemaVersion},
           {"artifact_version", kArtifactVersion},
           {"command", "brute-force"},
           {"inputs", inputs_json(ctx, eval_opts, nullptr)},
           {"result", to_json(result)}};
  doc["inputs"]["budget"] = budget;
  doc["inputs"]["snr_db"] = snr_db;
  doc["timings"] = json{{"total_ms", watch.elapsed_ms()}};
  emit(doc, out_path);
  return result.feasible_count > 0 ? kExitOk : kExitNoFeasible;
}

int run_sweep_cmd(const SpaceOpts& space_opts, const EvaluatorOpts& eval_opts,
                  const GaOpts& ga_opts, const std::string& axis,
                  const std::vector<double>& points, double budget,
                  double snr_db, int jobs, const std::string& out_json,
                  const std::string& out_csv) {
  const Stopwatch watch;

  SweepSpec spec;
  spec.axis = sweep_axis_from_string(axis);
  spec.points = points;
  spec.fixed_budget = budget;
  spec.fixed_snr = snr_db;
  if (spec.axis == SweepAxis::kBudget) {
    // The budget changes per point; a placeholder keeps the stack valid.
    budget = points.empty() ? 1.0 : points.front();
  }

  EvalContext ctx = build_context(space_opts, eval_opts,
                                  budget > 0 ? budget : 1.0, snr_db);
  const GaParams params = ga_opts.resolve();

  const SweepReport report =
      run_sweep(spec, ctx.sc.space, ctx.sc.policy, ctx.stack, params, jobs);

  json point_docs = json::array();
  for (const SweepPointOutcome& point : report.points) {
    json entry{{"axis_value", point.axis_value},
               {"status", point.feasible ? "feasible" : "infeasible"}};
    if (point.feasible) entry["result"] = to_json(point.result);
    point_docs.push_back(std::move(entry));
  }

  json doc{{"schema_version", kReportSchemaVersion},
           {"artifact_version", kArtifactVersion},
           {"command", "sweep"},
           {"spec",
            {{"axis", to_string(spec.axis)},
             {"points", spec.points},
             {"fixed_budget", spec.fixed_budget},
             {"fixed_snr", spec.fixed_snr},
             {"jobs", jobs}}},
           {"inputs", inputs_json(ctx, eval_opts, &params)},
           {"points", std::move(point_docs)}};
  doc["timings"] = json{{"total_ms", watch.elapsed_ms()}};

  if (!out_csv.empty()) {
    std::ofstream csv(out_csv);
    if (!csv) throw std::runtime_error("cannot write csv file: " + out_csv);
    write_sweep_csv(report, csv);
  }
  emit(doc, out_json);
  return kExitOk;
}

int run_flops(const SpaceOpts& space_opts, int filters, int kernel,
              int latent_dim, int split, const std::string& out_path) {
  const SpaceConfig sc = space_opts.resolve();
  const Configuration c{filters, kernel, latent_dim, split};
  const FlopsBreakdown breakdown = device_flops(c, sc.policy);

  json doc = to_json(breakdown);
  doc["schema_version"] = kReportSchemaVersion;
  emit(doc, out_path);
  return kExitOk;
}

int run_layers_table(const SpaceOpts& space_opts, int filters, int kernel,
                     int latent_dim, const std::string& out_path) {
  const SpaceConfig sc = space_opts.resolve();
  std::ostringstream table;
  write_layers_flops_csv(sc.space, sc.policy, filters, kernel, latent_dim,
                         table);
  if (out_path.empty()) {
    std::cout << table.str();
  } else {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write file: " + out_path);
    out << table.str();
  }
  return kExitOk;
}

int run_fit_surrogate(const SpaceOpts& space_opts,
                      const std::string& dataset_path,
                      const std::string& target, ForestHyperparams hp,
                      const std::optional<double>& snr_filter,
                      const std::string& out_path) {
  const Stopwatch watch;
  const SpaceConfig sc = space_opts.resolve();
  OfflineDataset dataset = OfflineDataset::load_csv(dataset_path, sc.space);
  if (snr_filter.has_value()) {
    std::vector<OfflineRecord> kept;
    for (const OfflineRecord& rec : dataset.records()) {
      if (OfflineDataset::snr_key(rec.snr_db) ==
          OfflineDataset::snr_key(*snr_filter)) {
        kept.push_back(rec);
      }
    }
    if (kept.empty()) {
      throw std::invalid_argument("no corpus rows at the requested SNR");
    }
    dataset = OfflineDataset::from_records(std::move(kept), sc.space);
  }
  const RegressionTarget t = regression_target_from_string(target);
  const ForestModel model = ForestModel::fit(dataset, t, hp);
  save_forest(model, out_path);

  json doc{{"schema_version", kReportSchemaVersion},
           {"command", "fit-surrogate"},
           {"target", target},
           {"rows", dataset.size()},
           {"trees", hp.n_trees},
           {"out", out_path},
           {"timings", {{"total_ms", watch.elapsed_ms()}}}};
  if (snr_filter.has_value()) doc["snr_filter"] = *snr_filter;
  std::cout << doc.dump(2) << '\n';
  return kExitOk;
}

int run_gen_corpus(const SpaceOpts& space_opts, const OracleOpts& oracle_opts,
                   std::size_t count, bool one_snr_per_config,
                   std::vector<double> snr_set, std::uint64_t seed,
                   const std::string& out_path) {
  const SpaceConfig sc = space_opts.resolve();
  if (snr_set.empty()) {
    snr_set.assign(kDefaultSnrGridDb.begin(), kDefaultSnrGridDb.end());
  }
  Rng rng(seed);
  const OfflineDataset corpus =
      generate_corpus(sc.space, sc.policy, oracle_opts.oracle, snr_set, count,
                      one_snr_per_config, rng);
  corpus.save_csv(out_path);

  json doc{{"schema_version", kReportSchemaVersion},
           {"command", "gen-corpus"},
           {"rows", corpus.size()},
           {"out", out_path}};
  std::cout << doc.dump(2) << '\n';
  return kExitOk;
}

int run_channel(const SpaceOpts& space_opts, std::size_t dim, double snr_db,
                int trials, std::uint64_t seed, bool normalize,
                const std::string& out_path) {
  space_opts.resolve();  // only to reject an invalid --config early
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");

  const Rng base(seed);
  double measured_sum = 0.0;
  double measured_min = 0.0;
  double measured_max = 0.0;
  double sigma_sq_sum = 0.0;
  double re_var_sum = 0.0;
  double im_var_sum = 0.0;

  for (int t = 0; t < trials; ++t) {
    Rng rng = base.derive(static_cast<std::uint64_t>(t));
    std::vector<Complex> sent = random_unit_power_latent(dim, rng);
    if (normalize) sent = normalize_to_unit_power(std::move(sent));
    sigma_sq_sum += noise_variance(sent, snr_db);

    const std::vector<Complex> received = transmit(sent, snr_db, rng);
    const double measured = measure_snr(sent, received);
    measured_sum += measured;
    measured_min = t == 0 ? measured : std::min(measured_min, measured);
    measured_max = t == 0 ? measured : std::max(measured_max, measured);

    double re_sq = 0.0;
    double im_sq = 0.0;
    for (std::size_t i = 0; i < sent.size(); ++i) {
      const Complex z = received[i] - sent[i];
      re_sq += z.real() * z.real();
      im_sq += z.imag() * z.imag();
    }
    re_var_sum += re_sq / static_cast<double>(dim);
    im_var_sum += im_sq / static_cast<double>(dim);
  }

  const double n = static_cast<double>(trials);
  const double sigma_sq = sigma_sq_sum / n;
  json doc{{"schema_version", kReportSchemaVersion},
           {"command", "channel"},
           {"dim", dim},
           {"trials", trials},
           {"target_snr_db", snr_db},
           {"measured_snr_db",
            {{"mean", measured_sum / n},
             {"min", measured_min},
             {"max", measured_max}}},
           {"noise_variance",
            {{"theoretical", sigma_sq},
             {"empirical_real", re_var_sum / n},
             {"empirical_imag", im_var_sum / n},
             {"expected_component", sigma_sq / 2.0}}}};
  emit(doc, out_path);
  return kExitOk;
}

int run_dataset_validate(const SpaceOpts& space_opts,
                         const std::string& path) {
  const SpaceConfig sc = space_opts.resolve();
  const auto errors = OfflineDataset::validate_csv(path, sc.space);
  if (errors.empty()) {
    const OfflineDataset dataset = OfflineDataset::load_csv(path, sc.space);
    std::cout << "ok: " << dataset.size() << " records\n";
    return kExitOk;
  }
  for (const std::string& err : errors) {
    std::cerr << err << '\n';
  }
  std::cerr << errors.size() << " problem(s) found\n";
  return kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "SNR- and budget-adaptive configuration search for split CNN "
      "inference over a noisy channel"};
  app.require_subcommand(1);

  // --- optimize ------------------------------------------------------------
  auto* optimize_cmd = app.add_subcommand(
      "optimize", "search for the best configuration under a FLOPs budget");
  SpaceOpts opt_space;
  EvaluatorOpts opt_eval;
  GaOpts opt_ga;
  double opt_budget = 0.0;
  double opt_snr = 0.0;
  std::string opt_out;
  optimize_cmd->add_option("--budget", opt_budget, "device FLOPs budget")
      ->required();
  optimize_cmd->add_option("--snr", opt_snr, "channel SNR in dB")->required();
  optimize_cmd->add_option("-o,--out", opt_out, "output JSON path");
  opt_space.attach(*optimize_cmd);
  opt_eval.attach(*optimize_cmd);
  opt_ga.attach(*optimize_cmd);

  // --- brute-force ---------------------------------------------------------
  auto* brute_cmd = app.add_subcommand(
      "brute-force", "exhaustively score every configuration in the space");
  SpaceOpts bf_space;
  EvaluatorOpts bf_eval;
  double bf_budget = 0.0;
  double bf_snr = 0.0;
  std::string bf_out;
  brute_cmd->add_option("--budget", bf_budget, "device FLOPs budget")
      ->required();
  brute_cmd->add_option("--snr", bf_snr, "channel SNR in dB")->required();
  brute_cmd->add_option("-o,--out", bf_out, "output JSON path");
  bf_space.attach(*brute_cmd);
  bf_eval.attach(*brute_cmd);

  // --- sweep ---------------------------------------------------------------
  auto* sweep_cmd = app.add_subcommand(
      "sweep", "run one optimization per point along a budget/SNR/layer axis");
  SpaceOpts sw_space;
  EvaluatorOpts sw_eval;
  GaOpts sw_ga;
  std::string sw_axis;
  std::vector<double> sw_points;
  double sw_budget = 0.0;
  double sw_snr = 0.0;
  int sw_jobs = 1;
  std::string sw_out_json;
  std::string sw_out_csv;
  sweep_cmd->add_option("--axis", sw_axis, "swept axis")
      ->required()
      ->check(CLI::IsMember({"budget", "snr", "layers"}));
  sweep_cmd->add_option("--points", sw_points, "axis values, comma separated")
      ->required()
      ->delimiter(',');
  sweep_cmd->add_option("--budget", sw_budget,
                        "fixed budget (snr and layer sweeps)");
  sweep_cmd->add_option("--snr", sw_snr, "fixed SNR (budget and layer sweeps)");
  sweep_cmd->add_option("--jobs", sw_jobs, "parallel sweep points");
  sweep_cmd->add_option("-o,--out-json", sw_out_json, "report JSON path");
  sweep_cmd->add_option("--out-csv", sw_out_csv, "plot-ready CSV path");
  sw_space.attach(*sweep_cmd);
  sw_eval.attach(*sweep_cmd);
  sw_ga.attach(*sweep_cmd);

  // --- flops ---------------------------------------------------------------
  auto* flops_cmd = app.add_subcommand(
      "flops", "device-side cost breakdown of one configuration");
  SpaceOpts fl_space;
  int fl_f = 0;
  int fl_k = 0;
  int fl_l = 0;
  int fl_m = 0;
  std::string fl_out;
  flops_cmd->add_option("--filters", fl_f, "base filter count")->required();
  flops_cmd->add_option("--kernel", fl_k, "kernel size")->required();
  flops_cmd->add_option("--latent", fl_l, "latent dimension")->required();
  flops_cmd->add_option("--split", fl_m, "device-side block count")
      ->required();
  flops_cmd->add_option("-o,--out", fl_out, "output JSON path");
  fl_space.attach(*flops_cmd);

  // --- layers-table ----------------------------------------------------------
  auto* layers_cmd = app.add_subcommand(
      "layers-table", "cost per split depth for fixed f, k and latent size");
  SpaceOpts lt_space;
  int lt_f = 0;
  int lt_k = 0;
  int lt_l = 0;
  std::string lt_out;
  layers_cmd->add_option("--filters", lt_f, "base filter count")->required();
  layers_cmd->add_option("--kernel", lt_k, "kernel size")->required();
  layers_cmd->add_option("--latent", lt_l, "latent dimension")->required();
  layers_cmd->add_option("-o,--out", lt_out, "output CSV path");
  lt_space.attach(*layers_cmd);

  // --- fit-surrogate ---------------------------------------------------------
  auto* fit_cmd = app.add_subcommand(
      "fit-surrogate", "train a random forest regressor on a corpus");
  SpaceOpts fs_space;
  std::string fs_dataset;
  std::string fs_target;
  std::string fs_out;
  ForestHyperparams fs_hp;
  fit_cmd->add_option("--dataset", fs_dataset, "corpus CSV")->required();
  fit_cmd->add_option("--target", fs_target, "regression target")
      ->required()
      ->check(CLI::IsMember({"accuracy", "flops"}));
  fit_cmd->add_option("--out", fs_out, "model JSON path")->required();
  fit_cmd->add_option("--trees", fs_hp.n_trees, "tree count");
  fit_cmd->add_option("--max-depth", fs_hp.max_depth, "depth limit");
  fit_cmd->add_option("--min-leaf", fs_hp.min_samples_leaf,
                      "minimum samples per leaf");
  fit_cmd->add_option("--feature-subsample", fs_hp.feature_subsample,
                      "features per split (0 = ceil(sqrt(d)))");
  fit_cmd->add_option("--seed", fs_hp.seed, "fitting seed");
  std::optional<double> fs_snr_filter;
  fit_cmd->add_option("--snr-filter", fs_snr_filter,
                      "train on corpus rows at this SNR only (dB)");
  fs_space.attach(*fit_cmd);

  // --- gen-corpus ------------------------------------------------------------
  auto* gen_cmd = app.add_subcommand(
      "gen-corpus", "sample configurations and record cost plus synthetic "
                    "accuracy");
  SpaceOpts gc_space;
  OracleOpts gc_oracle;
  std::size_t gc_count = 0;
  bool gc_paper_protocol = false;
  std::vector<double> gc_snr_set;
  std::uint64_t gc_seed = 0;
  std::string gc_out;
  gen_cmd->add_option("--count", gc_count, "distinct configurations to sample")
      ->required();
  gen_cmd->add_flag("--paper-protocol", gc_paper_protocol,
                    "one random grid SNR per configuration instead of the "
                    "full grid");
  gen_cmd->add_option("--snr-set", gc_snr_set, "SNR grid in dB")
      ->delimiter(',');
  gen_cmd->add_option("--seed", gc_seed, "sampling seed");
  gen_cmd->add_option("--out", gc_out, "corpus CSV path")->required();
  gc_space.attach(*gen_cmd);
  gc_oracle.attach(*gen_cmd);

  // --- channel ---------------------------------------------------------------
  auto* channel_cmd = app.add_subcommand(
      "channel", "noisy-channel statistics for synthetic latent vectors");
  std::size_t ch_dim = 0;
  double ch_snr = 0.0;
  int ch_trials = 1;
  std::uint64_t ch_seed = 0;
  bool ch_normalize = false;
  std::string ch_out;
  SpaceOpts ch_space;  // accepted for interface uniformity; unused here
  channel_cmd->add_option("--dim", ch_dim, "latent dimension")->required();
  channel_cmd->add_option("--snr", ch_snr, "target SNR in dB")->required();
  channel_cmd->add_option("--trials", ch_trials, "independent vectors");
  channel_cmd->add_option("--seed", ch_seed, "noise seed");
  channel_cmd->add_flag("--normalize", ch_normalize,
                        "rescale vectors to exactly unit mean power");
  channel_cmd->add_option("-o,--out", ch_out, "output JSON path");
  ch_space.attach(*channel_cmd);

  // --- dataset validate --------------------------------------------------------
  auto* dataset_cmd =
      app.add_subcommand("dataset", "offline corpus utilities");
  dataset_cmd->require_subcommand(1);
  auto* validate_cmd = dataset_cmd->add_subcommand(
      "validate", "check a corpus CSV against the schema and the space");
  SpaceOpts dv_space;
  std::string dv_path;
  validate_cmd->add_option("path", dv_path, "corpus CSV")->required();
  dv_space.attach(*validate_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (optimize_cmd->parsed()) {
      return run_optimize(opt_space, opt_eval, opt_ga, opt_budget, opt_snr,
                          opt_out);
    }
    if (brute_cmd->parsed()) {
      return run_brute_force(bf_space, bf_eval, bf_budget, bf_snr, bf_out);
    }
    if (sweep_cmd->parsed()) {
      return run_sweep_cmd(sw_space, sw_eval, sw_ga, sw_axis, sw_points,
                           sw_budget, sw_snr, sw_jobs, sw_out_json,
                           sw_out_csv);
    }
    if (flops_cmd->parsed()) {
      return run_flops(fl_space, fl_f, fl_k, fl_l, fl_m, fl_out);
    }
    if (layers_cmd->parsed()) {
      return run_layers_table(lt_space, lt_f, lt_k, lt_l, lt_out);
    }
    if (fit_cmd->parsed()) {
      return run_fit_surrogate(fs_space, fs_dataset, fs_target, fs_hp,
                               fs_snr_filter, fs_out);
    }
    if (gen_cmd->parsed()) {
      return run_gen_corpus(gc_space, gc_oracle, gc_count, gc_paper_protocol,
                            gc_snr_set, gc_seed, gc_out);
    }
    if (channel_cmd->parsed()) {
      return run_channel(ch_space, ch_dim, ch_snr, ch_trials, ch_seed,
                         ch_normalize, ch_out);
    }
    if (validate_cmd->parsed()) {
      return run_dataset_validate(dv_space, dv_path);
    }
  } catch (const NoFeasibleConfiguration& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNoFeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }

  std::cerr << "no subcommand selected\n";
  return kExitUsage;
}
