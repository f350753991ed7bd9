// agrifid: command-line front end for the consensus-FDR explanation audit.
//
//   agrifid gen --config synth.json --out data/
//   agrifid train --data data/ --out models/ [--committee linear:1,mlp:2,...]
//   agrifid explain --data data/ --models models/model_m*.json --out masks/
//   agrifid evaluate --data data/ --masks masks/ --models ... --out report/
//   agrifid theorem-check
//
// Exit codes: 0 success, 1 skipped samples / failed checks / runtime errors,
// 2 usage or configuration errors.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "agrifid/error.hpp"
#include "agrifid/json_io.hpp"
#include "agrifid/pipeline.hpp"
#include "agrifid/synthgen.hpp"
#include "agrifid/theorem_check.hpp"

namespace fs = std::filesystem;
using namespace agrifid;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

nlohmann::json read_config(const std::string& path) {
  if (!fs::exists(path)) throw ConfigError("config file '" + path + "' does not exist");
  return load_json_file(path);
}

// Flags shared by explain and evaluate; a flag given on the command line wins
// over the same key in --config.
struct RunFlags {
  std::string config;
  std::uint64_t seed = 0;
  double kappa = 0.05;
  std::size_t permutations = 100;
  double theta = 0.8;
  std::string imputation = "zero";
  std::size_t radius = 3;
  std::string fidelity_mode = "per-model";
  std::size_t steps = 64;
  std::string baseline = "zero";
  unsigned threads = 1;

  CLI::Option* seed_opt = nullptr;
  CLI::Option* kappa_opt = nullptr;
  CLI::Option* permutations_opt = nullptr;
  CLI::Option* theta_opt = nullptr;
  CLI::Option* imputation_opt = nullptr;
  CLI::Option* radius_opt = nullptr;
  CLI::Option* fidelity_opt = nullptr;
  CLI::Option* steps_opt = nullptr;
  CLI::Option* baseline_opt = nullptr;
  CLI::Option* threads_opt = nullptr;

  void attach(CLI::App& cmd, bool evaluation_flags) {
    cmd.add_option("--config", config, "Run configuration (JSON)");
    kappa_opt = cmd.add_option("--kappa", kappa, "Top fraction of bins kept per mask");
    threads_opt = cmd.add_option("--threads", threads, "Worker threads (0 = all cores)");
    steps_opt = cmd.add_option("--steps", steps, "Integrated Gradients Riemann steps");
    baseline_opt = cmd.add_option("--baseline", baseline, "IG baseline")
                       ->check(CLI::IsMember({"zero", "dataset-min"}));
    if (!evaluation_flags) return;
    seed_opt = cmd.add_option("--seed", seed, "Permutation null seed");
    permutations_opt = cmd.add_option("--permutations", permutations, "Permutations B");
    theta_opt = cmd.add_option("--theta", theta, "NearOne threshold on FDR(lambda=1)");
    imputation_opt = cmd.add_option("--imputation", imputation, "Removal imputation")
                         ->check(CLI::IsMember({"zero", "neighbor"}));
    radius_opt = cmd.add_option("--radius", radius, "Neighbor imputation radius (bins)");
    fidelity_opt =
        cmd.add_option("--fidelity-mode", fidelity_mode, "per-model or consensus:<lambda>");
  }

  RunConfig resolve() const {
    nlohmann::json j = config.empty() ? nlohmann::json::object() : read_config(config);
    const auto put = [&](CLI::Option* opt, const char* key, auto value) {
      if (opt && opt->count()) j[key] = value;
    };
    put(seed_opt, "seed", seed);
    put(kappa_opt, "kappa", kappa);
    put(permutations_opt, "permutations", permutations);
    put(theta_opt, "theta", theta);
    put(imputation_opt, "imputation", imputation);
    put(radius_opt, "neighbor_radius", radius);
    put(fidelity_opt, "fidelity_mode", fidelity_mode);
    put(steps_opt, "ig_steps", steps);
    put(baseline_opt, "ig_baseline", baseline);
    put(threads_opt, "threads", threads);
    return RunConfig::from_json(j);
  }
};

int cmd_gen(const std::string& config_path, std::optional<std::uint64_t> seed,
            const std::string& out) {
  auto cfg = SynthConfig::from_json(read_config(config_path));
  if (seed) cfg.seed = *seed;
  gen_dataset(cfg, out);
  std::cout << (fs::path(out) / "manifest.json").string() << "\n";
  return 0;
}

TrainConfig train_config_from(const std::string& path) {
  TrainConfig c;
  if (path.empty()) return c;
  const auto j = read_config(path);
  require_known_keys(j, {"epochs", "learning_rate", "batch_size", "l2", "hidden"}, "train config");
  try {
    c.epochs = j.value("epochs", c.epochs);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.l2 = j.value("l2", c.l2);
    c.hidden = j.value("hidden", c.hidden);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  c.validate();
  return c;
}

int cmd_train(const std::string& data, const std::string& committee, const std::string& config,
              const std::string& out) {
  const auto members = committee.empty() ? default_committee() : parse_committee(committee);
  const auto outcome = train_committee(data, members, train_config_from(config), out);
  for (const auto& p : outcome.model_files) std::cout << p.string() << "\n";
  for (const auto& m : outcome.metrics["models"]) {
    std::fprintf(stderr, "%s (%s): loss %.4f, train accuracy %.3f\n",
                 m["id"].get<std::string>().c_str(), m["kind"].get<std::string>().c_str(),
                 m["final_loss"].get<double>(), m["train_accuracy"].get<double>());
  }
  return 0;
}

std::vector<fs::path> as_paths(const std::vector<std::string>& v) {
  return {v.begin(), v.end()};
}

int cmd_explain(const std::string& data, const std::vector<std::string>& model_files,
                const RunFlags& flags, const std::string& out) {
  const auto cfg = flags.resolve();
  const auto paths = as_paths(model_files);
  const auto models = load_models(paths);
  const auto outcome = explain_dataset(data, models, cfg, out);
  std::fprintf(stderr, "wrote %zu attribution/mask pairs (%zu degenerate)\n", outcome.written,
               outcome.degenerate);
  for (const auto& e : outcome.errors) std::cerr << "error: " << e << "\n";
  return outcome.errors.empty() ? 0 : kExitFailure;
}

int cmd_evaluate(const std::string& data, const std::string& masks,
                 const std::vector<std::string>& model_files, const std::string& audit_file,
                 const RunFlags& flags, const std::string& out) {
  const auto cfg = flags.resolve();
  auto paths = as_paths(model_files);
  std::optional<std::string> audit_id;
  if (!audit_file.empty()) {
    paths.emplace_back(audit_file);
    audit_id = load_model(audit_file)->id();
  }
  const auto models = load_models(paths);
  const auto outcome = evaluate_dataset(data, masks, models, cfg, audit_id);
  write_evaluation(outcome, out);
  std::cout << (fs::path(out) / "report.json").string() << "\n";
  const auto& trends = outcome.report["aggregates"]["trend_counts"];
  for (const auto& [label, c] : trends.items()) {
    std::fprintf(stderr, "%-9s total %3zu  Downward %3zu  NearOne %3zu\n", label.c_str(),
                 c["total"].get<std::size_t>(), c["downward"].get<std::size_t>(),
                 c["near_one"].get<std::size_t>());
  }
  for (const auto& s : outcome.skipped) {
    std::cerr << "skipped " << s.sample_id << ": " << s.reason << "\n";
  }
  return outcome.skipped.empty() ? 0 : kExitFailure;
}

int cmd_theorem_check(const TheoremCheckParams& params) {
  const auto rows = run_theorem_check(params);
  std::size_t failed = 0;
  std::printf("%-10s %-52s %14s %14s %26s %s\n", "check", "params", "measured", "expected",
              "interval", "result");
  for (const auto& r : rows) {
    std::printf("%-10s %-52s %14.8g %14.8g [%11.6g, %11.6g] %s\n", r.check.c_str(),
                r.params.c_str(), r.measured, r.expected, r.lower, r.upper,
                r.passed ? "PASS" : "FAIL");
    if (!r.passed) ++failed;
  }
  std::printf("%zu checks, %zu failed\n", rows.size(), failed);
  for (const auto& r : rows) {
    if (!r.passed) std::fprintf(stderr, "FAILED %s: %s\n", r.check.c_str(), r.params.c_str());
  }
  return failed == 0 ? 0 : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Consensus FDR reliability audit for spectrogram attribution maps"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen", "Generate a synthetic spectrogram dataset");
  std::string gen_config;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  gen->add_option("--config", gen_config, "Synthetic dataset configuration (JSON)")->required();
  auto* gen_seed_opt = gen->add_option("--seed", gen_seed, "Override the config seed");
  gen->add_option("--out", gen_out, "Output directory")->required();

  auto* train_cmd = app.add_subcommand("train", "Train the classifier committee");
  std::string train_data, train_committee_spec, train_config, train_out;
  train_cmd->add_option("--data", train_data, "Dataset directory")->required();
  train_cmd->add_option("--committee", train_committee_spec,
                        "Comma-separated kind:seed list (default linear:1,mlp:2,linear:3,mlp:4)");
  train_cmd->add_option("--config", train_config, "Training configuration (JSON)");
  train_cmd->add_option("--out", train_out, "Model output directory")->required();

  auto* explain = app.add_subcommand("explain", "Integrated Gradients maps and top-kappa masks");
  std::string explain_data, explain_out;
  std::vector<std::string> explain_models;
  RunFlags explain_flags;
  explain->add_option("--data", explain_data, "Dataset directory")->required();
  explain->add_option("--models", explain_models, "Model JSON files")->required();
  explain->add_option("--out", explain_out, "Output directory for attr_/mask_ CSVs")->required();
  explain_flags.attach(*explain, false);

  auto* evaluate = app.add_subcommand("evaluate", "FDR profiles, fidelity and baseline metrics");
  std::string eval_data, eval_masks, eval_out, eval_audit;
  std::vector<std::string> eval_models;
  RunFlags eval_flags;
  evaluate->add_option("--data", eval_data, "Dataset directory")->required();
  evaluate->add_option("--masks", eval_masks, "Directory of mask_/attr_ CSVs")->required();
  evaluate->add_option("--models", eval_models, "Committee model JSON files")->required();
  evaluate->add_option("--audit-model", eval_audit,
                       "Extra model under audit; its mask joins the committee");
  evaluate->add_option("--out", eval_out, "Report directory")->required();
  eval_flags.attach(*evaluate, true);

  auto* theorem = app.add_subcommand("theorem-check", "Validate the null model numerically");
  TheoremCheckParams params;
  theorem->add_option("--seed", params.seed, "Seed for profiles and permutations");
  theorem->add_option("--profiles", params.stationary_profiles, "Stationary profiles");
  theorem->add_option("--permutations", params.sparse_permutations,
                      "Permutations for the sparse sweep");
  theorem->add_option("--oracle-permutations", params.oracle_permutations,
                      "Permutations for the enumeration comparison");
  theorem->add_option("--threads", params.threads, "Worker threads (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*gen) {
      std::optional<std::uint64_t> seed;
      if (gen_seed_opt->count()) seed = gen_seed;
      return cmd_gen(gen_config, seed, gen_out);
    }
    if (*train_cmd) return cmd_train(train_data, train_committee_spec, train_config, train_out);
    if (*explain) return cmd_explain(explain_data, explain_models, explain_flags, explain_out);
    if (*evaluate) {
      return cmd_evaluate(eval_data, eval_masks, eval_models, eval_audit, eval_flags, eval_out);
    }
    if (*theorem) return cmd_theorem_check(params);
  } catch (const ConfigError& e) {
    std::cerr << "agrifid: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "agrifid: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
