#pragma once

// End-to-end stages behind the command-line tool:
//   gen -> train -> explain -> evaluate
// Each stage reads the previous stage's files, so externally produced masks or
// attribution maps can be dropped into the same layout.
//
// File layout
//   <data>/spec_<id>.csv, <data>/manifest.json          (gen)
//   <models>/model_<model>.json, training_metrics.json   (train)
//   <masks>/attr_<id>_<model>.csv, mask_<id>_<model>.csv (explain)
//   <out>/report.json, <out>/per_sample.csv              (evaluate)

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "agrifid/attribution.hpp"
#include "agrifid/committee.hpp"
#include "agrifid/masking.hpp"
#include "agrifid/report.hpp"
#include "agrifid/synthgen.hpp"

namespace agrifid {

struct CommitteeMember {
  ModelKind kind = ModelKind::Linear;
  std::uint64_t seed = 1;
};

// linear:1, mlp:2, linear:3, mlp:4
std::vector<CommitteeMember> default_committee();
// Comma-separated "kind:seed" list, e.g. "linear:1,mlp:2".
std::vector<CommitteeMember> parse_committee(std::string_view spec);

std::string model_id_for(std::size_t index);  // "m0", "m1", ...

struct RunConfig {
  double kappa = 0.05;
  std::size_t permutations = 100;  // B
  std::uint64_t seed = 0;
  double theta = 0.8;
  ImputationPolicy imputation;
  FidelityMode fidelity_mode;
  std::size_t ig_steps = 64;
  IgBaseline ig_baseline = IgBaseline::ZeroMatrix;
  unsigned threads = 1;

  void validate() const;
  nlohmann::ordered_json to_json() const;
  // Missing keys keep defaults; unknown keys are rejected.
  static RunConfig from_json(const nlohmann::json& j);
  ReportDecisions decisions() const;
};

std::vector<LabeledSample> load_labeled_dataset(const std::filesystem::path& dataset_dir,
                                                const Manifest& manifest);

struct TrainOutcome {
  std::vector<std::filesystem::path> model_files;
  nlohmann::ordered_json metrics;
};

// Trains one model per member (cfg.seed replaced by the member seed), writing
// model_<id>.json and training_metrics.json into out_dir.
TrainOutcome train_committee(const std::filesystem::path& dataset_dir,
                             std::span<const CommitteeMember> members, const TrainConfig& cfg,
                             const std::filesystem::path& out_dir);

std::vector<ClassifierPtr> load_models(std::span<const std::filesystem::path> paths);

struct ExplainOutcome {
  std::size_t written = 0;     // (sample, model) pairs written
  std::size_t degenerate = 0;  // constant attribution maps (empty masks)
  std::vector<std::string> errors;
};

// IG attribution of the labelled class for every (sample, model), then
// top-kappa binarization.
ExplainOutcome explain_dataset(const std::filesystem::path& dataset_dir,
                               std::span<const ClassifierPtr> models, const RunConfig& cfg,
                               const std::filesystem::path& out_dir);

std::filesystem::path mask_path(const std::filesystem::path& dir, std::string_view sample_id,
                                std::string_view model_id);
std::filesystem::path attribution_path(const std::filesystem::path& dir,
                                       std::string_view sample_id, std::string_view model_id);

// FDR profile, fidelity and masking baselines for one sample. `attributions`
// may be empty or hold one optional map per model.
SampleReport evaluate_sample(std::string sample_id, ClassLabel label, const Spectrogram& x,
                             std::span<const ClassifierPtr> committee,
                             std::span<const BinaryMask> masks,
                             std::span<const std::optional<AttributionMap>> attributions,
                             const RunConfig& cfg);

struct EvaluationOutcome {
  std::vector<SampleReport> samples;  // sorted by sample_id
  std::vector<SkippedSample> skipped;
  nlohmann::ordered_json report;
  std::string per_sample_csv;
};

EvaluationOutcome evaluate_dataset(const std::filesystem::path& dataset_dir,
                                   const std::filesystem::path& masks_dir,
                                   std::span<const ClassifierPtr> committee, const RunConfig& cfg,
                                   const std::optional<std::string>& audit_model_id = {});

// Writes report.json and per_sample.csv.
void write_evaluation(const EvaluationOutcome& outcome, const std::filesystem::path& out_dir);

// Whole chain driven by one master seed, used by tests and benchmarks.
struct PipelineConfig {
  SynthConfig synth;
  std::vector<CommitteeMember> committee = default_committee();
  TrainConfig train;
  RunConfig run;
};

struct PipelineOutcome {
  TrainOutcome training;
  ExplainOutcome explain;
  EvaluationOutcome evaluation;
};

// Subdirectories data/, models/, masks/, report/ under work_dir.
PipelineOutcome run_pipeline(const PipelineConfig& cfg, const std::filesystem::path& work_dir);

// Overwrites the synth, committee and null seeds with values derived from master_seed.
PipelineConfig seeded_pipeline(PipelineConfig cfg, std::uint64_t master_seed);

}  // namespace agrifid
