#include "agrifid/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "agrifid/error.hpp"
#include "agrifid/json_io.hpp"
#include "agrifid/matrix_io.hpp"
#include "agrifid/parallel.hpp"
#include "agrifid/random.hpp"

namespace agrifid {
namespace fs = std::filesystem;

namespace {

ImputationKind parse_imputation(std::string_view text) {
  if (text == "zero") return ImputationKind::ZeroFill;
  if (text == "neighbor") return ImputationKind::NeighborFrequencyMean;
  throw ConfigError("unknown imputation '" + std::string(text) + "' (expected zero or neighbor)");
}

IgBaseline parse_ig_baseline(std::string_view text) {
  if (text == "zero") return IgBaseline::ZeroMatrix;
  if (text == "dataset-min") return IgBaseline::ConstantDatasetMin;
  throw ConfigError("unknown IG baseline '" + std::string(text) +
                    "' (expected zero or dataset-min)");
}

std::string_view to_string(IgBaseline b) {
  return b == IgBaseline::ZeroMatrix ? "zero" : "dataset-min";
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
}

}  // namespace

std::vector<CommitteeMember> default_committee() {
  return {{ModelKind::Linear, 1}, {ModelKind::Mlp, 2}, {ModelKind::Linear, 3}, {ModelKind::Mlp, 4}};
}

std::vector<CommitteeMember> parse_committee(std::string_view spec) {
  std::vector<CommitteeMember> members;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    const auto comma = spec.find(',', pos);
    const auto item = spec.substr(pos, comma == std::string_view::npos ? spec.npos : comma - pos);
    const auto colon = item.find(':');
    if (colon == std::string_view::npos) {
      throw ConfigError("committee entry '" + std::string(item) + "' must be kind:seed");
    }
    CommitteeMember m;
    m.kind = parse_model_kind(item.substr(0, colon));
    const auto seed_text = item.substr(colon + 1);
    auto [ptr, ec] = std::from_chars(seed_text.data(), seed_text.data() + seed_text.size(), m.seed);
    if (seed_text.empty() || ec != std::errc() || ptr != seed_text.data() + seed_text.size()) {
      throw ConfigError("committee entry '" + std::string(item) + "' has a bad seed");
    }
    members.push_back(m);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return members;
}

std::string model_id_for(std::size_t index) { return "m" + std::to_string(index); }

void RunConfig::validate() const {
  if (!(kappa > 0.0 && kappa <= 1.0)) throw ConfigError("kappa must lie in (0, 1]");
  if (permutations == 0) throw ConfigError("permutations (B) must be >= 1");
  if (!(theta > 0.0 && theta < 1.0)) throw ConfigError("theta must lie in (0, 1)");
  if (ig_steps == 0) throw ConfigError("ig_steps must be >= 1");
  imputation.validate();
  if (fidelity_mode.kind == FidelityMaskMode::ConsensusTier &&
      !(fidelity_mode.lambda > 0.0 && fidelity_mode.lambda <= 1.0)) {
    throw ConfigError("consensus fidelity lambda must lie in (0, 1]");
  }
}

nlohmann::ordered_json RunConfig::to_json() const {
  return {{"kappa", kappa},
          {"permutations", permutations},
          {"seed", seed},
          {"theta", theta},
          {"imputation", std::string(agrifid::to_string(imputation.kind))},
          {"neighbor_radius", imputation.neighbor_radius},
          {"fidelity_mode", fidelity_mode.label()},
          {"ig_steps", ig_steps},
          {"ig_baseline", std::string(to_string(ig_baseline))},
          {"threads", threads}};
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  require_known_keys(j,
                     {"kappa", "permutations", "seed", "theta", "imputation", "neighbor_radius",
                      "fidelity_mode", "ig_steps", "ig_baseline", "threads"},
                     "run config");
  RunConfig c;
  try {
    c.kappa = j.value("kappa", c.kappa);
    c.permutations = j.value("permutations", c.permutations);
    c.seed = j.value("seed", c.seed);
    c.theta = j.value("theta", c.theta);
    if (j.contains("imputation")) {
      c.imputation.kind = parse_imputation(j.at("imputation").get<std::string>());
    }
    c.imputation.neighbor_radius = j.value("neighbor_radius", c.imputation.neighbor_radius);
    if (j.contains("fidelity_mode")) {
      c.fidelity_mode = parse_fidelity_mode(j.at("fidelity_mode").get<std::string>());
    }
    c.ig_steps = j.value("ig_steps", c.ig_steps);
    if (j.contains("ig_baseline")) {
      c.ig_baseline = parse_ig_baseline(j.at("ig_baseline").get<std::string>());
    }
    c.threads = j.value("threads", c.threads);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("run config: ") + e.what());
  }
  c.validate();
  return c;
}

ReportDecisions RunConfig::decisions() const {
  return {kappa, permutations, theta, seed, imputation, fidelity_mode};
}

std::vector<LabeledSample> load_labeled_dataset(const fs::path& dataset_dir,
                                                const Manifest& manifest) {
  std::vector<LabeledSample> data;
  data.reserve(manifest.samples.size());
  for (const auto& e : manifest.samples) {
    data.push_back({Spectrogram(load_matrix(dataset_dir / e.file)).data(), e.label});
  }
  return data;
}

TrainOutcome train_committee(const fs::path& dataset_dir, std::span<const CommitteeMember> members,
                             const TrainConfig& cfg, const fs::path& out_dir) {
  if (members.empty()) throw ConfigError("committee specification is empty");
  const auto manifest = load_manifest(dataset_dir);
  const auto data = load_labeled_dataset(dataset_dir, manifest);
  ensure_directory(out_dir);

  TrainOutcome out;
  nlohmann::ordered_json models = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < members.size(); ++k) {
    TrainConfig member_cfg = cfg;
    member_cfg.seed = members[k].seed;
    const auto result = train(members[k].kind, data, member_cfg, model_id_for(k));
    const auto path = out_dir / ("model_" + result.model->id() + ".json");
    save_model(*result.model, path);
    out.model_files.push_back(path);
    models.push_back({{"id", result.model->id()},
                      {"kind", std::string(to_string(members[k].kind))},
                      {"seed", members[k].seed},
                      {"final_loss", result.final_loss},
                      {"train_accuracy", result.train_accuracy}});
  }
  out.metrics = {{"format", "agrifid-training-metrics"},
                 {"version", 1},
                 {"samples", data.size()},
                 {"config",
                  {{"epochs", cfg.epochs},
                   {"learning_rate", cfg.learning_rate},
                   {"batch_size", cfg.batch_size},
                   {"l2", cfg.l2},
                   {"hidden", cfg.hidden}}},
                 {"models", std::move(models)}};
  save_json_file(out.metrics, out_dir / "training_metrics.json");
  return out;
}

std::vector<ClassifierPtr> load_models(std::span<const fs::path> paths) {
  std::vector<ClassifierPtr> models;
  models.reserve(paths.size());
  for (const auto& p : paths) models.push_back(load_model(p));
  for (std::size_t i = 0; i < models.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (models[i]->id() == models[j]->id()) {
        throw ConfigError("duplicate model id '" + models[i]->id() + "'");
      }
    }
  }
  return models;
}

fs::path mask_path(const fs::path& dir, std::string_view sample_id, std::string_view model_id) {
  return dir / ("mask_" + std::string(sample_id) + "_" + std::string(model_id) + ".csv");
}

fs::path attribution_path(const fs::path& dir, std::string_view sample_id,
                          std::string_view model_id) {
  return dir / ("attr_" + std::string(sample_id) + "_" + std::string(model_id) + ".csv");
}

ExplainOutcome explain_dataset(const fs::path& dataset_dir, std::span<const ClassifierPtr> models,
                               const RunConfig& cfg, const fs::path& out_dir) {
  cfg.validate();
  if (models.empty()) throw ConfigError("explain needs at least one model");
  const auto manifest = load_manifest(dataset_dir);
  std::vector<Spectrogram> samples;
  samples.reserve(manifest.samples.size());
  for (const auto& e : manifest.samples) {
    samples.emplace_back(load_matrix(dataset_dir / e.file));
  }
  ensure_directory(out_dir);

  IgConfig ig;
  ig.steps = cfg.ig_steps;
  ig.baseline = cfg.ig_baseline;
  if (ig.baseline == IgBaseline::ConstantDatasetMin) ig.dataset_min = dataset_min(samples);

  std::vector<ExplainOutcome> per_sample(samples.size());
  parallel_for(samples.size(), cfg.threads, [&](std::size_t i) {
    const auto& entry = manifest.samples[i];
    auto& out = per_sample[i];
    for (const auto& model : models) {
      try {
        const auto attr = integrated_gradients(*model, samples[i].data(), entry.label, ig);
        const auto top = binarize_top_fraction(attr, cfg.kappa);
        save_matrix(attr.data(), attribution_path(out_dir, entry.id, model->id()));
        save_matrix(top.mask.to_matrix(), mask_path(out_dir, entry.id, model->id()));
        ++out.written;
        if (top.degenerate) ++out.degenerate;
      } catch (const Error& e) {
        out.errors.push_back("sample " + entry.id + ", model " + model->id() + ": " + e.what());
      }
    }
  });

  ExplainOutcome total;
  for (auto& o : per_sample) {
    total.written += o.written;
    total.degenerate += o.degenerate;
    for (auto& e : o.errors) total.errors.push_back(std::move(e));
  }
  return total;
}

SampleReport evaluate_sample(std::string sample_id, ClassLabel label, const Spectrogram& x,
                             std::span<const ClassifierPtr> committee,
                             std::span<const BinaryMask> masks,
                             std::span<const std::optional<AttributionMap>> attributions,
                             const RunConfig& cfg) {
  if (committee.size() != masks.size()) {
    throw ArgumentError("committee has " + std::to_string(committee.size()) + " models but " +
                        std::to_string(masks.size()) + " masks were given");
  }
  if (!attributions.empty() && attributions.size() != committee.size()) {
    throw ArgumentError("attribution list does not match committee size");
  }
  for (const auto& m : masks) require_same_shape(m.shape(), x.shape(), "mask vs spectrogram");

  SampleReport report;
  report.sample_id = std::move(sample_id);
  report.label = label;

  NullConfig null_cfg;
  null_cfg.permutations = cfg.permutations;
  null_cfg.seed = cfg.seed;
  null_cfg.sample_id = report.sample_id;
  null_cfg.trend_threshold = cfg.theta;
  null_cfg.threads = 1;
  report.fdr_profile = empirical_fdr(masks, null_cfg);

  const auto fidelity =
      agri_mean_fidelity(committee, x, masks, label, cfg.imputation, cfg.fidelity_mode);
  for (std::size_t k = 0; k < committee.size(); ++k) {
    report.per_model_fidelity.push_back({committee[k]->id(), fidelity.per_model[k]});
  }
  report.mean_fidelity = fidelity.mean;

  for (std::size_t k = 0; k < committee.size(); ++k) {
    ModelBaselines b;
    b.model_id = committee[k]->id();
    b.p_orig = committee[k]->probability(x.data(), label);
    b.faithfulness = faithfulness(*committee[k], x, masks[k], label);
    b.ai_flag = b.faithfulness > b.p_orig;
    if (b.p_orig != 0.0) b.drop = 100.0 * std::max(0.0, b.p_orig - b.faithfulness) / b.p_orig;
    if (b.p_orig != 1.0) {
      b.gain = 100.0 * std::max(0.0, b.faithfulness - b.p_orig) / (1.0 - b.p_orig);
    }
    if (!attributions.empty() && attributions[k]) {
      b.sparseness = sparseness(*attributions[k]);
      b.complexity = complexity(*attributions[k]);
    }
    report.baselines.push_back(std::move(b));
  }
  return report;
}

EvaluationOutcome evaluate_dataset(const fs::path& dataset_dir, const fs::path& masks_dir,
                                   std::span<const ClassifierPtr> committee, const RunConfig& cfg,
                                   const std::optional<std::string>& audit_model_id) {
  cfg.validate();
  if (committee.size() < 2) {
    throw CommitteeSizeError("evaluation needs at least 2 committee models");
  }
  std::vector<std::string> ids;
  for (const auto& m : committee) ids.push_back(m->id());
  if (audit_model_id && std::find(ids.begin(), ids.end(), *audit_model_id) == ids.end()) {
    throw ConfigError("audit model '" + *audit_model_id + "' is not among the loaded models");
  }
  const auto manifest = load_manifest(dataset_dir);

  const std::size_t n = manifest.samples.size();
  std::vector<std::optional<SampleReport>> reports(n);
  std::vector<std::optional<std::string>> failures(n);
  parallel_for(n, cfg.threads, [&](std::size_t i) {
    const auto& entry = manifest.samples[i];
    try {
      const Spectrogram x(load_matrix(dataset_dir / entry.file));
      std::vector<BinaryMask> masks;
      std::vector<std::optional<AttributionMap>> attrs;
      for (const auto& id : ids) {
        const auto mp = mask_path(masks_dir, entry.id, id);
        if (!fs::exists(mp)) {
          failures[i] = "missing mask file " + mp.filename().string();
          return;
        }
        masks.push_back(BinaryMask::from_matrix(load_matrix(mp)));
        const auto ap = attribution_path(masks_dir, entry.id, id);
        if (fs::exists(ap)) {
          attrs.emplace_back(AttributionMap(load_matrix(ap), id));
        } else {
          attrs.emplace_back(std::nullopt);
        }
      }
      reports[i] = evaluate_sample(entry.id, entry.label, x, committee, masks, attrs, cfg);
    } catch (const Error& e) {
      failures[i] = e.what();
    }
  });

  EvaluationOutcome out;
  for (std::size_t i = 0; i < n; ++i) {
    if (reports[i]) {
      out.samples.push_back(std::move(*reports[i]));
    } else {
      out.skipped.push_back({manifest.samples[i].id, failures[i].value_or("unknown failure")});
    }
  }
  std::sort(out.samples.begin(), out.samples.end(),
            [](const SampleReport& a, const SampleReport& b) { return a.sample_id < b.sample_id; });
  std::sort(out.skipped.begin(), out.skipped.end(),
            [](const SkippedSample& a, const SkippedSample& b) { return a.sample_id < b.sample_id; });
  out.report = build_report_json(out.samples, out.skipped, cfg.decisions(), ids, audit_model_id);
  out.per_sample_csv = per_sample_csv(out.samples);
  return out;
}

void write_evaluation(const EvaluationOutcome& outcome, const fs::path& out_dir) {
  ensure_directory(out_dir);
  save_json_file(outcome.report, out_dir / "report.json");
  write_text_file(out_dir / "per_sample.csv", outcome.per_sample_csv);
}

PipelineOutcome run_pipeline(const PipelineConfig& cfg, const fs::path& work_dir) {
  const auto data = work_dir / "data";
  const auto models_dir = work_dir / "models";
  const auto masks = work_dir / "masks";
  gen_dataset(cfg.synth, data);
  PipelineOutcome out;
  out.training = train_committee(data, cfg.committee, cfg.train, models_dir);
  const auto models = load_models(out.training.model_files);
  out.explain = explain_dataset(data, models, cfg.run, masks);
  out.evaluation = evaluate_dataset(data, masks, models, cfg.run);
  write_evaluation(out.evaluation, work_dir / "report");
  return out;
}

PipelineConfig seeded_pipeline(PipelineConfig cfg, std::uint64_t master_seed) {
  cfg.synth.seed = derive_key({master_seed, 1});
  for (std::size_t k = 0; k < cfg.committee.size(); ++k) {
    cfg.committee[k].seed = derive_key({master_seed, 2, k});
  }
  cfg.run.seed = derive_key({master_seed, 3});
  return cfg;
}

}  // namespace agrifid
