#include "agrifid/synthgen.hpp"

#include <cmath>
#include <cstdio>

#include "agrifid/error.hpp"
#include "agrifid/json_io.hpp"
#include "agrifid/matrix_io.hpp"
#include "agrifid/random.hpp"

namespace agrifid {
namespace {

constexpr std::uint64_t kNoiseStream = 11;
constexpr std::uint64_t kOnsetStream = 12;

nlohmann::ordered_json band_json(const BandRange& b) { return {b.lo, b.hi}; }

BandRange band_from_json(const nlohmann::json& j, const char* what) {
  const auto v = j.get<std::vector<std::size_t>>();
  if (v.size() != 2) throw ConfigError(std::string(what) + ": band must be [lo, hi]");
  return {v[0], v[1]};
}

void check_band(const BandRange& b, std::size_t bins, const char* what) {
  if (b.lo >= b.hi || b.hi > bins) {
    throw ConfigError(std::string(what) + " band [" + std::to_string(b.lo) + ", " +
                      std::to_string(b.hi) + ") must be non-empty and within [0, " +
                      std::to_string(bins) + ")");
  }
}

}  // namespace

void SynthConfig::validate() const {
  if (frames == 0 || bins == 0) throw ConfigError("synth: frames and bins must be positive");
  if (n_per_class == 0) throw ConfigError("synth: n_per_class must be positive");
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) {
    throw ConfigError("synth: noise_std must be finite and >= 0");
  }
  check_band(event.band, bins, "synth: event");
  if (event.duration < 1 || event.duration > frames) {
    throw ConfigError("synth: event duration " + std::to_string(event.duration) +
                      " must lie in [1, " + std::to_string(frames) + "]");
  }
  if (!std::isfinite(event.amplitude)) throw ConfigError("synth: event amplitude not finite");
  check_band(artifact.band, bins, "synth: artifact");
  if (!std::isfinite(artifact.amplitude)) throw ConfigError("synth: artifact amplitude not finite");
}

nlohmann::ordered_json SynthConfig::to_json() const {
  nlohmann::ordered_json j;
  j["frames"] = frames;
  j["bins"] = bins;
  j["n_per_class"] = n_per_class;
  j["noise_std"] = noise_std;
  j["event"] = {{"band", band_json(event.band)},
                {"duration", event.duration},
                {"amplitude", event.amplitude}};
  j["artifact"] = {{"band", band_json(artifact.band)}, {"amplitude", artifact.amplitude}};
  j["spurious_injection"] = spurious_injection;
  j["seed"] = seed;
  return j;
}

SynthConfig SynthConfig::from_json(const nlohmann::json& j) {
  require_known_keys(j,
                     {"frames", "bins", "n_per_class", "noise_std", "event", "artifact",
                      "spurious_injection", "seed"},
                     "synth config");
  SynthConfig c;
  try {
    c.frames = j.value("frames", c.frames);
    c.bins = j.value("bins", c.bins);
    c.n_per_class = j.value("n_per_class", c.n_per_class);
    c.noise_std = j.value("noise_std", c.noise_std);
    if (j.contains("event")) {
      const auto& e = j.at("event");
      require_known_keys(e, {"band", "duration", "amplitude"}, "synth config event");
      if (e.contains("band")) c.event.band = band_from_json(e.at("band"), "event");
      c.event.duration = e.value("duration", c.event.duration);
      c.event.amplitude = e.value("amplitude", c.event.amplitude);
    }
    if (j.contains("artifact")) {
      const auto& a = j.at("artifact");
      require_known_keys(a, {"band", "amplitude"}, "synth config artifact");
      if (a.contains("band")) c.artifact.band = band_from_json(a.at("band"), "artifact");
      c.artifact.amplitude = a.value("amplitude", c.artifact.amplitude);
    }
    c.spurious_injection = j.value("spurious_injection", c.spurious_injection);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("synth config: ") + e.what());
  }
  c.validate();
  return c;
}

SyntheticSample gen_sample(ClassLabel label, const SynthConfig& cfg, std::size_t sample_index) {
  cfg.validate();
  Matrix x(cfg.frames, cfg.bins);
  SplitMix64 noise(derive_key({cfg.seed, sample_index, kNoiseStream}));
  for (auto& v : x.values()) v = cfg.noise_std * noise.normal();

  GroundTruth truth;
  truth.event_band = cfg.event.band;
  if (label == ClassLabel::Unhealthy) {
    SplitMix64 onset_rng(derive_key({cfg.seed, sample_index, kOnsetStream}));
    const auto onset =
        static_cast<std::size_t>(onset_rng.below(cfg.frames - cfg.event.duration + 1));
    truth.event_window = TimeWindow{onset, onset + cfg.event.duration};
    for (std::size_t t = onset; t < onset + cfg.event.duration; ++t) {
      for (std::size_t f = cfg.event.band.lo; f < cfg.event.band.hi; ++f) {
        x(t, f) += cfg.event.amplitude;
      }
    }
    if (cfg.spurious_injection) {
      truth.artifact_band = cfg.artifact.band;
      for (std::size_t t = 0; t < cfg.frames; ++t) {
        for (std::size_t f = cfg.artifact.band.lo; f < cfg.artifact.band.hi; ++f) {
          x(t, f) += cfg.artifact.amplitude;
        }
      }
    }
  }
  return {Spectrogram(std::move(x)), truth};
}

std::string sample_id_for(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04zu", index);
  return buf;
}

nlohmann::ordered_json Manifest::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = "agrifid-dataset";
  j["version"] = 1;
  j["seed"] = config.seed;
  j["config"] = config.to_json();
  auto& list = j["samples"] = nlohmann::ordered_json::array();
  for (const auto& s : samples) {
    nlohmann::ordered_json e;
    e["id"] = s.id;
    e["file"] = s.file;
    e["label"] = std::string(to_string(s.label));
    if (s.truth.event_window) {
      e["event_window"] = {s.truth.event_window->onset, s.truth.event_window->end};
    } else {
      e["event_window"] = nullptr;
    }
    e["event_band"] = band_json(s.truth.event_band);
    e["artifact_band"] =
        s.truth.artifact_band ? band_json(*s.truth.artifact_band) : nlohmann::ordered_json();
    list.push_back(std::move(e));
  }
  return j;
}

Manifest Manifest::from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", std::string()) != "agrifid-dataset") {
      throw ConfigError("manifest: missing agrifid-dataset format tag");
    }
    Manifest m;
    m.config = SynthConfig::from_json(j.at("config"));
    for (const auto& e : j.at("samples")) {
      ManifestEntry entry;
      entry.id = e.at("id").get<std::string>();
      entry.file = e.at("file").get<std::string>();
      entry.label = parse_label(e.at("label").get<std::string>());
      if (!e.at("event_window").is_null()) {
        const auto w = e.at("event_window").get<std::vector<std::size_t>>();
        if (w.size() != 2) throw ConfigError("manifest: event_window must be [onset, end]");
        entry.truth.event_window = TimeWindow{w[0], w[1]};
      }
      entry.truth.event_band = band_from_json(e.at("event_band"), "event");
      if (!e.at("artifact_band").is_null()) {
        entry.truth.artifact_band = band_from_json(e.at("artifact_band"), "artifact");
      }
      m.samples.push_back(std::move(entry));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("manifest: ") + e.what());
  }
}

Manifest gen_dataset(const SynthConfig& cfg, const std::filesystem::path& out_dir) {
  cfg.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir.string() + "': " + ec.message());

  Manifest manifest;
  manifest.config = cfg;
  const std::size_t total = 2 * cfg.n_per_class;
  for (std::size_t i = 0; i < total; ++i) {
    const ClassLabel label = i < cfg.n_per_class ? ClassLabel::Healthy : ClassLabel::Unhealthy;
    auto sample = gen_sample(label, cfg, i);
    ManifestEntry entry;
    entry.id = sample_id_for(i);
    entry.file = "spec_" + entry.id + ".csv";
    entry.label = label;
    entry.truth = sample.truth;
    save_matrix(sample.x.data(), out_dir / entry.file);
    manifest.samples.push_back(std::move(entry));
  }
  save_json_file(manifest.to_json(), out_dir / "manifest.json");
  return manifest;
}

Manifest load_manifest(const std::filesystem::path& dataset_dir) {
  const auto path = dataset_dir / "manifest.json";
  try {
    return Manifest::from_json(load_json_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace agrifid
