#pragma once

// Synthetic spectrogram datasets with known ground truth.
//
// Background is i.i.d. Gaussian noise. Unhealthy samples carry a band-limited
// burst of `duration` frames at a per-sample onset drawn uniformly from
// [0, T - duration] (the sparse, time-localized regime). With
// spurious_injection, every Unhealthy sample additionally carries a constant
// artifact band over all T frames (the stationary regime). Each sample's
// random streams are keyed by (seed, sample_index).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "agrifid/committee.hpp"
#include "agrifid/matrix.hpp"

namespace agrifid {

struct BandRange {
  std::size_t lo = 0;  // inclusive
  std::size_t hi = 0;  // exclusive

  std::size_t width() const { return hi - lo; }
  bool contains(std::size_t f) const { return f >= lo && f < hi; }
  friend bool operator==(const BandRange&, const BandRange&) = default;
};

struct EventSpec {
  BandRange band{8, 16};
  std::size_t duration = 12;  // tau, frames
  double amplitude = 1.0;
};

struct ArtifactSpec {
  BandRange band{56, 59};
  double amplitude = 1.0;
};

struct SynthConfig {
  std::size_t frames = 128;  // T
  std::size_t bins = 64;     // F
  std::size_t n_per_class = 50;
  double noise_std = 0.1;
  EventSpec event;
  ArtifactSpec artifact;
  bool spurious_injection = false;
  std::uint64_t seed = 7;

  // Throws ConfigError on empty dimensions, out-of-range bands or durations.
  void validate() const;
  nlohmann::ordered_json to_json() const;
  // Missing keys keep their defaults; unknown keys are rejected.
  static SynthConfig from_json(const nlohmann::json& j);
};

struct TimeWindow {
  std::size_t onset = 0;
  std::size_t end = 0;  // exclusive
  friend bool operator==(const TimeWindow&, const TimeWindow&) = default;
};

struct GroundTruth {
  std::optional<TimeWindow> event_window;  // Unhealthy only
  BandRange event_band;
  std::optional<BandRange> artifact_band;  // Unhealthy with injection only
};

struct SyntheticSample {
  Spectrogram x;
  GroundTruth truth;
};

SyntheticSample gen_sample(ClassLabel label, const SynthConfig& cfg, std::size_t sample_index);

struct ManifestEntry {
  std::string id;
  std::string file;
  ClassLabel label = ClassLabel::Healthy;
  GroundTruth truth;
};

struct Manifest {
  SynthConfig config;
  std::vector<ManifestEntry> samples;

  nlohmann::ordered_json to_json() const;
  static Manifest from_json(const nlohmann::json& j);
};

std::string sample_id_for(std::size_t index);

// Sample i is Healthy for i < n_per_class and Unhealthy afterwards. Writes
// <out>/spec_<id>.csv per sample and <out>/manifest.json.
Manifest gen_dataset(const SynthConfig& cfg, const std::filesystem::path& out_dir);
Manifest load_manifest(const std::filesystem::path& dataset_dir);

}  // namespace agrifid
