#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tienet/ann.hpp"
#include "tienet/metrics.hpp"
#include "tienet/optics.hpp"
#include "tienet/specimen.hpp"
#include "tienet/tie.hpp"

namespace tienet {

struct ExperimentConfig {
  std::size_t resolution = 32;
  double width = 150.0;                // nm
  double accelerating_voltage = 3.0e5; // V
  double defocus = 8.0e3;              // nm
  double noise_level = 0.15;
  std::size_t train_count = 500;
  std::size_t test_count = 100;
  std::uint64_t master_seed = 1;
  std::size_t zslices = kDefaultZSlices;
  bool save_micrographs = false;
  /// Zero network inputs outside the analysis disk before flattening.
  bool mask_inputs = false;
  /// Feed offset-corrected retrieved phases to training and evaluation.
  bool offset_correct = false;
  std::size_t hidden = 0;  // 0 means hidden = resolution^2
  /// 0 picks the hardware concurrency.
  std::size_t threads = 0;
  Apodization apodize = Apodization::Derivative;
  WindowShape window_shape = WindowShape::Hard;
  TrainConfig train{0.5, 50, 50, 10, 0};
  SpecimenRanges ranges;

  std::size_t inputs() const { return resolution * resolution; }
  std::size_t hidden_size() const { return hidden == 0 ? inputs() : hidden; }
  OpticsConfig optics() const;
  TieConfig tie() const;
  void validate() const;

  /// Named presets: "full" (m = 128, 5000 train pairs as 100 x 50),
  /// "desk32" (m = 32, 500 pairs as 10 x 50) and "desk64" (m = 64, 1000 pairs).
  static ExperimentConfig preset(const std::string& name);
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
/// Keys missing from `j` keep their current values, so a config file only
/// needs to name what it changes. A "preset" key is applied first.
void update_from_json(ExperimentConfig& c, const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

nlohmann::json spec_to_json(const SpecimenSpec& spec);
SpecimenSpec spec_from_json(const nlohmann::json& j);

struct Micrographs {
  std::string under, in_focus, over;
};

struct ManifestEntry {
  std::string id;
  std::string split;  // "train" or "test"
  std::uint64_t seed = 0;
  SpecimenSpec spec;
  double defocus = 0.0;
  double noise_level = 0.0;
  std::string exact_phase;      // relative to the manifest directory
  std::string retrieved_phase;
  std::optional<Micrographs> micrographs;
};

struct DatasetManifest {
  std::uint64_t master_seed = 0;
  std::size_t resolution = 0;
  double width = 0.0;
  nlohmann::json optics;  // echo of the derived optics constants
  nlohmann::json config;  // echo of the full experiment config
  std::vector<ManifestEntry> entries;

  std::vector<const ManifestEntry*> split(const std::string& name) const;
};

nlohmann::json manifest_to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(const nlohmann::json& j);
void save_manifest(const std::filesystem::path& dir, const DatasetManifest& m);
/// Loads `dir/manifest.json` and checks that every referenced field exists
/// and parses as PHF1, and that entry ids are unique.
DatasetManifest load_manifest(const std::filesystem::path& dir);

struct SimulatedPair {
  SpecimenSpec spec;
  ScalarField exact;
  ScalarField retrieved;
  DefocusSeries series;  // after noise
};

/// sample -> thickness -> exact phase and exit wave -> defocus series ->
/// shot noise (subseeds derive_seed(seed, streams::noise, 0..2) for I-, I0, I+)
/// -> TIE retrieval.
SimulatedPair simulate_pair(std::uint64_t seed, const ExperimentConfig& cfg);

/// Entry i of split s uses derive_seed(master_seed, stream(s), i), with
/// distinct streams for train and test.
DatasetManifest generate_dataset(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

struct InputOptions {
  bool offset_correct = false;
  bool mask_inputs = false;
};

/// Network input for one entry: the retrieved phase, optionally offset
/// corrected against the exact phase and/or zeroed outside the disk.
ScalarField network_input(const ScalarField& retrieved, const ScalarField& exact,
                          const InputOptions& options);

struct TrainingRun {
  Network net;
  std::vector<double> loss_history;
};

/// Trains on the manifest's train split and writes the ANN1 checkpoint plus a
/// "<checkpoint>.loss.csv" history file.
TrainingRun run_training(const DatasetManifest& manifest, const std::filesystem::path& dataset_dir,
                         const ExperimentConfig& cfg, const std::filesystem::path& checkpoint);

struct EvaluationOptions {
  InputOptions inputs;
  std::optional<std::filesystem::path> error_map_dir;
};

ErrorReport run_evaluation(const DatasetManifest& manifest, const std::filesystem::path& dataset_dir,
                           const Network& net, const EvaluationOptions& options);

nlohmann::json report_to_json(const ErrorReport& report, const nlohmann::json& config_echo);

/// Binary 8-bit PGM, linear map [lo, hi] -> [0, 255] with clamping. Pixel
/// value is floor(255 (v - lo) / (hi - lo) + 0.5), so the midpoint maps to 128.
std::vector<std::uint8_t> render_pgm(const ScalarField& field, double lo, double hi);
void render(const std::filesystem::path& field_path, const std::filesystem::path& out_path,
            double lo = -3.0, double hi = 3.0);

}  // namespace tienet
