#include "tienet/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "tienet/error.hpp"
#include "tienet/field_io.hpp"
#include "tienet/seeds.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace tienet {

// ---------------------------------------------------------------------------
// configuration

OpticsConfig ExperimentConfig::optics() const {
  return OpticsConfig::make(accelerating_voltage, defocus, noise_level, ranges.potential);
}

TieConfig ExperimentConfig::tie() const {
  TieConfig t = TieConfig::standard(1.0, width, resolution);
  t.apodize = apodize;
  t.window_shape = window_shape;
  return t;
}

void ExperimentConfig::validate() const {
  check_grid_size(resolution);
  if (!(width > 0.0)) throw Error(ErrorCode::Configuration, "width must be positive");
  if (test_count == 0) throw Error(ErrorCode::Configuration, "test set must not be empty");
  if (zslices < 64) throw Error(ErrorCode::Configuration, "zslices must be >= 64");
  train.validate();
  if (train_count != train.batch_size * train.batch_count) {
    throw Error(ErrorCode::Configuration,
                "train_count must equal batch_size * batch_count (" +
                    std::to_string(train.batch_size) + " x " + std::to_string(train.batch_count) +
                    " != " + std::to_string(train_count) + ")");
  }
  optics();
  tie().validate();
}

ExperimentConfig ExperimentConfig::preset(const std::string& name) {
  ExperimentConfig c;
  if (name == "desk32") return c;
  if (name == "desk64") {
    c.resolution = 64;
    c.train_count = 1000;
    c.train.batch_count = 20;
    return c;
  }
  if (name == "full") {
    c.resolution = 128;
    c.train_count = 5000;
    c.train.batch_count = 100;
    return c;
  }
  throw Error(ErrorCode::Configuration, "unknown preset '" + name + "'");
}

namespace {

std::string apodize_name(Apodization a) {
  switch (a) {
    case Apodization::None: return "none";
    case Apodization::Derivative: return "derivative";
    case Apodization::Micrographs: return "micrographs";
  }
  return "derivative";
}

Apodization apodize_from(const std::string& s) {
  if (s == "none") return Apodization::None;
  if (s == "derivative") return Apodization::Derivative;
  if (s == "micrographs") return Apodization::Micrographs;
  throw Error(ErrorCode::Configuration, "unknown apodization '" + s + "'");
}

std::string window_name(WindowShape w) { return w == WindowShape::Hard ? "hard" : "raised-cosine"; }

WindowShape window_from(const std::string& s) {
  if (s == "hard") return WindowShape::Hard;
  if (s == "raised-cosine") return WindowShape::RaisedCosine;
  throw Error(ErrorCode::Configuration, "unknown window shape '" + s + "'");
}

template <typename T>
void take(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

json complex_json(Complex c) { return json::array({c.real(), c.imag()}); }

Complex complex_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

}  // namespace

void to_json(json& j, const ExperimentConfig& c) {
  const auto& r = c.ranges;
  j = json{
      {"resolution", c.resolution},
      {"width_nm", c.width},
      {"accelerating_voltage", c.accelerating_voltage},
      {"defocus_nm", c.defocus},
      {"noise_level", c.noise_level},
      {"train_count", c.train_count},
      {"test_count", c.test_count},
      {"master_seed", c.master_seed},
      {"zslices", c.zslices},
      {"save_micrographs", c.save_micrographs},
      {"mask_inputs", c.mask_inputs},
      {"offset_correct", c.offset_correct},
      {"hidden", c.hidden_size()},
      {"apodize", apodize_name(c.apodize)},
      {"window_shape", window_name(c.window_shape)},
      {"train",
       {{"learning_rate", c.train.learning_rate},
        {"epochs", c.train.epochs},
        {"batch_size", c.train.batch_size},
        {"batch_count", c.train.batch_count},
        {"shuffle_seed", c.train.shuffle_seed},
        {"cost_reduction", c.train.reduction == CostReduction::Sum ? "sum" : "pixel-mean"}}},
      {"specimen",
       {{"half_extent_min", r.half_extent_min},
        {"half_extent_max", r.half_extent_max},
        {"centre_max", r.centre_max},
        {"footprint_radius", r.footprint_radius},
        {"footprint_margin", r.footprint_margin},
        {"max_thickness", r.max_thickness},
        {"twist_max", r.twist_max},
        {"taper_min", r.taper_min},
        {"taper_max", r.taper_max},
        {"ripple_max", r.ripple_max},
        {"potential", complex_json(r.potential)},
        {"max_attempts", r.max_attempts}}},
  };
}

void update_from_json(ExperimentConfig& c, const json& j) {
  try {
    if (j.contains("preset")) c = ExperimentConfig::preset(j.at("preset").get<std::string>());
    take(j, "resolution", c.resolution);
    take(j, "width_nm", c.width);
    take(j, "accelerating_voltage", c.accelerating_voltage);
    take(j, "defocus_nm", c.defocus);
    take(j, "noise_level", c.noise_level);
    take(j, "train_count", c.train_count);
    take(j, "test_count", c.test_count);
    take(j, "master_seed", c.master_seed);
    take(j, "zslices", c.zslices);
    take(j, "save_micrographs", c.save_micrographs);
    take(j, "mask_inputs", c.mask_inputs);
    take(j, "offset_correct", c.offset_correct);
    take(j, "hidden", c.hidden);
    take(j, "threads", c.threads);
    if (j.contains("apodize")) c.apodize = apodize_from(j.at("apodize").get<std::string>());
    if (j.contains("window_shape")) {
      c.window_shape = window_from(j.at("window_shape").get<std::string>());
    }
    if (j.contains("train")) {
      const auto& t = j.at("train");
      take(t, "learning_rate", c.train.learning_rate);
      take(t, "epochs", c.train.epochs);
      take(t, "batch_size", c.train.batch_size);
      take(t, "batch_count", c.train.batch_count);
      take(t, "shuffle_seed", c.train.shuffle_seed);
      if (t.contains("cost_reduction")) {
        const auto r = t.at("cost_reduction").get<std::string>();
        if (r == "sum") {
          c.train.reduction = CostReduction::Sum;
        } else if (r == "pixel-mean") {
          c.train.reduction = CostReduction::PixelMean;
        } else {
          throw Error(ErrorCode::Configuration, "unknown cost_reduction '" + r + "'");
        }
      }
    }
    if (j.contains("specimen")) {
      auto& r = c.ranges;
      const auto& s = j.at("specimen");
      take(s, "half_extent_min", r.half_extent_min);
      take(s, "half_extent_max", r.half_extent_max);
      take(s, "centre_max", r.centre_max);
      take(s, "footprint_radius", r.footprint_radius);
      take(s, "footprint_margin", r.footprint_margin);
      take(s, "max_thickness", r.max_thickness);
      take(s, "twist_max", r.twist_max);
      take(s, "taper_min", r.taper_min);
      take(s, "taper_max", r.taper_max);
      take(s, "ripple_max", r.ripple_max);
      take(s, "max_attempts", r.max_attempts);
      if (s.contains("potential")) r.potential = complex_from(s.at("potential"));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Configuration, std::string("bad config: ") + e.what());
  }
  c.ranges.width = c.width;
}

ExperimentConfig load_config(const fs::path& path) {
  const auto bytes = read_bytes(path);
  json j;
  try {
    j = json::parse(bytes.begin(), bytes.end());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Configuration, path.string() + ": " + e.what());
  }
  ExperimentConfig c;
  update_from_json(c, j);
  return c;
}

// ---------------------------------------------------------------------------
// specimen and manifest serialisation

json spec_to_json(const SpecimenSpec& s) {
  json mods = json::array();
  for (const auto& d : s.modifiers) {
    if (const auto* t = std::get_if<Twist>(&d)) {
      mods.push_back({{"kind", "twist"}, {"angle", t->angle}});
    } else if (const auto* p = std::get_if<Taper>(&d)) {
      mods.push_back({{"kind", "taper"}, {"factor", p->factor}});
    } else {
      const auto& r = std::get<Ripple>(d);
      mods.push_back({{"kind", "ripple"}, {"amplitude", r.amplitude}, {"cycles", r.cycles}});
    }
  }
  return {
      {"seed", s.seed},
      {"half_extents", s.half_extents},
      {"centre", s.centre},
      {"rotation", {s.rotation.w, s.rotation.x, s.rotation.y, s.rotation.z}},
      {"modifiers", mods},
      {"potential", complex_json(s.potential)},
  };
}

SpecimenSpec spec_from_json(const json& j) {
  SpecimenSpec s;
  s.seed = j.at("seed").get<std::uint64_t>();
  s.half_extents = j.at("half_extents").get<Vec3>();
  s.centre = j.at("centre").get<std::array<double, 2>>();
  const auto q = j.at("rotation").get<std::array<double, 4>>();
  s.rotation = {q[0], q[1], q[2], q[3]};
  for (const auto& m : j.at("modifiers")) {
    const auto kind = m.at("kind").get<std::string>();
    if (kind == "twist") {
      s.modifiers.emplace_back(Twist{m.at("angle").get<double>()});
    } else if (kind == "taper") {
      s.modifiers.emplace_back(Taper{m.at("factor").get<double>()});
    } else if (kind == "ripple") {
      s.modifiers.emplace_back(Ripple{m.at("amplitude").get<double>(), m.at("cycles").get<int>()});
    } else {
      throw Error(ErrorCode::Format, "unknown modifier kind '" + kind + "'");
    }
  }
  s.potential = complex_from(j.at("potential"));
  return s;
}

std::vector<const ManifestEntry*> DatasetManifest::split(const std::string& name) const {
  std::vector<const ManifestEntry*> out;
  for (const auto& e : entries) {
    if (e.split == name) out.push_back(&e);
  }
  return out;
}

json manifest_to_json(const DatasetManifest& m) {
  json entries = json::array();
  for (const auto& e : m.entries) {
    json je = {
        {"id", e.id},
        {"split", e.split},
        {"seed", e.seed},
        {"spec", spec_to_json(e.spec)},
        {"defocus_nm", e.defocus},
        {"noise_level", e.noise_level},
        {"exact_phase", e.exact_phase},
        {"retrieved_phase", e.retrieved_phase},
    };
    if (e.micrographs) {
      je["micrographs"] = {{"under", e.micrographs->under},
                           {"in_focus", e.micrographs->in_focus},
                           {"over", e.micrographs->over}};
    }
    entries.push_back(std::move(je));
  }
  return {
      {"format", "tienet-dataset-1"},
      {"master_seed", m.master_seed},
      {"count", m.entries.size()},
      {"grid", {{"m", m.resolution}, {"a_nm", m.width}}},
      {"optics", m.optics},
      {"config", m.config},
      {"entries", entries},
  };
}

DatasetManifest manifest_from_json(const json& j) {
  DatasetManifest m;
  try {
    m.master_seed = j.at("master_seed").get<std::uint64_t>();
    m.resolution = j.at("grid").at("m").get<std::size_t>();
    m.width = j.at("grid").at("a_nm").get<double>();
    m.optics = j.at("optics");
    m.config = j.at("config");
    for (const auto& je : j.at("entries")) {
      ManifestEntry e;
      e.id = je.at("id").get<std::string>();
      e.split = je.at("split").get<std::string>();
      e.seed = je.at("seed").get<std::uint64_t>();
      e.spec = spec_from_json(je.at("spec"));
      e.defocus = je.at("defocus_nm").get<double>();
      e.noise_level = je.at("noise_level").get<double>();
      e.exact_phase = je.at("exact_phase").get<std::string>();
      e.retrieved_phase = je.at("retrieved_phase").get<std::string>();
      if (je.contains("micrographs")) {
        const auto& mj = je.at("micrographs");
        e.micrographs = Micrographs{mj.at("under").get<std::string>(),
                                    mj.at("in_focus").get<std::string>(),
                                    mj.at("over").get<std::string>()};
      }
      m.entries.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Format, std::string("bad manifest: ") + e.what());
  }
  return m;
}

void save_manifest(const fs::path& dir, const DatasetManifest& m) {
  write_text(dir / "manifest.json", manifest_to_json(m).dump(2) + "\n");
}

DatasetManifest load_manifest(const fs::path& dir) {
  const auto bytes = read_bytes(dir / "manifest.json");
  json j;
  try {
    j = json::parse(bytes.begin(), bytes.end());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Format, (dir / "manifest.json").string() + ": " + e.what());
  }
  DatasetManifest m = manifest_from_json(j);
  std::set<std::string> ids;
  for (const auto& e : m.entries) {
    if (!ids.insert(e.id).second) throw Error(ErrorCode::Format, "duplicate entry id " + e.id);
    std::vector<std::string> paths{e.exact_phase, e.retrieved_phase};
    if (e.micrographs) {
      paths.insert(paths.end(), {e.micrographs->under, e.micrographs->in_focus, e.micrographs->over});
    }
    for (const auto& p : paths) {
      const auto f = read_scalar_field(dir / p);
      if (f.size() != m.resolution || f.width() != m.width) {
        throw Error(ErrorCode::ShapeMismatch, p + " does not match the manifest grid");
      }
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// generation

SimulatedPair simulate_pair(std::uint64_t seed, const ExperimentConfig& cfg) {
  SpecimenRanges ranges = cfg.ranges;
  ranges.width = cfg.width;
  SimulatedPair out;
  out.spec = sample_spec(seed, ranges);
  OpticsConfig optics = cfg.optics();
  optics.potential = out.spec.potential;

  const ScalarField t = thickness_map(out.spec, cfg.resolution, cfg.width, cfg.zslices);
  out.exact = exact_phase(t, optics);
  const ComplexField psi = exit_wave(t, optics);
  out.series = defocus_series(psi, optics.defocus, optics.wavelength);
  if (optics.noise_level > 0.0) {
    const double i_in = optics.incident_intensity;
    out.series.under = add_shot_noise(out.series.under, optics.noise_level, i_in,
                                      derive_seed(seed, streams::noise, 0));
    out.series.in_focus = add_shot_noise(out.series.in_focus, optics.noise_level, i_in,
                                         derive_seed(seed, streams::noise, 1));
    out.series.over = add_shot_noise(out.series.over, optics.noise_level, i_in,
                                     derive_seed(seed, streams::noise, 2));
  }
  out.retrieved = retrieve_phase(out.series.under, out.series.in_focus, out.series.over, optics,
                                 cfg.tie());
  return out;
}

namespace {

std::string entry_id(const std::string& split, std::size_t index) {
  std::ostringstream s;
  s << split << '-';
  s.width(5);
  s.fill('0');
  s << index;
  return s.str();
}

// Runs fn(i) for i in [0, n) on `threads` workers with a static interleaved
// partition; the first exception (lowest index) is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(n, 1));
  std::vector<std::exception_ptr> errors(n);
  auto work = [&](std::size_t w) {
    for (std::size_t i = w; i < n; i += threads) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(work, w);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

DatasetManifest generate_dataset(const ExperimentConfig& cfg, const fs::path& out_dir) {
  cfg.validate();
  std::error_code ec;
  fs::create_directories(out_dir / "fields", ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + (out_dir / "fields").string());

  const OpticsConfig optics = cfg.optics();
  DatasetManifest manifest;
  manifest.master_seed = cfg.master_seed;
  manifest.resolution = cfg.resolution;
  manifest.width = cfg.width;
  manifest.optics = {
      {"accelerating_voltage", optics.accelerating_voltage},
      {"wavelength_nm", optics.wavelength},
      {"wavenumber_rad_per_nm", optics.wavenumber},
      {"interaction_constant", optics.interaction},
      {"potential", complex_json(optics.potential)},
      {"defocus_nm", optics.defocus},
      {"incident_intensity", optics.incident_intensity},
      {"noise_level", optics.noise_level},
  };
  manifest.config = cfg;

  struct Job {
    std::string split;
    std::size_t index;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < cfg.train_count; ++i) {
    jobs.push_back({"train", i, derive_seed(cfg.master_seed, streams::train, i)});
  }
  for (std::size_t i = 0; i < cfg.test_count; ++i) {
    jobs.push_back({"test", i, derive_seed(cfg.master_seed, streams::test, i)});
  }

  manifest.entries.resize(jobs.size());
  parallel_for(jobs.size(), cfg.threads, [&](std::size_t k) {
    const Job& job = jobs[k];
    const SimulatedPair pair = simulate_pair(job.seed, cfg);
    ManifestEntry& e = manifest.entries[k];
    e.id = entry_id(job.split, job.index);
    e.split = job.split;
    e.seed = job.seed;
    e.spec = pair.spec;
    e.defocus = cfg.defocus;
    e.noise_level = cfg.noise_level;
    e.exact_phase = "fields/" + e.id + "_exact.phf";
    e.retrieved_phase = "fields/" + e.id + "_retrieved.phf";
    write_field(out_dir / e.exact_phase, pair.exact);
    write_field(out_dir / e.retrieved_phase, pair.retrieved);
    if (cfg.save_micrographs) {
      Micrographs mg{"fields/" + e.id + "_under.phf", "fields/" + e.id + "_infocus.phf",
                     "fields/" + e.id + "_over.phf"};
      write_field(out_dir / mg.under, pair.series.under);
      write_field(out_dir / mg.in_focus, pair.series.in_focus);
      write_field(out_dir / mg.over, pair.series.over);
      e.micrographs = mg;
    }
  });

  save_manifest(out_dir, manifest);
  return manifest;
}

// ---------------------------------------------------------------------------
// training and evaluation

ScalarField network_input(const ScalarField& retrieved, const ScalarField& exact,
                          const InputOptions& options) {
  const DiskMask mask = disk_mask(retrieved.size());
  ScalarField in = options.offset_correct ? offset_correct(retrieved, exact, mask) : retrieved;
  if (options.mask_inputs) {
    for (std::size_t i = 0; i < in.count(); ++i) {
      if (!mask[i]) in[i] = 0.0;
    }
  }
  return in;
}

TrainingRun run_training(const DatasetManifest& manifest, const fs::path& dataset_dir,
                         const ExperimentConfig& cfg, const fs::path& checkpoint) {
  const auto train_entries = manifest.split("train");
  if (cfg.resolution != manifest.resolution) {
    throw Error(ErrorCode::Configuration, "config resolution does not match the dataset");
  }
  if (train_entries.size() != cfg.train.batch_size * cfg.train.batch_count) {
    throw Error(ErrorCode::Configuration,
                "dataset holds " + std::to_string(train_entries.size()) +
                    " training pairs but the config asks for " +
                    std::to_string(cfg.train.batch_size) + " x " +
                    std::to_string(cfg.train.batch_count));
  }
  const InputOptions opts{cfg.offset_correct, cfg.mask_inputs};
  std::vector<TrainingPair> pairs;
  pairs.reserve(train_entries.size());
  for (const auto* e : train_entries) {
    const ScalarField exact = read_scalar_field(dataset_dir / e->exact_phase);
    const ScalarField retrieved = read_scalar_field(dataset_dir / e->retrieved_phase);
    const ScalarField input = network_input(retrieved, exact, opts);
    pairs.push_back({input.storage(), exact.storage()});
  }

  TrainResult result = train(init_network(cfg.inputs(), cfg.hidden_size()), pairs, cfg.train);
  save_network(checkpoint, result.net);
  std::ostringstream csv;
  csv << "epoch,mean_loss\n";
  csv.precision(17);
  for (std::size_t i = 0; i < result.loss_history.size(); ++i) {
    csv << i << ',' << result.loss_history[i] << '\n';
  }
  write_text(fs::path(checkpoint.string() + ".loss.csv"), csv.str());
  return {std::move(result.net), std::move(result.loss_history)};
}

ErrorReport run_evaluation(const DatasetManifest& manifest, const fs::path& dataset_dir,
                           const Network& net, const EvaluationOptions& options) {
  if (net.inputs() != manifest.resolution * manifest.resolution) {
    throw Error(ErrorCode::ShapeMismatch, "checkpoint input size does not match the dataset grid");
  }
  const auto entries = manifest.split("test");
  if (entries.empty()) throw Error(ErrorCode::Configuration, "dataset has no test entries");
  const DiskMask mask = disk_mask(manifest.resolution);
  if (options.error_map_dir) fs::create_directories(*options.error_map_dir);

  ErrorReport report;
  for (const auto* e : entries) {
    const ScalarField exact = read_scalar_field(dataset_dir / e->exact_phase);
    const ScalarField input =
        network_input(read_scalar_field(dataset_dir / e->retrieved_phase), exact, options.inputs);
    const ScalarField adjusted = adjust(net, input);
    report.pairs.push_back({e->id, rms_error(exact, input, mask), rms_error(exact, adjusted, mask)});
    if (options.error_map_dir) {
      write_field(*options.error_map_dir / (e->id + "_error_retrieved.phf"),
                  error_map(input, exact, mask));
      write_field(*options.error_map_dir / (e->id + "_error_adjusted.phf"),
                  error_map(adjusted, exact, mask));
      write_field(*options.error_map_dir / (e->id + "_adjusted.phf"), adjusted);
    }
  }
  report.summarize();
  return report;
}

json report_to_json(const ErrorReport& report, const json& config_echo) {
  json pairs = json::array();
  for (const auto& p : report.pairs) {
    pairs.push_back({{"id", p.id}, {"e_rms_retrieved", p.retrieved}, {"e_rms_adjusted", p.adjusted}});
  }
  return {
      {"format", "tienet-report-1"},
      {"metric", "sum((exact - candidate)^2) / sum(exact^2) over disk of radius 0.5a"},
      {"count", report.pairs.size()},
      {"mean_e_rms_retrieved", report.mean_retrieved},
      {"mean_e_rms_adjusted", report.mean_adjusted},
      {"mean_percent_retrieved", 100.0 * report.mean_retrieved},
      {"mean_percent_adjusted", 100.0 * report.mean_adjusted},
      {"pairs", pairs},
      {"config", config_echo},
  };
}

// ---------------------------------------------------------------------------
// rendering

std::vector<std::uint8_t> render_pgm(const ScalarField& field, double lo, double hi) {
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw Error(ErrorCode::InvalidArgument, "render range must satisfy min < max");
  }
  const std::string header =
      "P5\n" + std::to_string(field.size()) + " " + std::to_string(field.size()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(header.size() + field.count());
  const double scale = 255.0 / (hi - lo);
  for (double v : field.values()) {
    const double level = std::floor((v - lo) * scale + 0.5);
    out.push_back(static_cast<std::uint8_t>(std::clamp(level, 0.0, 255.0)));
  }
  return out;
}

void render(const fs::path& field_path, const fs::path& out_path, double lo, double hi) {
  const auto any = read_field(field_path);
  ScalarField f;
  if (const auto* s = std::get_if<ScalarField>(&any)) {
    f = *s;
  } else {
    // Complex fields render as their intensity.
    f = intensity(std::get<ComplexField>(any));
  }
  write_bytes(out_path, render_pgm(f, lo, hi));
}

}  // namespace tienet
