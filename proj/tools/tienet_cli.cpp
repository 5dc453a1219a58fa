// Command-line front end: generate, retrieve, train, evaluate, render.
//
// Every failure exits non-zero after printing one JSON line to stderr:
//   {"error":"<code>","message":"..."}

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <iostream>
#include <optional>

#include "tienet/ann.hpp"
#include "tienet/error.hpp"
#include "tienet/field_io.hpp"
#include "tienet/pipeline.hpp"
#include "tienet/tie.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void fail(std::string_view code, const std::string& message) {
  std::cerr << json{{"error", code}, {"message", message}}.dump() << std::endl;
}

tienet::ExperimentConfig base_config(const std::string& config_path, const std::string& preset) {
  tienet::ExperimentConfig cfg = tienet::ExperimentConfig::preset(preset);
  if (!config_path.empty()) {
    const auto bytes = tienet::read_bytes(config_path);
    tienet::update_from_json(cfg, json::parse(bytes.begin(), bytes.end()));
  }
  return cfg;
}

// The manifest echoes the config it was generated with; start from that.
tienet::ExperimentConfig config_of(const tienet::DatasetManifest& manifest) {
  tienet::ExperimentConfig cfg;
  tienet::update_from_json(cfg, manifest.config);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulated TIE phase retrieval with neural-network error reduction"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Simulate a dataset of exact/retrieved phase pairs");
  std::string gen_config, gen_preset = "desk32", gen_out;
  std::optional<std::size_t> gen_count, gen_test_count, gen_resolution, gen_threads;
  std::optional<std::uint64_t> gen_seed;
  std::optional<double> gen_noise, gen_defocus_um;
  bool gen_save_micrographs = false;
  gen->add_option("--config", gen_config, "JSON experiment config");
  gen->add_option("--preset", gen_preset, "desk32, desk64 or full");
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--count", gen_count, "Training pairs");
  gen->add_option("--test-count", gen_test_count, "Test pairs");
  gen->add_option("--seed", gen_seed, "Master seed");
  gen->add_option("--noise", gen_noise, "Shot-noise level (relative std at I_in)");
  gen->add_option("--defocus-um", gen_defocus_um, "Defocus in micrometres");
  gen->add_option("--resolution", gen_resolution, "Pixels per side");
  gen->add_option("--threads", gen_threads, "Worker threads (0 = all cores)");
  gen->add_flag("--save-micrographs", gen_save_micrographs, "Also store I-, I0, I+");

  // retrieve
  auto* ret = app.add_subcommand("retrieve", "TIE phase retrieval from a defocus series");
  std::string ret_under, ret_in, ret_over, ret_out;
  double ret_defocus_um = 0.0, ret_kv = 300.0, ret_incident = 1.0;
  std::string ret_apodize = "derivative";
  ret->add_option("--under", ret_under)->required();
  ret->add_option("--infocus", ret_in)->required();
  ret->add_option("--over", ret_over)->required();
  ret->add_option("--defocus-um", ret_defocus_um)->required();
  ret->add_option("--out", ret_out)->required();
  ret->add_option("--kv", ret_kv, "Accelerating voltage in kV");
  ret->add_option("--incident", ret_incident, "Incident intensity");
  ret->add_option("--apodize", ret_apodize, "none, derivative or micrographs");

  // train
  auto* trn = app.add_subcommand("train", "Train the network on a dataset's training split");
  std::string trn_dataset, trn_out;
  std::optional<double> trn_lr;
  std::optional<std::size_t> trn_epochs, trn_batch, trn_hidden;
  std::optional<std::uint64_t> trn_seed;
  bool trn_offset = false, trn_mask = false;
  trn->add_option("--dataset", trn_dataset)->required();
  trn->add_option("--out", trn_out, "ANN1 checkpoint path")->required();
  trn->add_option("--lr", trn_lr);
  trn->add_option("--epochs", trn_epochs);
  trn->add_option("--batch-size", trn_batch);
  trn->add_option("--hidden", trn_hidden);
  trn->add_option("--shuffle-seed", trn_seed);
  trn->add_flag("--offset-correct", trn_offset, "Train on offset-corrected retrieved phases");
  trn->add_flag("--mask-inputs", trn_mask, "Zero inputs outside the analysis disk");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Score retrieved and adjusted phases on the test split");
  std::string ev_dataset, ev_model, ev_report, ev_maps;
  bool ev_offset = false, ev_mask = false;
  ev->add_option("--dataset", ev_dataset)->required();
  ev->add_option("--model", ev_model)->required();
  ev->add_option("--report", ev_report, "JSON report path")->required();
  ev->add_option("--error-maps", ev_maps, "Directory for error maps and adjusted phases");
  ev->add_flag("--offset-correct", ev_offset);
  ev->add_flag("--mask-inputs", ev_mask);

  // render
  auto* rnd = app.add_subcommand("render", "Render a PHF1 field as an 8-bit PGM");
  std::string rnd_in, rnd_out;
  double rnd_min = -3.0, rnd_max = 3.0;
  rnd->add_option("--in", rnd_in)->required();
  rnd->add_option("--out", rnd_out)->required();
  rnd->add_option("--min", rnd_min);
  rnd->add_option("--max", rnd_max);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    fail("usage", e.what());
    return 2;
  }

  try {
    if (*gen) {
      auto cfg = base_config(gen_config, gen_preset);
      if (gen_resolution) cfg.resolution = *gen_resolution;
      if (gen_count) {
        cfg.train_count = *gen_count;
        if (cfg.train_count % cfg.train.batch_size != 0) {
          cfg.train.batch_size = cfg.train_count;  // one batch per epoch
        }
        cfg.train.batch_count = cfg.train_count / cfg.train.batch_size;
      }
      if (gen_test_count) cfg.test_count = *gen_test_count;
      if (gen_seed) cfg.master_seed = *gen_seed;
      if (gen_noise) cfg.noise_level = *gen_noise;
      if (gen_defocus_um) cfg.defocus = *gen_defocus_um * 1e3;
      if (gen_threads) cfg.threads = *gen_threads;
      if (gen_save_micrographs) cfg.save_micrographs = true;
      const auto manifest = tienet::generate_dataset(cfg, gen_out);
      std::cout << json{{"dataset", gen_out}, {"entries", manifest.entries.size()}}.dump() << "\n";
    } else if (*ret) {
      const auto under = tienet::read_scalar_field(ret_under);
      const auto in_focus = tienet::read_scalar_field(ret_in);
      const auto over = tienet::read_scalar_field(ret_over);
      const auto optics = tienet::OpticsConfig::make(ret_kv * 1e3, ret_defocus_um * 1e3, 0.0,
                                                     {-17.0, 1.0}, ret_incident);
      auto tie = tienet::TieConfig::standard(ret_incident, in_focus.width(), in_focus.size());
      if (ret_apodize == "none") {
        tie.apodize = tienet::Apodization::None;
      } else if (ret_apodize == "micrographs") {
        tie.apodize = tienet::Apodization::Micrographs;
      } else if (ret_apodize != "derivative") {
        throw tienet::Error(tienet::ErrorCode::InvalidArgument, "unknown --apodize " + ret_apodize);
      }
      tienet::write_field(ret_out, tienet::retrieve_phase(under, in_focus, over, optics, tie));
    } else if (*trn) {
      const auto manifest = tienet::load_manifest(trn_dataset);
      auto cfg = config_of(manifest);
      if (trn_lr) cfg.train.learning_rate = *trn_lr;
      if (trn_epochs) cfg.train.epochs = *trn_epochs;
      if (trn_hidden) cfg.hidden = *trn_hidden;
      if (trn_seed) cfg.train.shuffle_seed = *trn_seed;
      if (trn_batch) {
        const std::size_t pairs = manifest.split("train").size();
        if (*trn_batch == 0 || pairs % *trn_batch != 0) {
          throw tienet::Error(tienet::ErrorCode::Configuration,
                              "--batch-size must divide the training pair count");
        }
        cfg.train.batch_size = *trn_batch;
        cfg.train.batch_count = pairs / *trn_batch;
      }
      if (trn_offset) cfg.offset_correct = true;
      if (trn_mask) cfg.mask_inputs = true;
      const auto run = tienet::run_training(manifest, trn_dataset, cfg, trn_out);
      std::cout << json{{"checkpoint", trn_out},
                        {"epochs", run.loss_history.size()},
                        {"first_loss", run.loss_history.front()},
                        {"final_loss", run.loss_history.back()}}
                       .dump()
                << "\n";
    } else if (*ev) {
      const auto manifest = tienet::load_manifest(ev_dataset);
      const auto net = tienet::load_network(ev_model);
      tienet::EvaluationOptions opts;
      opts.inputs = {ev_offset, ev_mask};
      if (!ev_maps.empty()) opts.error_map_dir = fs::path(ev_maps);
      const auto report = tienet::run_evaluation(manifest, ev_dataset, net, opts);
      auto echo = manifest.config;
      echo["offset_correct"] = ev_offset;
      echo["mask_inputs"] = ev_mask;
      tienet::write_text(ev_report, tienet::report_to_json(report, echo).dump(2) + "\n");
      std::cout << json{{"mean_e_rms_retrieved", report.mean_retrieved},
                        {"mean_e_rms_adjusted", report.mean_adjusted}}
                       .dump()
                << "\n";
    } else if (*rnd) {
      tienet::render(rnd_in, rnd_out, rnd_min, rnd_max);
    }
  } catch (const tienet::Error& e) {
    fail(tienet::to_string(e.code()), e.what());
    return 1;
  } catch (const json::exception& e) {
    fail("format", e.what());
    return 1;
  } catch (const std::exception& e) {
    fail("internal", e.what());
    return 1;
  }
  return 0;
}
