// Copyright 2026 The spiketopo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// spiketopo command-line front end.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spiketopo/errors.hpp"
#include "spiketopo/experiment.hpp"
#include "spiketopo/spike_metrics.hpp"

namespace fs = std::filesystem;
using namespace spiketopo;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

ExperimentConfig load(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : load_experiment_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  cfg.validate();
  return cfg;
}

std::string out_dir(const Common& c, const ExperimentConfig& cfg) {
  if (c.out.empty()) return make_run_dir(cfg.output_dir);
  fs::create_directories(c.out);
  return c.out;
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("-c,--config", c.config, "experiment config (JSON)");
  app->add_option("--seed", c.seed, "override the top-level seed");
  app->add_option("-o,--out", c.out, "output directory (default: run-stamped under output_dir)");
}

void write_json(const nlohmann::json& j, const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream(p) << j.dump(1) << '\n';
}

std::vector<int> neurons_for(const std::string& network, const std::string& layer,
                             int neuron_count, const ExperimentConfig& cfg) {
  if (network.empty()) {
    std::vector<int> all(neuron_count);
    for (int k = 0; k < neuron_count; ++k) all[k] = k;
    return all;
  }
  const auto la = extract_layers(load_network(network), cfg.analysis.bottleneck_fraction,
                                 cfg.analysis.band_fraction);
  return layer_neurons(la, layer);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Topological comparison of spiking network representations"};
  app.require_subcommand(1);

  Common gen_c, train_c, resp_c, rtd_c, run_c, sweep_c, track_c;

  auto* gen = app.add_subcommand("gen", "generate the configured dataset as spike CSVs");
  add_common(gen, gen_c);

  auto* train = app.add_subcommand("train", "train one model");
  add_common(train, train_c);
  std::string model = "HRSNN";
  train->add_option("-m,--model", model, "HRSNN, MRSNN or BPRSNN");

  auto* respond = app.add_subcommand("respond", "collect frozen-network responses");
  add_common(respond, resp_c);
  std::string resp_net, resp_stimuli;
  respond->add_option("-n,--network", resp_net, "network JSON")->required();
  respond->add_option("-s,--stimuli", resp_stimuli,
                      "stimulus CSV directory (default: the configured held-out set)");

  auto* rtd = app.add_subcommand("rtd", "compare two response sets");
  add_common(rtd, rtd_c);
  std::string rtd_a, rtd_b, net_a, net_b, layer = "L3";
  rtd->add_option("-a", rtd_a, "response directory A")->required();
  rtd->add_option("-b", rtd_b, "response directory B")->required();
  rtd->add_option("--network-a", net_a, "network JSON for A (restricts to --layer)");
  rtd->add_option("--network-b", net_b, "network JSON for B (restricts to --layer)");
  rtd->add_option("--layer", layer, "L1..L5");

  auto* run = app.add_subcommand("run", "full experiment");
  add_common(run, run_c);

  auto* sweep = app.add_subcommand("sweep", "repeat the experiment over neuron counts");
  add_common(sweep, sweep_c);
  std::vector<int> counts;
  sweep->add_option("--counts", counts, "neuron counts (default: sweep.neuron_counts)")
      ->delimiter(',');

  auto* track = app.add_subcommand("track", "epoch-wise RTD of BPRSNN against HRSNN");
  add_common(track, track_c);
  std::optional<int> epochs;
  track->add_option("--epochs", epochs, "BPRSNN epochs (default: track.epochs)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*gen) {
      const auto cfg = load(gen_c);
      const auto dir = out_dir(gen_c, cfg);
      const auto data = prepare_data(cfg);
      write_labeled_rasters(data.train, (fs::path(dir) / "train").string(), "sample");
      write_labeled_rasters(data.test, (fs::path(dir) / "test").string(), "sample");
      write_json(to_json(cfg), fs::path(dir) / "config.json");
      std::cout << dir << '\n';
    } else if (*train) {
      const auto cfg = load(train_c);
      const auto kind = model_from_name(model);
      const auto dir = out_dir(train_c, cfg);
      const auto data = prepare_data(cfg);
      const auto m = train_model(cfg, kind, data, cfg.seed);
      save_network(m.network, (fs::path(dir) / (m.label + ".json")).string());
      if (m.readout) write_json(to_json(*m.readout), fs::path(dir) / (m.label + "_readout.json"));
      if (kind == ModelKind::kBprsnn) {
        write_training_curve(m.bptt_curve, (fs::path(dir) / (m.label + "_curve.csv")).string());
      } else {
        write_training_log(m.stdp_log, (fs::path(dir) / (m.label + "_stdp.csv")).string());
      }
      write_json(to_json(cfg), fs::path(dir) / "config.json");
      std::cout << dir << '\n';
    } else if (*respond) {
      const auto cfg = load(resp_c);
      const auto dir = out_dir(resp_c, cfg);
      const auto net = load_network(resp_net);
      LabeledRasters stimuli =
          resp_stimuli.empty() ? prepare_data(cfg).test : ingest_spike_csv(resp_stimuli);
      LabeledRasters out;
      out.labels = stimuli.labels;
      for (const auto& s : stimuli.rasters) out.rasters.push_back(simulate(net, s, cfg.sim_options()));
      write_labeled_rasters(out, dir, "resp");
      std::cout << dir << '\n';
    } else if (*rtd) {
      const auto cfg = load(rtd_c);
      const auto a = ingest_spike_csv(rtd_a);
      const auto b = ingest_spike_csv(rtd_b);
      if (a.rasters.size() != b.rasters.size() || a.rasters.empty()) {
        throw InputDomainError("response sets must be nonempty and the same size");
      }
      const auto da = distance_matrix(
          a.rasters, neurons_for(net_a, layer, a.rasters[0].neuron_count(), cfg));
      const auto db = distance_matrix(
          b.rasters, neurons_for(net_b, layer, b.rasters[0].neuron_count(), cfg));
      const auto report = to_json(rtd_score(da.matrix, db.matrix, rtd_a, rtd_b));
      if (rtd_c.out.empty()) {
        std::cout << report.dump(1) << '\n';
      } else {
        write_json(report, rtd_c.out);
      }
    } else if (*run) {
      const auto cfg = load(run_c);
      const auto dir = out_dir(run_c, cfg);
      run_experiment(cfg, dir);
      std::cout << dir << '\n';
    } else if (*sweep) {
      const auto cfg = load(sweep_c);
      const auto dir = out_dir(sweep_c, cfg);
      sweep_neurons(cfg, counts.empty() ? cfg.sweep_counts : counts, dir);
      std::cout << dir << '\n';
    } else if (*track) {
      const auto cfg = load(track_c);
      const auto dir = out_dir(track_c, cfg);
      track_epochs(cfg, epochs.value_or(cfg.track_epochs), dir);
      std::cout << dir << '\n';
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
