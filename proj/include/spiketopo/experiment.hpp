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

#ifndef SPIKETOPO_EXPERIMENT_HPP_
#define SPIKETOPO_EXPERIMENT_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "spiketopo/datasets.hpp"
#include "spiketopo/dual_rep.hpp"
#include "spiketopo/lif_sim.hpp"
#include "spiketopo/net_graph.hpp"
#include "spiketopo/plasticity.hpp"
#include "spiketopo/rtd.hpp"
#include "spiketopo/surrogate_trainer.hpp"

namespace spiketopo {

enum class ModelKind { kHrsnn, kMrsnn, kBprsnn };
std::string model_name(ModelKind k);
ModelKind model_from_name(const std::string& s);

struct DatasetConfig {
  std::string kind = "synthetic_temporal";  // synthetic_spatial | synthetic_temporal | spike_csv
  int classes = 2;
  int train_per_class = 20;
  int test_per_class = 50;
  // synthetic_temporal
  int channels = 16;
  double jitter = 1.0;
  int spikes_per_channel = 3;
  double drop_rate = 0.0;
  double add_rate = 0.0;
  double min_gap = 2.0;
  // synthetic_spatial
  int feature_dim = 16;
  double noise = 0.05;
  // spike_csv
  std::string path;
  std::string test_path;
  std::uint64_t seed = 1;
};

struct NetworkConfig {
  int neuron_count = 64;
  /// Output neurons as a fraction of neuron_count (rounded up, at least 1).
  double output_fraction = 0.25;
  HeterogeneityConfig heterogeneity = default_heterogeneity();

  /// Recurrent weights start in [0, 0.3]: the full [0, 1] range drives the
  /// 20%-connected network into saturated synchronous firing.
  static HeterogeneityConfig default_heterogeneity() {
    HeterogeneityConfig h;
    h.w_init_hi = 0.3;
    return h;
  }
};

struct SimConfig {
  double dt = 0.5;
  double duration = 50.0;
  double max_rate = 100.0;  // Hz, rate encoding of spatial features
};

struct AnalysisConfig {
  std::vector<std::string> layers{"L3", "L5"};
  double bottleneck_fraction = 0.1;
  double band_fraction = 0.1;
  double bin_width = 5.0;
  int mds_dims = 2;
  bool write_responses = true;
};

/// BPTT settings for the default 64-neuron temporal task: a sharper
/// surrogate than the TrainConfig default trains more reliably there.
inline TrainConfig default_bptt() {
  TrainConfig c;
  c.surrogate_beta = 20.0;
  return c;
}

struct ExperimentConfig {
  std::uint64_t seed = 1;
  DatasetConfig dataset;
  NetworkConfig network;
  std::vector<ModelKind> models{ModelKind::kHrsnn, ModelKind::kMrsnn, ModelKind::kBprsnn};
  int stdp_epochs = 1;
  PlasticityConfig plasticity;
  TrainConfig bptt = default_bptt();
  SimConfig sim;
  AnalysisConfig analysis;
  std::vector<int> sweep_counts;
  int track_epochs = 10;
  std::string output_dir = "runs";

  /// Throws ConfigError on the first invalid field.
  void validate() const;
  SimOptions sim_options() const { return {sim.dt, sim.duration, {}}; }
};

ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& c);
ExperimentConfig load_experiment_config(const std::string& path);

/// Training and held-out stimuli, already spike encoded. Every model sees
/// exactly these rasters.
struct PreparedData {
  LabeledRasters train;
  LabeledRasters test;
  int classes = 0;
  int channels = 0;
  std::string stimulus_hash;  // hash of test.rasters
};

PreparedData prepare_data(const ExperimentConfig& cfg);
std::string hash_rasters(const std::vector<SpikeRaster>& rasters);

NetworkTopology initial_network(const ExperimentConfig& cfg, ModelKind kind, int channels,
                                std::uint64_t seed);

struct TrainedModel {
  ModelKind kind = ModelKind::kHrsnn;
  std::string label;
  NetworkTopology network;
  std::optional<Readout> readout;            // BPRSNN only
  std::vector<TrainingLogRow> stdp_log;      // STDP models
  std::vector<EpochStats> bptt_curve;        // BPRSNN
  std::vector<Snapshot> snapshots;           // BPRSNN when requested
};

/// Trains one model on data.train with the network/training seed `seed`.
TrainedModel train_model(const ExperimentConfig& cfg, ModelKind kind, const PreparedData& data,
                         std::uint64_t seed, bool keep_snapshots = false);

struct ModelResponses {
  std::string label;
  LayerAssignment layers;
  std::vector<SpikeRaster> test;
  std::string stimulus_hash;
  double test_accuracy = 0.0;
};

/// Frozen-weight responses on the held-out stimuli, the layer assignment and
/// test accuracy (logistic probe for STDP models, trained decoder for BPRSNN).
ModelResponses collect_responses(const ExperimentConfig& cfg, const TrainedModel& model,
                                 const PreparedData& data);

std::vector<int> layer_neurons(const LayerAssignment& la, const std::string& layer);

struct PairEntry {
  std::string model_a;
  std::string model_b;
  std::string layer;
  RtdReport report;
};

struct ComparisonReport {
  std::vector<PairEntry> pairs;  // every unordered pair, diagonal included
  std::map<std::string, double> accuracy;
  std::string stimulus_hash;
  nlohmann::json metadata = nlohmann::json::object();

  const PairEntry& find(const std::string& a, const std::string& b, const std::string& layer) const;
};

nlohmann::json to_json(const ComparisonReport& r);

/// Pairwise RTD between models' layer representations over shared stimuli.
/// Writes matrices and MDS exports under `out_dir` when it is nonempty.
ComparisonReport compare_models(const ExperimentConfig& cfg,
                                const std::vector<ModelResponses>& models,
                                const std::string& out_dir);

/// Full pipeline. Artifacts go to `out_dir`; returns the report.
ComparisonReport run_experiment(const ExperimentConfig& cfg, const std::string& out_dir);

/// One run_experiment per neuron count plus `<out_dir>/sweep.csv`
/// (neuron_count, pair, layer, rtd) over distinct model pairs.
std::vector<ComparisonReport> sweep_neurons(const ExperimentConfig& cfg,
                                            const std::vector<int>& neuron_counts,
                                            const std::string& out_dir);

struct TrackRow {
  int epoch = 0;
  double bp_accuracy = 0.0;
  double rtd = 0.0;
};

struct TrackResult {
  std::vector<TrackRow> rows;
  double control_rtd = 0.0;  // epoch-0 snapshot against itself
  double hrsnn_accuracy = 0.0;
};

/// RTD between each BPRSNN epoch snapshot's L3 and the trained HRSNN's L3.
/// Writes `<out_dir>/track.csv` and `<out_dir>/track.json`.
TrackResult track_epochs(const ExperimentConfig& cfg, int epochs, const std::string& out_dir);

/// `<base>/run-YYYYmmdd-HHMMSS` (suffixed if it exists); created.
std::string make_run_dir(const std::string& base);

}  // namespace spiketopo

#endif  // SPIKETOPO_EXPERIMENT_HPP_
