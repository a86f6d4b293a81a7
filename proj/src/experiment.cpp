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

#include "spiketopo/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>

#include "spiketopo/errors.hpp"
#include "spiketopo/readout.hpp"
#include "spiketopo/rng.hpp"
#include "spiketopo/spike_metrics.hpp"

namespace spiketopo {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "1.0.0";

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

void write_json(const nlohmann::json& j, const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(1) << '\n';
}

// Runs `body` and rethrows anything but configuration errors as a StageError.
template <class F>
auto stage(const std::string& name, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const ConfigError&) {
    throw;
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

std::vector<SpikeRaster> simulate_all(const NetworkTopology& net,
                                      const std::vector<SpikeRaster>& stimuli,
                                      const SimOptions& sim) {
  const LifEngine proto(net, sim.dt);
  std::vector<SpikeRaster> out(stimuli.size());
  const long m = static_cast<long>(stimuli.size());
#pragma omp parallel for schedule(dynamic)
  for (long s = 0; s < m; ++s) {
    LifEngine engine = proto;
    out[s] = engine.run(stimuli[s], sim.duration, sim.bias);
  }
  return out;
}

std::vector<double> output_rates(const SpikeRaster& r, const std::vector<int>& ids) {
  const auto all = readout_rates(r, 0.0, r.duration);
  std::vector<double> out(ids.size());
  for (std::size_t k = 0; k < ids.size(); ++k) out[k] = all[ids[k]];
  return out;
}

template <class T>
void parallel_each(std::vector<T>& slots, auto&& body) {
  std::vector<std::exception_ptr> errors(slots.size());
  const long m = static_cast<long>(slots.size());
#pragma omp parallel for schedule(dynamic)
  for (long k = 0; k < m; ++k) {
    try {
      body(k, slots[k]);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string now_utc(const char* fmt) {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[64];
  std::strftime(buf, sizeof buf, fmt, &tm);
  return buf;
}

}  // namespace

std::string model_name(ModelKind k) {
  switch (k) {
    case ModelKind::kHrsnn: return "HRSNN";
    case ModelKind::kMrsnn: return "MRSNN";
    case ModelKind::kBprsnn: return "BPRSNN";
  }
  return "HRSNN";
}

ModelKind model_from_name(const std::string& s) {
  if (s == "HRSNN") return ModelKind::kHrsnn;
  if (s == "MRSNN") return ModelKind::kMrsnn;
  if (s == "BPRSNN") return ModelKind::kBprsnn;
  throw ConfigError("unknown model '" + s + "' (expected HRSNN, MRSNN or BPRSNN)");
}

void ExperimentConfig::validate() const {
  const auto& d = dataset;
  require(d.kind == "synthetic_spatial" || d.kind == "synthetic_temporal" || d.kind == "spike_csv",
          "dataset.kind must be synthetic_spatial, synthetic_temporal or spike_csv");
  if (d.kind != "spike_csv") {
    require(d.classes >= 2, "dataset.classes must be >= 2");
    require(d.train_per_class >= 1 && d.test_per_class >= 1,
            "dataset.train_per_class and test_per_class must be >= 1");
    require(d.classes * d.test_per_class >= 2, "need at least two held-out stimuli");
  } else {
    require(!d.path.empty() && !d.test_path.empty(), "dataset.path and dataset.test_path required");
  }
  require(d.noise >= 0.0, "dataset.noise must be >= 0");
  require(d.jitter >= 0.0, "dataset.jitter must be >= 0");
  require(network.neuron_count >= 2, "network.neuron_count must be >= 2");
  require(network.output_fraction > 0.0 && network.output_fraction < 1.0,
          "network.output_fraction must lie in (0, 1)");
  require(!models.empty(), "models must be nonempty");
  require(stdp_epochs >= 0, "stdp.epochs must be >= 0");
  bptt.validate();
  require(sim.dt > 0.0 && sim.duration > 0.0 && sim.max_rate > 0.0,
          "simulation.dt, duration and max_rate must be positive");
  require(!analysis.layers.empty(), "analysis.layers must be nonempty");
  for (const auto& l : analysis.layers) {
    require(l == "L1" || l == "L2" || l == "L3" || l == "L4" || l == "L5",
            "analysis.layers entries must be L1..L5");
  }
  require(analysis.bottleneck_fraction > 0.0 && analysis.band_fraction > 0.0,
          "analysis fractions must be positive");
  require(analysis.bin_width > 0.0, "analysis.bin_width must be positive");
  require(analysis.mds_dims >= 1, "analysis.mds_dims must be >= 1");
  require(track_epochs >= 1, "track.epochs must be >= 1");
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  try {
    c.seed = j.value("seed", c.seed);
    if (j.contains("dataset")) {
      const auto& d = j.at("dataset");
      auto& o = c.dataset;
      o.kind = d.value("kind", o.kind);
      o.classes = d.value("classes", o.classes);
      o.train_per_class = d.value("train_per_class", o.train_per_class);
      o.test_per_class = d.value("test_per_class", o.test_per_class);
      o.channels = d.value("channels", o.channels);
      o.jitter = d.value("jitter", o.jitter);
      o.spikes_per_channel = d.value("spikes_per_channel", o.spikes_per_channel);
      o.drop_rate = d.value("drop_rate", o.drop_rate);
      o.add_rate = d.value("add_rate", o.add_rate);
      o.min_gap = d.value("min_gap", o.min_gap);
      o.feature_dim = d.value("feature_dim", o.feature_dim);
      o.noise = d.value("noise", o.noise);
      o.path = d.value("path", o.path);
      o.test_path = d.value("test_path", o.test_path);
      o.seed = d.value("seed", o.seed);
    }
    if (j.contains("network")) {
      const auto& n = j.at("network");
      c.network.neuron_count = n.value("neuron_count", c.network.neuron_count);
      c.network.output_fraction = n.value("output_fraction", c.network.output_fraction);
      if (n.contains("heterogeneity")) {
        nlohmann::json merged = to_json(c.network.heterogeneity);
        merged.update(n.at("heterogeneity"));
        c.network.heterogeneity = heterogeneity_from_json(merged);
      }
    }
    if (j.contains("models")) {
      c.models.clear();
      for (const auto& m : j.at("models")) c.models.push_back(model_from_name(m.get<std::string>()));
    }
    if (j.contains("stdp")) {
      const auto& s = j.at("stdp");
      c.stdp_epochs = s.value("epochs", c.stdp_epochs);
      c.plasticity.input_plastic = s.value("input_plastic", c.plasticity.input_plastic);
      c.plasticity.recurrent_plastic = s.value("recurrent_plastic", c.plasticity.recurrent_plastic);
    }
    if (j.contains("bptt")) {
      nlohmann::json merged = to_json(c.bptt);
      merged.update(j.at("bptt"));
      c.bptt = train_config_from_json(merged);
    }
    if (j.contains("simulation")) {
      const auto& s = j.at("simulation");
      c.sim.dt = s.value("dt", c.sim.dt);
      c.sim.duration = s.value("duration", c.sim.duration);
      c.sim.max_rate = s.value("max_rate", c.sim.max_rate);
    }
    if (j.contains("analysis")) {
      const auto& a = j.at("analysis");
      c.analysis.layers = a.value("layers", c.analysis.layers);
      c.analysis.bottleneck_fraction = a.value("bottleneck_fraction", c.analysis.bottleneck_fraction);
      c.analysis.band_fraction = a.value("band_fraction", c.analysis.band_fraction);
      c.analysis.bin_width = a.value("bin_width", c.analysis.bin_width);
      c.analysis.mds_dims = a.value("mds_dims", c.analysis.mds_dims);
      c.analysis.write_responses = a.value("write_responses", c.analysis.write_responses);
    }
    if (j.contains("sweep")) c.sweep_counts = j.at("sweep").value("neuron_counts", c.sweep_counts);
    if (j.contains("track")) c.track_epochs = j.at("track").value("epochs", c.track_epochs);
    c.output_dir = j.value("output_dir", c.output_dir);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json models = nlohmann::json::array();
  for (auto m : c.models) models.push_back(model_name(m));
  const auto& d = c.dataset;
  return {{"seed", c.seed},
          {"dataset",
           {{"kind", d.kind},
            {"classes", d.classes},
            {"train_per_class", d.train_per_class},
            {"test_per_class", d.test_per_class},
            {"channels", d.channels},
            {"jitter", d.jitter},
            {"spikes_per_channel", d.spikes_per_channel},
            {"drop_rate", d.drop_rate},
            {"add_rate", d.add_rate},
            {"min_gap", d.min_gap},
            {"feature_dim", d.feature_dim},
            {"noise", d.noise},
            {"path", d.path},
            {"test_path", d.test_path},
            {"seed", d.seed}}},
          {"network",
           {{"neuron_count", c.network.neuron_count},
            {"output_fraction", c.network.output_fraction},
            {"heterogeneity", to_json(c.network.heterogeneity)}}},
          {"models", models},
          {"stdp",
           {{"epochs", c.stdp_epochs},
            {"input_plastic", c.plasticity.input_plastic},
            {"recurrent_plastic", c.plasticity.recurrent_plastic}}},
          {"bptt", to_json(c.bptt)},
          {"simulation", {{"dt", c.sim.dt}, {"duration", c.sim.duration}, {"max_rate", c.sim.max_rate}}},
          {"analysis",
           {{"layers", c.analysis.layers},
            {"bottleneck_fraction", c.analysis.bottleneck_fraction},
            {"band_fraction", c.analysis.band_fraction},
            {"bin_width", c.analysis.bin_width},
            {"mds_dims", c.analysis.mds_dims},
            {"write_responses", c.analysis.write_responses}}},
          {"sweep", {{"neuron_counts", c.sweep_counts}}},
          {"track", {{"epochs", c.track_epochs}}},
          {"output_dir", c.output_dir}};
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return experiment_config_from_json(j);
}

std::string hash_rasters(const std::vector<SpikeRaster>& rasters) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t k = 0; k < n; ++k) {
      h ^= b[k];
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& r : rasters) {
    mix(&r.duration, sizeof r.duration);
    const std::uint64_t n = r.trains.size();
    mix(&n, sizeof n);
    for (const auto& t : r.trains) {
      const std::uint64_t m = t.size();
      mix(&m, sizeof m);
      if (!t.empty()) mix(t.data(), t.size() * sizeof(double));
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

PreparedData prepare_data(const ExperimentConfig& cfg) {
  const auto& d = cfg.dataset;
  PreparedData data;
  if (d.kind == "synthetic_temporal") {
    TemporalSpec spec;
    spec.classes = d.classes;
    spec.samples_per_class = d.train_per_class + d.test_per_class;
    spec.channels = d.channels;
    spec.duration = cfg.sim.duration;
    spec.jitter = d.jitter;
    spec.spikes_per_channel = d.spikes_per_channel;
    spec.drop_rate = d.drop_rate;
    spec.add_rate = d.add_rate;
    spec.min_gap = d.min_gap;
    spec.dt = cfg.sim.dt;
    spec.seed = d.seed;
    auto all = gen_synthetic_temporal(spec);
    for (std::size_t k = 0; k < all.rasters.size(); ++k) {
      const int within = static_cast<int>(k) % spec.samples_per_class;
      auto& dst = within < d.train_per_class ? data.train : data.test;
      dst.rasters.push_back(std::move(all.rasters[k]));
      dst.labels.push_back(all.labels[k]);
    }
    data.classes = d.classes;
    data.channels = d.channels;
  } else if (d.kind == "synthetic_spatial") {
    const int per_class = d.train_per_class + d.test_per_class;
    const auto all = gen_synthetic_spatial(d.classes, per_class, d.feature_dim, d.noise, d.seed);
    for (std::size_t k = 0; k < all.features.size(); ++k) {
      const int within = static_cast<int>(k) % per_class;
      auto& dst = within < d.train_per_class ? data.train : data.test;
      dst.rasters.push_back(rate_encode(all.features[k], cfg.sim.duration, cfg.sim.max_rate,
                                        derive_seed(d.seed, "stimulus", k), cfg.sim.dt));
      dst.labels.push_back(all.labels[k]);
    }
    data.classes = d.classes;
    data.channels = d.feature_dim;
  } else {
    data.train = ingest_spike_csv(d.path);
    data.test = ingest_spike_csv(d.test_path);
    int max_label = 0;
    for (int y : data.train.labels) max_label = std::max(max_label, y);
    for (int y : data.test.labels) max_label = std::max(max_label, y);
    data.classes = max_label + 1;
    data.channels = data.train.rasters.at(0).neuron_count();
    for (const auto* set : {&data.train, &data.test}) {
      for (const auto& r : set->rasters) {
        if (r.neuron_count() != data.channels) {
          throw InputDomainError("spike_csv dataset: inconsistent channel counts");
        }
      }
    }
    if (data.test.rasters.size() < 2) throw InputDomainError("need at least two held-out stimuli");
  }
  data.stimulus_hash = hash_rasters(data.test.rasters);
  return data;
}

NetworkTopology initial_network(const ExperimentConfig& cfg, ModelKind kind, int channels,
                                std::uint64_t seed) {
  const int n = cfg.network.neuron_count;
  const int outputs = std::max(
      1, static_cast<int>(std::ceil(cfg.network.output_fraction * n - 1e-9)));
  require(n >= channels + outputs, "network.neuron_count " + std::to_string(n) +
                                       " too small for " + std::to_string(channels) +
                                       " inputs and " + std::to_string(outputs) + " outputs");
  HeterogeneityConfig het = cfg.network.heterogeneity;
  het.seed = derive_seed(seed, "network");
  if (kind != ModelKind::kHrsnn) het = het.homogeneous();
  std::vector<int> inputs(channels), outs(outputs);
  for (int k = 0; k < channels; ++k) inputs[k] = k;
  for (int k = 0; k < outputs; ++k) outs[k] = n - outputs + k;
  return build_network(het, n, inputs, outs);
}

TrainedModel train_model(const ExperimentConfig& cfg, ModelKind kind, const PreparedData& data,
                         std::uint64_t seed, bool keep_snapshots) {
  TrainedModel m;
  m.kind = kind;
  m.label = model_name(kind);
  const NetworkTopology net = initial_network(cfg, kind, data.channels, seed);
  const SimOptions sim = cfg.sim_options();
  if (kind == ModelKind::kBprsnn) {
    TrainConfig tc = cfg.bptt;
    tc.seed = derive_seed(seed, "bptt");
    tc.keep_snapshots = keep_snapshots;
    auto res = train_bptt(net, data.train.rasters, data.train.labels, data.classes, tc, sim);
    m.network = std::move(res.network);
    m.readout = std::move(res.readout);
    m.bptt_curve = std::move(res.curve);
    m.snapshots = std::move(res.snapshots);
  } else {
    auto res = train_unsupervised(net, data.train.rasters, cfg.stdp_epochs, sim,
                                  derive_seed(seed, "stdp"), cfg.plasticity);
    m.network = std::move(res.network);
    m.stdp_log = std::move(res.log);
  }
  return m;
}

ModelResponses collect_responses(const ExperimentConfig& cfg, const TrainedModel& model,
                                 const PreparedData& data) {
  const SimOptions sim = cfg.sim_options();
  ModelResponses r;
  r.label = model.label;
  r.layers = extract_layers(model.network, cfg.analysis.bottleneck_fraction,
                            cfg.analysis.band_fraction);
  r.test = simulate_all(model.network, data.test.rasters, sim);
  r.stimulus_hash = data.stimulus_hash;
  if (model.readout) {
    r.test_accuracy =
        evaluate(model.network, *model.readout, data.test.rasters, data.test.labels, sim).accuracy;
  } else {
    const auto train = simulate_all(model.network, data.train.rasters, sim);
    std::vector<std::vector<double>> xtr, xte;
    for (const auto& s : train) xtr.push_back(output_rates(s, model.network.output_ids));
    for (const auto& s : r.test) xte.push_back(output_rates(s, model.network.output_ids));
    LogisticProbe probe;
    probe.fit(xtr, data.train.labels, data.classes);
    r.test_accuracy = probe.accuracy(xte, data.test.labels);
  }
  return r;
}

std::vector<int> layer_neurons(const LayerAssignment& la, const std::string& layer) {
  if (layer.size() != 2 || layer[0] != 'L' || layer[1] < '1' || layer[1] > '5') {
    throw ConfigError("unknown layer '" + layer + "'");
  }
  return la.layer(layer[1] - '0');
}

const PairEntry& ComparisonReport::find(const std::string& a, const std::string& b,
                                        const std::string& layer) const {
  for (const auto& p : pairs) {
    if (p.layer == layer && ((p.model_a == a && p.model_b == b) || (p.model_a == b && p.model_b == a))) {
      return p;
    }
  }
  throw InputDomainError("no comparison " + a + "/" + b + " at " + layer);
}

nlohmann::json to_json(const ComparisonReport& r) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : r.pairs) {
    pairs.push_back({{"model_a", p.model_a},
                     {"model_b", p.model_b},
                     {"layer", p.layer},
                     {"report", to_json(p.report)}});
  }
  nlohmann::json delta = nlohmann::json::array();
  for (const auto& [a, acc_a] : r.accuracy) {
    for (const auto& [b, acc_b] : r.accuracy) {
      if (a < b) {
        delta.push_back({{"model_a", a}, {"model_b", b}, {"signed_test_accuracy_difference", acc_a - acc_b}});
      }
    }
  }
  return {{"pairs", pairs},
          {"test_accuracy", r.accuracy},
          {"delta_accuracy", delta},
          {"stimulus_hash", r.stimulus_hash},
          {"metadata", r.metadata}};
}

ComparisonReport compare_models(const ExperimentConfig& cfg,
                                const std::vector<ModelResponses>& models,
                                const std::string& out_dir) {
  ComparisonReport report;
  if (models.empty()) throw InputDomainError("compare_models: no models");
  report.stimulus_hash = models[0].stimulus_hash;
  for (const auto& m : models) {
    if (m.stimulus_hash != report.stimulus_hash) {
      throw StageError("compare", "models were probed with different stimulus sets");
    }
    report.accuracy[m.label] = m.test_accuracy;
  }

  const auto& layers = cfg.analysis.layers;
  // matrices[model][layer]
  std::vector<std::vector<DistanceMatrixResult>> matrices(models.size(),
                                                          std::vector<DistanceMatrixResult>(layers.size()));
  for (std::size_t m = 0; m < models.size(); ++m) {
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto neurons = layer_neurons(models[m].layers, layers[l]);
      matrices[m][l] = distance_matrix(models[m].test, neurons);
      if (!out_dir.empty()) {
        const fs::path base = fs::path(out_dir);
        fs::create_directories(base / "matrices");
        fs::create_directories(base / "mds");
        const std::string stem = models[m].label + "_" + layers[l];
        write_distance_matrix(matrices[m][l], neurons, (base / "matrices" / (stem + ".csv")).string());
        const int n = matrices[m][l].matrix.size();
        if (cfg.analysis.mds_dims < n) {
          write_coordinates_csv(classical_mds(matrices[m][l].matrix, cfg.analysis.mds_dims),
                                (base / "mds" / (stem + ".csv")).string());
        }
      }
    }
  }

  struct Job {
    std::size_t a, b, l;
  };
  std::vector<Job> jobs;
  for (std::size_t a = 0; a < models.size(); ++a) {
    for (std::size_t b = a; b < models.size(); ++b) {
      for (std::size_t l = 0; l < layers.size(); ++l) jobs.push_back({a, b, l});
    }
  }
  std::vector<PairEntry> entries(jobs.size());
  parallel_each(entries, [&](long k, PairEntry& e) {
    const Job& j = jobs[k];
    e.model_a = models[j.a].label;
    e.model_b = models[j.b].label;
    e.layer = layers[j.l];
    e.report = rtd_score(matrices[j.a][j.l].matrix, matrices[j.b][j.l].matrix, e.model_a, e.model_b);
  });
  report.pairs = std::move(entries);
  if (!out_dir.empty()) {
    for (const auto& e : report.pairs) {
      write_json(to_json(e.report),
                 fs::path(out_dir) / "rtd" / (e.model_a + "__" + e.model_b + "__" + e.layer + ".json"));
    }
  }
  return report;
}

ComparisonReport run_experiment(const ExperimentConfig& cfg, const std::string& out_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  cfg.validate();
  const fs::path base(out_dir);
  fs::create_directories(base);
  write_json(to_json(cfg), base / "config.json");

  const PreparedData data = stage("data", [&] { return prepare_data(cfg); });
  if (cfg.analysis.write_responses) {
    stage("data", [&] {
      write_labeled_rasters(data.test, (base / "stimuli").string(), "stim");
      return 0;
    });
  }

  std::vector<TrainedModel> trained(cfg.models.size());
  stage("train", [&] {
    parallel_each(trained, [&](long k, TrainedModel& m) {
      m = train_model(cfg, cfg.models[k], data, cfg.seed);
    });
    return 0;
  });
  fs::create_directories(base / "networks");
  fs::create_directories(base / "logs");
  for (const auto& m : trained) {
    save_network(m.network, (base / "networks" / (m.label + ".json")).string());
    if (m.readout) write_json(to_json(*m.readout), base / "networks" / (m.label + "_readout.json"));
    if (!m.stdp_log.empty() || m.kind != ModelKind::kBprsnn) {
      write_training_log(m.stdp_log, (base / "logs" / (m.label + "_stdp.csv")).string());
    }
    if (m.kind == ModelKind::kBprsnn) {
      write_training_curve(m.bptt_curve, (base / "logs" / (m.label + "_curve.csv")).string());
    }
  }

  std::vector<ModelResponses> responses(trained.size());
  stage("respond", [&] {
    parallel_each(responses, [&](long k, ModelResponses& r) {
      r = collect_responses(cfg, trained[k], data);
    });
    for (const auto& r : responses) {
      write_json(to_json(r.layers), base / "layers" / (r.label + ".json"));
      std::ofstream dot(base / "layers" / (r.label + ".dot"));
      const auto& net = trained[&r - responses.data()].network;
      dot << to_dot(net, r.layers);
      if (cfg.analysis.write_responses) {
        LabeledRasters lr{r.test, data.test.labels};
        write_labeled_rasters(lr, (base / "responses" / r.label).string(), "resp");
      }
    }
    return 0;
  });

  ComparisonReport report =
      stage("compare", [&] { return compare_models(cfg, responses, out_dir); });

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report.metadata = {{"config", to_json(cfg)},
                     {"version", kVersion},
                     {"wall_time_s", wall},
                     {"created_at", now_utc("%Y-%m-%dT%H:%M:%SZ")}};
  stage("report", [&] {
    write_json(to_json(report), base / "comparison_report.json");
    nlohmann::json files = nlohmann::json::array();
    for (const auto& e : fs::recursive_directory_iterator(base)) {
      if (e.is_regular_file()) files.push_back(fs::relative(e.path(), base).string());
    }
    std::sort(files.begin(), files.end());
    write_json({{"version", kVersion},
                {"created_at", report.metadata["created_at"]},
                {"stimulus_hash", report.stimulus_hash},
                {"files", files}},
               base / "manifest.json");
    return 0;
  });
  return report;
}

std::vector<ComparisonReport> sweep_neurons(const ExperimentConfig& cfg,
                                            const std::vector<int>& neuron_counts,
                                            const std::string& out_dir) {
  require(!neuron_counts.empty(), "sweep: neuron_counts must be nonempty");
  for (std::size_t k = 0; k < neuron_counts.size(); ++k) {
    require(neuron_counts[k] >= 20, "sweep: every neuron count must be >= 20");
    require(k == 0 || neuron_counts[k] > neuron_counts[k - 1], "sweep: counts must be ascending");
  }
  std::vector<ComparisonReport> reports;
  fs::create_directories(out_dir);
  std::ofstream csv(fs::path(out_dir) / "sweep.csv");
  csv.precision(17);
  csv << "neuron_count,pair,layer,rtd\n";
  for (int count : neuron_counts) {
    ExperimentConfig c = cfg;
    c.network.neuron_count = count;
    auto report = run_experiment(c, (fs::path(out_dir) / ("n" + std::to_string(count))).string());
    for (const auto& p : report.pairs) {
      if (p.model_a == p.model_b) continue;
      csv << count << ',' << p.model_a << '-' << p.model_b << ',' << p.layer << ',' << p.report.rtd
          << '\n';
    }
    reports.push_back(std::move(report));
  }
  return reports;
}

TrackResult track_epochs(const ExperimentConfig& cfg, int epochs, const std::string& out_dir) {
  require(epochs >= 1, "track: epochs must be >= 1");
  cfg.validate();
  const PreparedData data = stage("data", [&] { return prepare_data(cfg); });
  ExperimentConfig bp_cfg = cfg;
  bp_cfg.bptt.epochs = epochs;

  std::vector<TrainedModel> trained(2);
  stage("train", [&] {
    parallel_each(trained, [&](long k, TrainedModel& m) {
      m = k == 0 ? train_model(cfg, ModelKind::kHrsnn, data, cfg.seed)
                 : train_model(bp_cfg, ModelKind::kBprsnn, data, cfg.seed, true);
    });
    return 0;
  });
  const TrainedModel& h = trained[0];
  const TrainedModel& bp = trained[1];
  if (static_cast<int>(bp.snapshots.size()) != epochs + 1) {
    throw StageError("track", "missing BPRSNN snapshots");
  }

  TrackResult result;
  const auto h_resp = stage("respond", [&] { return collect_responses(cfg, h, data); });
  result.hrsnn_accuracy = h_resp.test_accuracy;
  const auto h_l3 = distance_matrix(h_resp.test, layer_neurons(h_resp.layers, "L3"));

  std::vector<ModelResponses> snaps(bp.snapshots.size());
  stage("respond", [&] {
    for (std::size_t e = 0; e < snaps.size(); ++e) {
      TrainedModel m;
      m.kind = ModelKind::kBprsnn;
      m.label = "BPRSNN_e" + std::to_string(bp.snapshots[e].epoch);
      m.network = bp.snapshots[e].network;
      m.readout = bp.snapshots[e].readout;
      snaps[e] = collect_responses(cfg, m, data);
    }
    return 0;
  });

  stage("compare", [&] {
    const auto l3_0 = distance_matrix(snaps[0].test, layer_neurons(snaps[0].layers, "L3"));
    result.control_rtd = rtd_score(l3_0.matrix, l3_0.matrix).rtd;
    for (int e = 1; e <= epochs; ++e) {
      const auto d = distance_matrix(snaps[e].test, layer_neurons(snaps[e].layers, "L3"));
      result.rows.push_back({e, snaps[e].test_accuracy, rtd_score(h_l3.matrix, d.matrix).rtd});
    }
    return 0;
  });

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream csv(fs::path(out_dir) / "track.csv");
    csv.precision(17);
    csv << "epoch,bp_accuracy,rtd\n";
    for (const auto& r : result.rows) csv << r.epoch << ',' << r.bp_accuracy << ',' << r.rtd << '\n';
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : result.rows) {
      rows.push_back({{"epoch", r.epoch}, {"bp_accuracy", r.bp_accuracy}, {"rtd", r.rtd}});
    }
    write_json({{"rows", rows},
                {"control_rtd", result.control_rtd},
                {"hrsnn_accuracy", result.hrsnn_accuracy},
                {"config", to_json(cfg)}},
               fs::path(out_dir) / "track.json");
  }
  return result;
}

std::string make_run_dir(const std::string& base) {
  const std::string stamp = "run-" + now_utc("%Y%m%d-%H%M%S");
  fs::path dir = fs::path(base) / stamp;
  for (int k = 1; fs::exists(dir); ++k) dir = fs::path(base) / (stamp + "-" + std::to_string(k));
  fs::create_directories(dir);
  return dir.string();
}

}  // namespace spiketopo
