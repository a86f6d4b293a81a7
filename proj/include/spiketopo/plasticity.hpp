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

#ifndef SPIKETOPO_PLASTICITY_HPP_
#define SPIKETOPO_PLASTICITY_HPP_

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "spiketopo/lif_sim.hpp"
#include "spiketopo/net_graph.hpp"

namespace spiketopo {

/// Soft-bounded pair rule. delta_t = t_post - t_pre.
///   delta_t >= 0:  eta_plus  * (w_max - w) * exp(-|delta_t| / tau_plus)
///   delta_t <  0: -eta_minus * (w - w_min) * exp(-|delta_t| / tau_minus)
double stdp_delta(double delta_t, const SynapseParams& p, double w);

/// Most recent spike time per neuron and per input channel. The implied
/// exponential traces are evaluated lazily from these timestamps.
class PlasticityTrace {
 public:
  static constexpr double kNever = -std::numeric_limits<double>::infinity();

  PlasticityTrace(int neurons, int channels)
      : neuron_last_(neurons, kNever), channel_last_(channels, kNever) {}

  double neuron_last(int i) const { return neuron_last_[i]; }
  double channel_last(int c) const { return channel_last_[c]; }
  void mark_neuron(int i, double t) { neuron_last_[i] = t; }
  void mark_channel(int c, double t) { channel_last_[c] = t; }

  /// exp(-(t - last)/tau), or 0 if there was no spike yet.
  static double trace(double last, double t, double tau) {
    return last == kNever ? 0.0 : std::exp(-(t - last) / tau);
  }

 private:
  std::vector<double> neuron_last_;
  std::vector<double> channel_last_;
};

struct PlasticityConfig {
  bool input_plastic = true;
  bool recurrent_plastic = true;
};

/// Online nearest-neighbour STDP, usable as a LifEngine step hook.
///
/// Each presynaptic event is depressed against the latest earlier spike of
/// the postsynaptic neuron; each postsynaptic spike is potentiated against
/// the latest presynaptic event up to and including the same instant.
class StdpRule {
 public:
  StdpRule(const NetworkTopology& net, LifEngine& engine, PlasticityConfig cfg = {});

  void operator()(const StepView& step);

  /// Starts a fresh presentation: forgets spike history, keeps weights.
  void reset_history();

  double total_abs_update() const { return total_abs_update_; }
  long update_count() const { return update_count_; }

 private:
  void apply(double& w, const SynapseParams& p, double delta_t);

  const NetworkTopology* net_;
  LifEngine* engine_;
  PlasticityConfig cfg_;
  PlasticityTrace trace_;
  std::vector<std::vector<std::pair<int, int>>> incoming_;  // post -> (pre, synapse)
  std::vector<int> channel_of_;                             // neuron -> input channel or -1
  double total_abs_update_ = 0.0;
  long update_count_ = 0;
};

struct TrainingLogRow {
  int epoch = 0;
  double mean_abs_dw = 0.0;
  double q05 = 0.0, q25 = 0.0, q50 = 0.0, q75 = 0.0, q95 = 0.0;
};

struct UnsupervisedResult {
  NetworkTopology network;
  std::vector<TrainingLogRow> log;
};

/// Presents every raster once per epoch (order shuffled by `seed`) with
/// plasticity on; weights carry over between presentations.
UnsupervisedResult train_unsupervised(const NetworkTopology& net,
                                      std::span<const SpikeRaster> dataset, int epochs,
                                      const SimOptions& sim, std::uint64_t seed,
                                      PlasticityConfig cfg = {});

/// Feature-vector variant: each presentation is rate encoded afresh.
UnsupervisedResult train_unsupervised(const NetworkTopology& net,
                                      std::span<const std::vector<double>> features, int epochs,
                                      const SimOptions& sim, double max_rate_hz,
                                      std::uint64_t seed, PlasticityConfig cfg = {});

void write_training_log(const std::vector<TrainingLogRow>& log, const std::string& path);

}  // namespace spiketopo

#endif  // SPIKETOPO_PLASTICITY_HPP_
