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

#ifndef SPIKETOPO_SURROGATE_TRAINER_HPP_
#define SPIKETOPO_SURROGATE_TRAINER_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "spiketopo/lif_sim.hpp"
#include "spiketopo/net_graph.hpp"

namespace spiketopo {

struct TrainConfig {
  int epochs = 20;
  double learning_rate = 0.03;
  double surrogate_beta = 10.0;
  /// Gradients are cut every `truncation_length` steps going backwards.
  long truncation_length = 1L << 40;
  int batch_size = 8;
  double momentum = 0.5;
  /// Epoch e uses learning_rate / (1 + lr_decay * (e - 1)).
  double lr_decay = 0.0;
  /// Rescales the batch gradient to this global L2 norm when larger; 0 = off.
  double grad_clip = 0.0;
  std::uint64_t seed = 1;
  bool train_input = true;
  bool train_recurrent = true;
  bool keep_snapshots = false;

  void validate() const;
};

TrainConfig train_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TrainConfig& c);

/// Fast-sigmoid surrogate derivative 1 / (1 + beta |v - v_th|)^2.
inline double surrogate_grad(double v, double v_th, double beta) {
  const double d = 1.0 + beta * std::abs(v - v_th);
  return 1.0 / (d * d);
}

/// Linear non-spiking decoder on output-neuron spike counts.
struct Readout {
  int classes = 0;
  int inputs = 0;
  std::vector<double> weights;  // classes x inputs, row major
  std::vector<double> bias;

  Readout() = default;
  Readout(int n_classes, int n_inputs)
      : classes(n_classes), inputs(n_inputs), weights(n_classes * n_inputs, 0.0),
        bias(n_classes, 0.0) {}

  std::vector<double> logits(std::span<const double> x) const;
  int predict(std::span<const double> x) const;
  bool operator==(const Readout&) const = default;
};

nlohmann::json to_json(const Readout& r);
Readout readout_from_json(const nlohmann::json& j);

/// Spike counts of `ids` in the raster, in the order of `ids`.
std::vector<double> spike_counts(const SpikeRaster& raster, std::span<const int> ids);

/// Mean softmax cross-entropy of the readout over a batch of count vectors,
/// and its exact gradient with respect to weights and bias.
struct ReadoutGradient {
  double loss = 0.0;
  std::vector<double> d_weights;
  std::vector<double> d_bias;
};
ReadoutGradient readout_loss_and_grad(const Readout& r,
                                      std::span<const std::vector<double>> features,
                                      std::span<const int> labels);

struct EpochStats {
  int epoch = 0;
  double loss = 0.0;
  double train_accuracy = 0.0;
};

struct Snapshot {
  int epoch = 0;
  NetworkTopology network;
  Readout readout;
};

struct BpttResult {
  NetworkTopology network;
  Readout readout;
  std::vector<EpochStats> curve;
  /// Snapshot 0 is the initial state; snapshot e follows epoch e.
  std::vector<Snapshot> snapshots;
};

/// Gradient descent on recurrent + input weights and the readout, with the
/// spike nonlinearity's derivative replaced by surrogate_grad and the reset
/// path detached. Forward passes are LifEngine::run.
BpttResult train_bptt(const NetworkTopology& net, std::span<const SpikeRaster> inputs,
                      std::span<const int> labels, int classes, const TrainConfig& cfg,
                      const SimOptions& sim);

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
};
Evaluation evaluate(const NetworkTopology& net, const Readout& readout,
                    std::span<const SpikeRaster> inputs, std::span<const int> labels,
                    const SimOptions& sim);

void write_training_curve(const std::vector<EpochStats>& curve, const std::string& path);

}  // namespace spiketopo

#endif  // SPIKETOPO_SURROGATE_TRAINER_HPP_
