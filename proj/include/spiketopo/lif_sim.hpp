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

#ifndef SPIKETOPO_LIF_SIM_HPP_
#define SPIKETOPO_LIF_SIM_HPP_

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "spiketopo/net_graph.hpp"

namespace spiketopo {

/// Strictly increasing spike times in ms.
using SpikeTrain = std::vector<double>;

struct SpikeRaster {
  double duration = 0.0;
  double dt = 0.1;
  std::vector<SpikeTrain> trains;

  int neuron_count() const { return static_cast<int>(trains.size()); }
  std::size_t total_spikes() const;
  /// Throws InputDomainError if a train is unsorted or has times outside [0, duration).
  void validate() const;

  bool operator==(const SpikeRaster&) const = default;
};

/// Independent Poisson trains, channel i firing at features[i] * max_rate_hz.
SpikeRaster rate_encode(std::span<const double> features, double duration, double max_rate_hz,
                        std::uint64_t seed, double dt = 0.1);

struct SimOptions {
  double dt = 0.1;
  double duration = 100.0;
  /// Constant external current per neuron (same units as v); empty means zero.
  std::vector<double> bias;
};

/// One input spike falling inside a step.
struct InputEvent {
  int channel;
  double time;
};

/// What a step hook sees after the membrane update of step k, which covers
/// [k*dt, (k+1)*dt). Spikes in `spikes` are stamped at `t_end`.
struct StepView {
  long step;
  double t_end;
  std::span<const InputEvent> inputs;
  std::span<const int> presyn;          // recurrent spikes delivered during this step
  std::span<const double> v_pre;        // potential before threshold/reset
  std::span<const unsigned char> clamped;  // 1 if the neuron was refractory this step
  std::span<const int> spikes;
};

/// Precompiled network for clocked exponential-Euler LIF simulation.
///
/// Synaptic events are delta-current pulses: a spike from j adds w_ij to the
/// potential of i in the step after j fires. External input channel k pulses
/// neuron input_ids[k] with input weight k.
class LifEngine {
 public:
  LifEngine(const NetworkTopology& net, double dt);

  double dt() const { return dt_; }
  int neuron_count() const { return n_; }

  std::vector<double>& weights() { return weights_; }
  const std::vector<double>& weights() const { return weights_; }
  std::vector<double>& input_weights() { return input_weights_; }
  const std::vector<double>& input_weights() const { return input_weights_; }

  /// (post, synapse index) pairs for outgoing synapses of `pre`, sorted.
  std::span<const std::pair<int, int>> outgoing(int pre) const {
    return {out_.data() + out_offset_[pre], out_.data() + out_offset_[pre + 1]};
  }
  double decay(int i) const { return decay_[i]; }

  /// Copies current weights back into `net`.
  void store_weights(NetworkTopology& net) const;

  /// Runs one window from rest. `hook(const StepView&)` is invoked after
  /// every step and may modify weights() / input_weights().
  template <class Hook>
  SpikeRaster run(const SpikeRaster& input, double duration, std::span<const double> bias,
                  Hook&& hook);

  SpikeRaster run(const SpikeRaster& input, double duration, std::span<const double> bias) {
    return run(input, duration, bias, [](const StepView&) {});
  }

  long steps_for(double duration) const { return std::lround(duration / dt_); }

 private:
  std::vector<std::vector<InputEvent>> bin_inputs(const SpikeRaster& input, long steps) const;

  int n_;
  double dt_;
  std::vector<NeuronParams> neurons_;
  std::vector<double> decay_;
  std::vector<int> refractory_steps_;
  std::vector<int> input_ids_;
  std::vector<double> weights_;
  std::vector<double> input_weights_;
  std::vector<std::pair<int, int>> out_;
  std::vector<std::size_t> out_offset_;
};

/// Plain simulation with frozen weights.
SpikeRaster simulate(const NetworkTopology& net, const SpikeRaster& input, const SimOptions& opts);

/// Spikes per second for each train inside [t0, t1).
std::vector<double> readout_rates(const SpikeRaster& raster, double t0, double t1);

/// CSV `neuron_id,time_ms` plus `<path minus .csv>.json` sidecar holding
/// {duration, dt, neuron_count} merged with `extra`.
void write_raster_csv(const SpikeRaster& raster, const std::string& csv_path,
                      const nlohmann::json& extra = nlohmann::json::object());
/// Reads a raster written by write_raster_csv; `sidecar_out` receives the sidecar.
SpikeRaster read_raster_csv(const std::string& csv_path, nlohmann::json* sidecar_out = nullptr);
std::string sidecar_path(const std::string& csv_path);
/// Shortest fixed-point rendering with at least six decimals that parses back exactly.
std::string format_time(double t);

// ---------------------------------------------------------------------------

template <class Hook>
SpikeRaster LifEngine::run(const SpikeRaster& input, double duration,
                           std::span<const double> bias, Hook&& hook) {
  const long steps = steps_for(duration);
  const auto binned = bin_inputs(input, steps);

  std::vector<double> v(n_);
  std::vector<int> refractory(n_, 0);
  std::vector<double> charge(n_, 0.0);
  std::vector<double> v_pre(n_);
  std::vector<unsigned char> clamped(n_);
  std::vector<int> prev_spikes, spikes;
  for (int i = 0; i < n_; ++i) v[i] = neurons_[i].v_rest;

  SpikeRaster out;
  out.duration = duration;
  out.dt = dt_;
  out.trains.assign(n_, {});

  for (long k = 0; k < steps; ++k) {
    for (int j : prev_spikes) {
      for (const auto& [post, syn] : outgoing(j)) charge[post] += weights_[syn];
    }
    for (const auto& ev : binned[k]) charge[input_ids_[ev.channel]] += input_weights_[ev.channel];

    spikes.clear();
    for (int i = 0; i < n_; ++i) {
      const NeuronParams& p = neurons_[i];
      if (refractory[i] > 0) {
        --refractory[i];
        v[i] = p.v_reset;
        v_pre[i] = p.v_reset;
        clamped[i] = 1;
      } else {
        const double b = bias.empty() ? 0.0 : bias[i];
        const double a = decay_[i];
        v[i] = p.v_rest + (v[i] - p.v_rest) * a + b * (1.0 - a) + charge[i];
        v_pre[i] = v[i];
        clamped[i] = 0;
        if (v[i] >= p.v_th) {
          v[i] = p.v_reset;
          refractory[i] = refractory_steps_[i];
          spikes.push_back(i);
        }
      }
      charge[i] = 0.0;
    }
    const double t_end = static_cast<double>(k + 1) * dt_;
    if (k + 1 == steps) spikes.clear();  // t_end == duration lies outside the window
    for (int i : spikes) out.trains[i].push_back(t_end);
    hook(StepView{k, t_end, binned[k], prev_spikes, v_pre, clamped, spikes});
    std::swap(prev_spikes, spikes);
  }
  return out;
}

}  // namespace spiketopo

#endif  // SPIKETOPO_LIF_SIM_HPP_
