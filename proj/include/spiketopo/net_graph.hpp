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

#ifndef SPIKETOPO_NET_GRAPH_HPP_
#define SPIKETOPO_NET_GRAPH_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace spiketopo {

/// Leaky integrate-and-fire parameters of one neuron. Times in ms, potentials in mV.
struct NeuronParams {
  double tau_m = 20.0;
  double v_th = 1.0;
  double v_rest = 0.0;
  double v_reset = 0.0;
  double t_ref = 2.0;

  bool operator==(const NeuronParams&) const = default;
};

/// Weight and soft-bounded STDP parameters of one synapse.
struct SynapseParams {
  double weight = 0.5;
  double tau_plus = 20.0;
  double tau_minus = 20.0;
  double eta_plus = 0.01;
  double eta_minus = 0.01;
  double w_min = 0.0;
  double w_max = 1.0;
  bool plastic = true;

  bool operator==(const SynapseParams&) const = default;
};

struct Synapse {
  int pre = 0;
  int post = 0;
  SynapseParams params;

  bool operator==(const Synapse&) const = default;
};

/// Directed weighted graph of LIF neurons.
///
/// `input_synapses[k]` is the projection from external input channel k onto
/// neuron `input_ids[k]`; it carries its own STDP parameters so that input
/// weights can be plastic too. Input and output neurons take part in the
/// recurrent wiring like every other neuron.
struct NetworkTopology {
  int neuron_count = 0;
  std::vector<NeuronParams> neurons;
  std::vector<Synapse> synapses;
  std::vector<int> input_ids;
  std::vector<int> output_ids;
  std::vector<SynapseParams> input_synapses;
  nlohmann::json config_echo = nlohmann::json::object();

  /// Throws ConfigError describing the first violated invariant.
  void validate() const;

  bool operator==(const NetworkTopology&) const = default;
};

enum class Family { kConstant, kUniform, kLognormal, kGamma };

/// One parameter distribution followed by a clamp to [lo, hi].
///
///   constant:  value = a
///   uniform:   U[a, b]
///   lognormal: median a (> 0), log-space standard deviation b (>= 0)
///   gamma:     mean a (> 0), coefficient of variation b (> 0)
struct DistSpec {
  Family family = Family::kConstant;
  double a = 0.0;
  double b = 0.0;
  double lo = -1e300;
  double hi = 1e300;

  static DistSpec constant(double v, double lo = -1e300, double hi = 1e300) {
    return {Family::kConstant, v, 0.0, lo, hi};
  }
  static DistSpec uniform(double lo_v, double hi_v) {
    return {Family::kUniform, lo_v, hi_v, lo_v, hi_v};
  }
  static DistSpec lognormal(double median, double sigma, double lo, double hi) {
    return {Family::kLognormal, median, sigma, lo, hi};
  }
  static DistSpec gamma(double mean, double cv, double lo, double hi) {
    return {Family::kGamma, mean, cv, lo, hi};
  }
};

/// Heterogeneity of neuron and synapse parameters plus wiring density.
/// All-constant families give the homogeneous network.
struct HeterogeneityConfig {
  DistSpec tau_m = DistSpec::lognormal(20.0, 0.4, 5.0, 80.0);
  DistSpec v_th = DistSpec::uniform(0.8, 1.2);
  DistSpec tau_plus = DistSpec::gamma(20.0, 0.5, 2.0, 100.0);
  DistSpec tau_minus = DistSpec::gamma(20.0, 0.5, 2.0, 100.0);
  DistSpec eta_plus = DistSpec::gamma(0.01, 0.5, 0.0, 0.5);
  DistSpec eta_minus = DistSpec::gamma(0.01, 0.5, 0.0, 0.5);

  double v_rest = 0.0;
  double v_reset = 0.0;
  double t_ref = 2.0;
  double w_min = 0.0;
  double w_max = 1.0;
  /// Initial recurrent weights are uniform in [w_init_lo, w_init_hi]; unset
  /// ends fall back to w_min / w_max.
  std::optional<double> w_init_lo;
  std::optional<double> w_init_hi;
  double input_w_min = 0.0;
  double input_w_max = 2.0;
  double input_w_init_lo = 0.5;
  double input_w_init_hi = 1.5;
  double connection_probability = 0.2;
  std::uint64_t seed = 1;

  /// The same config with every distribution replaced by a constant at its
  /// central value (median or mean, clamped).
  HeterogeneityConfig homogeneous() const;
};

/// Draws `count` values from the stream keyed by (seed, field). Throws
/// ConfigError naming `field` on invalid distribution parameters.
std::vector<double> sample_series(const DistSpec& spec, const std::string& field,
                                  std::uint64_t seed, std::size_t count);

std::vector<NeuronParams> sample_params(const HeterogeneityConfig& cfg, int n,
                                        std::uint64_t seed);

/// Erdos-Renyi directed wiring (no self loops) at cfg.connection_probability,
/// weights uniform in [w_min, w_max], STDP parameters from cfg.
NetworkTopology build_network(const HeterogeneityConfig& cfg, int neuron_count,
                              const std::vector<int>& input_ids,
                              const std::vector<int>& output_ids);

nlohmann::json to_json(const DistSpec& d);
DistSpec dist_from_json(const nlohmann::json& j, const std::string& field);
nlohmann::json to_json(const HeterogeneityConfig& cfg);
HeterogeneityConfig heterogeneity_from_json(const nlohmann::json& j);

inline constexpr int kNetworkFormatVersion = 1;
nlohmann::json to_json(const NetworkTopology& net);
NetworkTopology network_from_json(const nlohmann::json& j);
void save_network(const NetworkTopology& net, const std::string& path);
NetworkTopology load_network(const std::string& path);

}  // namespace spiketopo

#endif  // SPIKETOPO_NET_GRAPH_HPP_
