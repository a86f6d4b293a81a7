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

#include "spiketopo/plasticity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "spiketopo/errors.hpp"
#include "spiketopo/rng.hpp"

namespace spiketopo {

double stdp_delta(double delta_t, const SynapseParams& p, double w) {
  if (delta_t >= 0.0) return p.eta_plus * (p.w_max - w) * std::exp(-std::abs(delta_t) / p.tau_plus);
  return -p.eta_minus * (w - p.w_min) * std::exp(-std::abs(delta_t) / p.tau_minus);
}

StdpRule::StdpRule(const NetworkTopology& net, LifEngine& engine, PlasticityConfig cfg)
    : net_(&net),
      engine_(&engine),
      cfg_(cfg),
      trace_(net.neuron_count, static_cast<int>(net.input_ids.size())),
      incoming_(net.neuron_count),
      channel_of_(net.neuron_count, -1) {
  for (std::size_t s = 0; s < net.synapses.size(); ++s) {
    incoming_[net.synapses[s].post].emplace_back(net.synapses[s].pre, static_cast<int>(s));
  }
  for (auto& in : incoming_) std::sort(in.begin(), in.end());
  for (std::size_t c = 0; c < net.input_ids.size(); ++c) {
    channel_of_[net.input_ids[c]] = static_cast<int>(c);
  }
}

void StdpRule::reset_history() {
  trace_ = PlasticityTrace(net_->neuron_count, static_cast<int>(net_->input_ids.size()));
}

void StdpRule::apply(double& w, const SynapseParams& p, double delta_t) {
  if (!p.plastic) return;
  const double dw = stdp_delta(delta_t, p, w);
  const double before = w;
  w = std::clamp(w + dw, p.w_min, p.w_max);
  total_abs_update_ += std::abs(w - before);
  ++update_count_;
}

void StdpRule::operator()(const StepView& step) {
  auto& weights = engine_->weights();
  auto& in_weights = engine_->input_weights();

  // Presynaptic events first, paired with strictly earlier postsynaptic spikes.
  if (cfg_.input_plastic) {
    for (const auto& ev : step.inputs) {
      const double last_post = trace_.neuron_last(net_->input_ids[ev.channel]);
      if (last_post != PlasticityTrace::kNever && last_post < ev.time) {
        apply(in_weights[ev.channel], net_->input_synapses[ev.channel], last_post - ev.time);
      }
    }
  }
  if (cfg_.recurrent_plastic) {
    for (int pre : step.spikes) {
      for (const auto& [post, syn] : engine_->outgoing(pre)) {
        const double last_post = trace_.neuron_last(post);
        if (last_post != PlasticityTrace::kNever && last_post < step.t_end) {
          apply(weights[syn], net_->synapses[syn].params, last_post - step.t_end);
        }
      }
    }
  }

  for (const auto& ev : step.inputs) trace_.mark_channel(ev.channel, ev.time);
  for (int i : step.spikes) trace_.mark_neuron(i, step.t_end);

  // Postsynaptic spikes, paired with the latest presynaptic event (delta_t >= 0).
  for (int post : step.spikes) {
    if (cfg_.recurrent_plastic) {
      for (const auto& [pre, syn] : incoming_[post]) {
        const double last_pre = trace_.neuron_last(pre);
        if (last_pre != PlasticityTrace::kNever) {
          apply(weights[syn], net_->synapses[syn].params, step.t_end - last_pre);
        }
      }
    }
    const int c = channel_of_[post];
    if (cfg_.input_plastic && c >= 0) {
      const double last_pre = trace_.channel_last(c);
      if (last_pre != PlasticityTrace::kNever) {
        apply(in_weights[c], net_->input_synapses[c], step.t_end - last_pre);
      }
    }
  }
}

namespace {

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

template <class Present>
UnsupervisedResult run_epochs(const NetworkTopology& net, std::size_t samples, int epochs,
                              const SimOptions& sim, std::uint64_t seed, PlasticityConfig cfg,
                              Present&& present) {
  if (samples == 0) throw InputDomainError("train_unsupervised: empty dataset");
  if (epochs < 0) throw InputDomainError("train_unsupervised: negative epoch count");
  net.validate();
  UnsupervisedResult result{net, {}};
  LifEngine engine(net, sim.dt);
  StdpRule rule(result.network, engine, cfg);

  std::vector<std::size_t> order(samples);
  for (int epoch = 0; epoch < epochs; ++epoch) {
    const std::vector<double> before = engine.weights();
    std::iota(order.begin(), order.end(), 0);
    Rng rng = make_rng(seed, "presentation_order", static_cast<std::uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t idx : order) {
      rule.reset_history();
      present(engine, rule, epoch, idx);
    }
    TrainingLogRow row;
    row.epoch = epoch + 1;
    double sum = 0.0;
    for (std::size_t s = 0; s < before.size(); ++s) sum += std::abs(engine.weights()[s] - before[s]);
    row.mean_abs_dw = before.empty() ? 0.0 : sum / static_cast<double>(before.size());
    row.q05 = quantile(engine.weights(), 0.05);
    row.q25 = quantile(engine.weights(), 0.25);
    row.q50 = quantile(engine.weights(), 0.50);
    row.q75 = quantile(engine.weights(), 0.75);
    row.q95 = quantile(engine.weights(), 0.95);
    result.log.push_back(row);
  }
  engine.store_weights(result.network);
  return result;
}

}  // namespace

UnsupervisedResult train_unsupervised(const NetworkTopology& net,
                                      std::span<const SpikeRaster> dataset, int epochs,
                                      const SimOptions& sim, std::uint64_t seed,
                                      PlasticityConfig cfg) {
  return run_epochs(net, dataset.size(), epochs, sim, seed, cfg,
                    [&](LifEngine& engine, StdpRule& rule, int, std::size_t idx) {
                      engine.run(dataset[idx], sim.duration, sim.bias, rule);
                    });
}

UnsupervisedResult train_unsupervised(const NetworkTopology& net,
                                      std::span<const std::vector<double>> features, int epochs,
                                      const SimOptions& sim, double max_rate_hz,
                                      std::uint64_t seed, PlasticityConfig cfg) {
  return run_epochs(net, features.size(), epochs, sim, seed, cfg,
                    [&](LifEngine& engine, StdpRule& rule, int epoch, std::size_t idx) {
                      const auto enc_seed = derive_seed(seed, "train_encode",
                                                        static_cast<std::uint64_t>(epoch), idx);
                      const auto input =
                          rate_encode(features[idx], sim.duration, max_rate_hz, enc_seed, sim.dt);
                      engine.run(input, sim.duration, sim.bias, rule);
                    });
}

void write_training_log(const std::vector<TrainingLogRow>& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "epoch,mean_abs_dw,q05,q25,q50,q75,q95\n";
  out.precision(17);
  for (const auto& r : log) {
    out << r.epoch << ',' << r.mean_abs_dw << ',' << r.q05 << ',' << r.q25 << ',' << r.q50 << ','
        << r.q75 << ',' << r.q95 << '\n';
  }
}

}  // namespace spiketopo
