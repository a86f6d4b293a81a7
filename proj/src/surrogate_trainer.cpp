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

#include "spiketopo/surrogate_trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "spiketopo/errors.hpp"
#include "spiketopo/rng.hpp"

namespace spiketopo {

void TrainConfig::validate() const {
  if (epochs < 0) throw ConfigError("train: epochs must be >= 0");
  if (!(learning_rate >= 0.0)) throw ConfigError("train: learning_rate must be >= 0");
  if (!(surrogate_beta > 0.0)) throw ConfigError("train: surrogate_beta must be > 0");
  if (truncation_length < 1) throw ConfigError("train: truncation_length must be >= 1");
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("train: momentum must be in [0, 1)");
  if (!(lr_decay >= 0.0)) throw ConfigError("train: lr_decay must be >= 0");
  if (!(grad_clip >= 0.0)) throw ConfigError("train: grad_clip must be >= 0");
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  try {
    c.epochs = j.value("epochs", c.epochs);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.surrogate_beta = j.value("surrogate_beta", c.surrogate_beta);
    c.truncation_length = j.value("truncation_length", c.truncation_length);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.momentum = j.value("momentum", c.momentum);
    c.lr_decay = j.value("lr_decay", c.lr_decay);
    c.grad_clip = j.value("grad_clip", c.grad_clip);
    c.seed = j.value("seed", c.seed);
    c.train_input = j.value("train_input", c.train_input);
    c.train_recurrent = j.value("train_recurrent", c.train_recurrent);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("train: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"learning_rate", c.learning_rate},
          {"surrogate_beta", c.surrogate_beta},
          {"truncation_length", c.truncation_length},
          {"batch_size", c.batch_size},
          {"momentum", c.momentum},
          {"lr_decay", c.lr_decay},
          {"grad_clip", c.grad_clip},
          {"seed", c.seed},
          {"train_input", c.train_input},
          {"train_recurrent", c.train_recurrent}};
}

std::vector<double> Readout::logits(std::span<const double> x) const {
  std::vector<double> z(bias);
  for (int c = 0; c < classes; ++c) {
    for (int j = 0; j < inputs; ++j) z[c] += weights[c * inputs + j] * x[j];
  }
  return z;
}

int Readout::predict(std::span<const double> x) const {
  const auto z = logits(x);
  return static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
}

nlohmann::json to_json(const Readout& r) {
  return {{"classes", r.classes}, {"inputs", r.inputs}, {"weights", r.weights}, {"bias", r.bias}};
}

Readout readout_from_json(const nlohmann::json& j) {
  try {
    Readout r(j.at("classes").get<int>(), j.at("inputs").get<int>());
    r.weights = j.at("weights").get<std::vector<double>>();
    r.bias = j.at("bias").get<std::vector<double>>();
    if (r.weights.size() != static_cast<std::size_t>(r.classes * r.inputs) ||
        r.bias.size() != static_cast<std::size_t>(r.classes)) {
      throw ParseError("readout JSON: shape mismatch");
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("readout JSON: ") + e.what());
  }
}

std::vector<double> spike_counts(const SpikeRaster& raster, std::span<const int> ids) {
  std::vector<double> c(ids.size());
  for (std::size_t k = 0; k < ids.size(); ++k) {
    c[k] = static_cast<double>(raster.trains[ids[k]].size());
  }
  return c;
}

namespace {

std::vector<double> softmax(std::vector<double> z) {
  const double m = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (auto& v : z) s += (v = std::exp(v - m));
  for (auto& v : z) v /= s;
  return z;
}

// Cross-entropy of one sample; adds (p - y) into `delta`.
double sample_loss(const Readout& r, std::span<const double> x, int label,
                   std::vector<double>& delta) {
  const auto p = softmax(r.logits(x));
  delta.assign(r.classes, 0.0);
  for (int c = 0; c < r.classes; ++c) delta[c] = p[c] - (c == label ? 1.0 : 0.0);
  return -std::log(std::max(p[label], 1e-300));
}

struct Recording {
  long steps = 0;
  std::vector<double> v_pre;           // steps x n
  std::vector<unsigned char> clamped;  // steps x n
  std::vector<unsigned char> spiked;   // steps x n
  std::vector<int> input_counts;       // steps x channels
};

struct SampleGrad {
  double loss = 0.0;
  int correct = 0;
  std::vector<double> d_rec;
  std::vector<double> d_in;
  std::vector<double> d_w;
  std::vector<double> d_b;
};

// Forward with recording, then backward through time for one sample.
void sample_gradient(const LifEngine& proto, const NetworkTopology& net, const Readout& readout,
                     const SpikeRaster& input, int label, const TrainConfig& cfg,
                     const SimOptions& sim, SampleGrad& g) {
  const int n = net.neuron_count;
  const int channels = static_cast<int>(net.input_ids.size());
  LifEngine engine = proto;
  Recording rec;
  rec.steps = engine.steps_for(sim.duration);
  rec.v_pre.resize(rec.steps * n);
  rec.clamped.resize(rec.steps * n);
  rec.spiked.assign(rec.steps * n, 0);
  rec.input_counts.assign(rec.steps * channels, 0);
  const SpikeRaster out = engine.run(input, sim.duration, sim.bias, [&](const StepView& s) {
    std::copy(s.v_pre.begin(), s.v_pre.end(), rec.v_pre.begin() + s.step * n);
    std::copy(s.clamped.begin(), s.clamped.end(), rec.clamped.begin() + s.step * n);
    for (int i : s.spikes) rec.spiked[s.step * n + i] = 1;
    for (const auto& ev : s.inputs) ++rec.input_counts[s.step * channels + ev.channel];
  });

  const auto counts = spike_counts(out, net.output_ids);
  std::vector<double> delta;
  g.loss = sample_loss(readout, counts, label, delta);
  g.correct = readout.predict(counts) == label ? 1 : 0;
  g.d_w.assign(readout.weights.size(), 0.0);
  g.d_b = delta;
  for (int c = 0; c < readout.classes; ++c) {
    for (int j = 0; j < readout.inputs; ++j) g.d_w[c * readout.inputs + j] = delta[c] * counts[j];
  }

  // dL/d(count_i) for every neuron (zero off the output set).
  std::vector<double> d_count(n, 0.0);
  for (std::size_t j = 0; j < net.output_ids.size(); ++j) {
    double acc = 0.0;
    for (int c = 0; c < readout.classes; ++c) acc += delta[c] * readout.weights[c * readout.inputs + j];
    d_count[net.output_ids[j]] = acc;
  }

  g.d_rec.assign(net.synapses.size(), 0.0);
  g.d_in.assign(channels, 0.0);
  std::vector<double> dv(n, 0.0), carry_s(n, 0.0), gvpre(n, 0.0);
  const auto& w = proto.weights();
  for (long k = rec.steps - 1; k >= 0; --k) {
    const double* vp = &rec.v_pre[k * n];
    const unsigned char* cl = &rec.clamped[k * n];
    const unsigned char* sp = &rec.spiked[k * n];
    const bool last = k == rec.steps - 1;
    for (int i = 0; i < n; ++i) {
      if (cl[i]) {
        gvpre[i] = 0.0;
        continue;
      }
      const double gs = (last ? 0.0 : d_count[i]) + carry_s[i];
      gvpre[i] = gs * surrogate_grad(vp[i], net.neurons[i].v_th, cfg.surrogate_beta) +
                 dv[i] * (sp[i] ? 0.0 : 1.0);
    }
    // Parameter gradients: presynaptic spikes delivered in step k were emitted in step k-1.
    if (k > 0) {
      const unsigned char* prev = &rec.spiked[(k - 1) * n];
      for (int j = 0; j < n; ++j) {
        if (!prev[j]) continue;
        for (const auto& [post, syn] : proto.outgoing(j)) g.d_rec[syn] += gvpre[post];
      }
    }
    for (int c = 0; c < channels; ++c) {
      const int cnt = rec.input_counts[k * channels + c];
      if (cnt) g.d_in[c] += cnt * gvpre[net.input_ids[c]];
    }
    // Adjoints flowing into step k-1.
    const bool cut = k % cfg.truncation_length == 0;
    for (int i = 0; i < n; ++i) dv[i] = (cut || cl[i]) ? 0.0 : gvpre[i] * proto.decay(i);
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      if (!cut) {
        for (const auto& [post, syn] : proto.outgoing(j)) acc += w[syn] * gvpre[post];
      }
      carry_s[j] = acc;
    }
  }
}

}  // namespace

ReadoutGradient readout_loss_and_grad(const Readout& r,
                                      std::span<const std::vector<double>> features,
                                      std::span<const int> labels) {
  if (features.size() != labels.size() || features.empty()) {
    throw InputDomainError("readout_loss_and_grad: features/labels size mismatch or empty");
  }
  ReadoutGradient g;
  g.d_weights.assign(r.weights.size(), 0.0);
  g.d_bias.assign(r.bias.size(), 0.0);
  std::vector<double> delta;
  const double inv = 1.0 / static_cast<double>(features.size());
  for (std::size_t s = 0; s < features.size(); ++s) {
    g.loss += sample_loss(r, features[s], labels[s], delta) * inv;
    for (int c = 0; c < r.classes; ++c) {
      g.d_bias[c] += delta[c] * inv;
      for (int j = 0; j < r.inputs; ++j) g.d_weights[c * r.inputs + j] += delta[c] * features[s][j] * inv;
    }
  }
  return g;
}

Evaluation evaluate(const NetworkTopology& net, const Readout& readout,
                    std::span<const SpikeRaster> inputs, std::span<const int> labels,
                    const SimOptions& sim) {
  if (inputs.size() != labels.size() || inputs.empty()) {
    throw InputDomainError("evaluate: inputs/labels size mismatch or empty");
  }
  const LifEngine proto(net, sim.dt);
  const long m = static_cast<long>(inputs.size());
  std::vector<double> losses(m);
  std::vector<int> hits(m);
#pragma omp parallel for schedule(dynamic)
  for (long s = 0; s < m; ++s) {
    LifEngine engine = proto;
    const auto counts = spike_counts(engine.run(inputs[s], sim.duration, sim.bias), net.output_ids);
    std::vector<double> delta;
    losses[s] = sample_loss(readout, counts, labels[s], delta);
    hits[s] = readout.predict(counts) == labels[s] ? 1 : 0;
  }
  Evaluation e;
  for (long s = 0; s < m; ++s) {
    e.loss += losses[s];
    e.accuracy += hits[s];
  }
  e.loss /= static_cast<double>(m);
  e.accuracy /= static_cast<double>(m);
  return e;
}

BpttResult train_bptt(const NetworkTopology& net, std::span<const SpikeRaster> inputs,
                      std::span<const int> labels, int classes, const TrainConfig& cfg,
                      const SimOptions& sim) {
  cfg.validate();
  net.validate();
  if (inputs.empty() || inputs.size() != labels.size()) {
    throw InputDomainError("train_bptt: inputs/labels size mismatch or empty");
  }
  if (classes < 2) throw InputDomainError("train_bptt: need at least two classes");
  for (int y : labels) {
    if (y < 0 || y >= classes) throw InputDomainError("train_bptt: label out of range");
  }

  BpttResult result{net, Readout(classes, static_cast<int>(net.output_ids.size())), {}, {}};
  LifEngine proto(net, sim.dt);
  if (cfg.keep_snapshots) result.snapshots.push_back({0, net, result.readout});

  std::vector<double> vel_rec(net.synapses.size(), 0.0), vel_in(net.input_ids.size(), 0.0);
  std::vector<double> vel_w(result.readout.weights.size(), 0.0), vel_b(classes, 0.0);
  std::vector<std::size_t> order(inputs.size());

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng rng = make_rng(cfg.seed, "bptt_order", static_cast<std::uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), rng);
    const double lr = cfg.learning_rate / (1.0 + cfg.lr_decay * (epoch - 1));

    int batch_idx = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++batch_idx) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const long bsz = static_cast<long>(end - start);
      std::vector<SampleGrad> grads(bsz);
#pragma omp parallel for schedule(dynamic)
      for (long b = 0; b < bsz; ++b) {
        const std::size_t s = order[start + b];
        sample_gradient(proto, result.network, result.readout, inputs[s], labels[s], cfg, sim,
                        grads[b]);
      }
      double loss = 0.0;
      for (const auto& g : grads) loss += g.loss;
      if (!std::isfinite(loss)) throw TrainingError("non-finite loss", epoch, batch_idx);

      // Mean gradient over the batch, reduced in sample order.
      auto reduce = [&](std::size_t size, auto member) {
        std::vector<double> sum(size, 0.0);
        for (const auto& g : grads) {
          const auto& part = g.*member;
          for (std::size_t k = 0; k < size; ++k) sum[k] += part[k];
        }
        for (auto& v : sum) v /= static_cast<double>(bsz);
        return sum;
      };
      const auto g_w = reduce(vel_w.size(), &SampleGrad::d_w);
      const auto g_b = reduce(vel_b.size(), &SampleGrad::d_b);
      const auto g_rec = cfg.train_recurrent ? reduce(vel_rec.size(), &SampleGrad::d_rec)
                                             : std::vector<double>(vel_rec.size(), 0.0);
      const auto g_in = cfg.train_input ? reduce(vel_in.size(), &SampleGrad::d_in)
                                        : std::vector<double>(vel_in.size(), 0.0);
      double factor = 1.0;
      if (cfg.grad_clip > 0.0) {
        double sq = 0.0;
        for (const auto* g : {&g_w, &g_b, &g_rec, &g_in}) {
          for (double v : *g) sq += v * v;
        }
        const double norm = std::sqrt(sq);
        if (norm > cfg.grad_clip) factor = cfg.grad_clip / norm;
      }
      auto step = [&](double& param, double& vel, double grad) {
        vel = cfg.momentum * vel - lr * factor * grad;
        param += vel;
      };
      for (std::size_t k = 0; k < g_w.size(); ++k) step(result.readout.weights[k], vel_w[k], g_w[k]);
      for (int c = 0; c < classes; ++c) step(result.readout.bias[c], vel_b[c], g_b[c]);
      if (cfg.train_recurrent) {
        auto& w = proto.weights();
        for (std::size_t syn = 0; syn < w.size(); ++syn) {
          step(w[syn], vel_rec[syn], g_rec[syn]);
          const auto& p = result.network.synapses[syn].params;
          w[syn] = std::clamp(w[syn], p.w_min, p.w_max);
        }
      }
      if (cfg.train_input) {
        auto& u = proto.input_weights();
        for (std::size_t c = 0; c < u.size(); ++c) {
          step(u[c], vel_in[c], g_in[c]);
          const auto& p = result.network.input_synapses[c];
          u[c] = std::clamp(u[c], p.w_min, p.w_max);
        }
      }
      proto.store_weights(result.network);
    }

    const Evaluation ev = evaluate(result.network, result.readout, inputs, labels, sim);
    if (!std::isfinite(ev.loss)) throw TrainingError("non-finite loss", epoch, batch_idx);
    result.curve.push_back({epoch, ev.loss, ev.accuracy});
    if (cfg.keep_snapshots) result.snapshots.push_back({epoch, result.network, result.readout});
  }
  return result;
}

void write_training_curve(const std::vector<EpochStats>& curve, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "epoch,loss,train_accuracy\n";
  out.precision(17);
  for (const auto& e : curve) out << e.epoch << ',' << e.loss << ',' << e.train_accuracy << '\n';
}

}  // namespace spiketopo
