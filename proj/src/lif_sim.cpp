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

#include "spiketopo/lif_sim.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <tuple>

#include "spiketopo/errors.hpp"
#include "spiketopo/rng.hpp"

namespace spiketopo {

std::size_t SpikeRaster::total_spikes() const {
  std::size_t n = 0;
  for (const auto& t : trains) n += t.size();
  return n;
}

void SpikeRaster::validate() const {
  if (!(duration > 0.0)) throw InputDomainError("raster duration must be positive");
  for (std::size_t i = 0; i < trains.size(); ++i) {
    const auto& tr = trains[i];
    for (std::size_t k = 0; k < tr.size(); ++k) {
      if (!(tr[k] >= 0.0 && tr[k] < duration)) {
        throw InputDomainError("train " + std::to_string(i) + ": spike time outside [0, duration)");
      }
      if (k > 0 && !(tr[k] > tr[k - 1])) {
        throw InputDomainError("train " + std::to_string(i) + ": times not strictly increasing");
      }
    }
  }
}

SpikeRaster rate_encode(std::span<const double> features, double duration, double max_rate_hz,
                        std::uint64_t seed, double dt) {
  if (!(max_rate_hz > 0.0)) throw InputDomainError("rate_encode: max_rate must be positive");
  if (!(duration > 0.0)) throw InputDomainError("rate_encode: duration must be positive");
  SpikeRaster r;
  r.duration = duration;
  r.dt = dt;
  r.trains.resize(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    const double f = features[i];
    if (!(f >= 0.0 && f <= 1.0)) {
      throw InputDomainError("rate_encode: feature " + std::to_string(i) + " outside [0, 1]");
    }
    if (f == 0.0) continue;
    Rng rng = make_rng(seed, "poisson", i);
    std::exponential_distribution<double> gap(f * max_rate_hz / 1000.0);
    for (double t = gap(rng); t < duration; t += gap(rng)) {
      if (r.trains[i].empty() || t > r.trains[i].back()) r.trains[i].push_back(t);
    }
  }
  return r;
}

LifEngine::LifEngine(const NetworkTopology& net, double dt)
    : n_(net.neuron_count), dt_(dt), neurons_(net.neurons), input_ids_(net.input_ids) {
  if (!(dt > 0.0)) throw InputDomainError("dt must be positive");
  decay_.resize(n_);
  refractory_steps_.resize(n_);
  double min_tau = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_; ++i) {
    decay_[i] = std::exp(-dt / neurons_[i].tau_m);
    refractory_steps_[i] = static_cast<int>(std::ceil(neurons_[i].t_ref / dt - 1e-9));
    min_tau = std::min(min_tau, neurons_[i].tau_m);
  }
  if (dt > min_tau / 5.0) {
    std::cerr << "warning: dt=" << dt << " ms exceeds min tau_m/5 (" << min_tau / 5.0 << " ms)\n";
  }

  weights_.resize(net.synapses.size());
  std::vector<std::size_t> order(net.synapses.size());
  for (std::size_t s = 0; s < net.synapses.size(); ++s) {
    weights_[s] = net.synapses[s].params.weight;
    order[s] = s;
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& sa = net.synapses[a];
    const auto& sb = net.synapses[b];
    return std::tie(sa.pre, sa.post) < std::tie(sb.pre, sb.post);
  });
  out_offset_.assign(n_ + 1, 0);
  for (const auto& s : net.synapses) ++out_offset_[s.pre + 1];
  for (int i = 0; i < n_; ++i) out_offset_[i + 1] += out_offset_[i];
  out_.reserve(order.size());
  for (std::size_t s : order) out_.emplace_back(net.synapses[s].post, static_cast<int>(s));

  input_weights_.resize(net.input_synapses.size());
  for (std::size_t k = 0; k < net.input_synapses.size(); ++k) {
    input_weights_[k] = net.input_synapses[k].weight;
  }
}

void LifEngine::store_weights(NetworkTopology& net) const {
  for (std::size_t s = 0; s < net.synapses.size(); ++s) net.synapses[s].params.weight = weights_[s];
  for (std::size_t k = 0; k < net.input_synapses.size(); ++k) {
    net.input_synapses[k].weight = input_weights_[k];
  }
}

std::vector<std::vector<InputEvent>> LifEngine::bin_inputs(const SpikeRaster& input,
                                                           long steps) const {
  if (input.neuron_count() != static_cast<int>(input_ids_.size())) {
    throw InputDomainError("input raster has " + std::to_string(input.neuron_count()) +
                           " channels but network has " + std::to_string(input_ids_.size()) +
                           " input neurons");
  }
  std::vector<std::vector<InputEvent>> binned(steps);
  for (int c = 0; c < input.neuron_count(); ++c) {
    for (double t : input.trains[c]) {
      const long k = static_cast<long>(std::floor(t / dt_ + 1e-9));
      if (k >= 0 && k < steps) binned[k].push_back({c, t});
    }
  }
  return binned;
}

SpikeRaster simulate(const NetworkTopology& net, const SpikeRaster& input, const SimOptions& opts) {
  if (!(opts.duration > 0.0)) throw InputDomainError("simulate: duration must be positive");
  if (!opts.bias.empty() && static_cast<int>(opts.bias.size()) != net.neuron_count) {
    throw InputDomainError("simulate: bias size != neuron_count");
  }
  LifEngine engine(net, opts.dt);
  return engine.run(input, opts.duration, opts.bias);
}

std::vector<double> readout_rates(const SpikeRaster& raster, double t0, double t1) {
  if (!(t0 >= 0.0 && t0 < t1 && t1 <= raster.duration)) {
    throw InputDomainError("readout_rates: window must satisfy 0 <= t0 < t1 <= duration");
  }
  std::vector<double> rates(raster.trains.size());
  for (std::size_t i = 0; i < raster.trains.size(); ++i) {
    const auto& tr = raster.trains[i];
    const auto lo = std::lower_bound(tr.begin(), tr.end(), t0);
    const auto hi = std::lower_bound(tr.begin(), tr.end(), t1);
    rates[i] = static_cast<double>(hi - lo) * 1000.0 / (t1 - t0);
  }
  return rates;
}

std::string format_time(double t) {
  char buf[64];
  for (int prec = 6; prec <= 20; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*f", prec, t);
    if (std::strtod(buf, nullptr) == t) break;
  }
  return buf;
}

std::string sidecar_path(const std::string& csv_path) {
  const auto dot = csv_path.rfind(".csv");
  return (dot != std::string::npos && dot + 4 == csv_path.size() ? csv_path.substr(0, dot)
                                                                  : csv_path) +
         ".json";
}

void write_raster_csv(const SpikeRaster& raster, const std::string& csv_path,
                      const nlohmann::json& extra) {
  std::ofstream out(csv_path);
  if (!out) throw std::runtime_error("cannot write " + csv_path);
  out << "neuron_id,time_ms\n";
  for (int i = 0; i < raster.neuron_count(); ++i) {
    for (double t : raster.trains[i]) out << i << ',' << format_time(t) << '\n';
  }
  nlohmann::json side = extra;
  side["duration"] = raster.duration;
  side["dt"] = raster.dt;
  side["neuron_count"] = raster.neuron_count();
  std::ofstream js(sidecar_path(csv_path));
  if (!js) throw std::runtime_error("cannot write " + sidecar_path(csv_path));
  js << side.dump(1) << '\n';
}

SpikeRaster read_raster_csv(const std::string& csv_path, nlohmann::json* sidecar_out) {
  std::ifstream side_in(sidecar_path(csv_path));
  if (!side_in) throw ParseError("missing sidecar " + sidecar_path(csv_path));
  nlohmann::json side;
  SpikeRaster r;
  try {
    side_in >> side;
    r.duration = side.at("duration").get<double>();
    r.dt = side.at("dt").get<double>();
    r.trains.resize(side.at("neuron_count").get<int>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(sidecar_path(csv_path) + ": " + e.what());
  }

  std::ifstream in(csv_path);
  if (!in) throw ParseError("cannot open " + csv_path);
  std::string line;
  long lineno = 1;
  if (!std::getline(in, line) || line.rfind("neuron_id,time_ms", 0) != 0) {
    throw ParseError(csv_path + ": expected header 'neuron_id,time_ms'", lineno);
  }
  int last_id = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError(csv_path + ": missing comma", lineno);
    int id = 0;
    const auto idr = std::from_chars(line.data(), line.data() + comma, id);
    char* end = nullptr;
    const std::string tstr = line.substr(comma + 1);
    const double t = std::strtod(tstr.c_str(), &end);
    if (idr.ec != std::errc() || idr.ptr != line.data() + comma || end == tstr.c_str() ||
        *end != '\0') {
      throw ParseError(csv_path + ": malformed row '" + line + "'", lineno);
    }
    if (id < 0 || id >= r.neuron_count()) {
      throw ParseError(csv_path + ": neuron_id " + std::to_string(id) + " out of range", lineno);
    }
    if (t < 0.0) throw ParseError(csv_path + ": negative spike time", lineno);
    if (t >= r.duration) {
      throw ParseError(csv_path + ": spike time " + tstr + " >= duration", lineno);
    }
    if (id < last_id) throw ParseError(csv_path + ": rows not sorted by neuron_id", lineno);
    auto& tr = r.trains[id];
    if (!tr.empty() && !(t > tr.back())) {
      throw ParseError(csv_path + ": times not strictly increasing", lineno);
    }
    tr.push_back(t);
    last_id = id;
  }
  if (sidecar_out) *sidecar_out = side;
  return r;
}

}  // namespace spiketopo
