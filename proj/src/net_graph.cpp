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

#include "spiketopo/net_graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "spiketopo/errors.hpp"
#include "spiketopo/rng.hpp"

namespace spiketopo {

namespace {

void check(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

void validate_spec(const DistSpec& d, const std::string& field) {
  check(std::isfinite(d.a) && std::isfinite(d.b), field + ": non-finite distribution parameter");
  check(d.lo <= d.hi, field + ": clamp range lo > hi");
  switch (d.family) {
    case Family::kConstant:
      break;
    case Family::kUniform:
      check(d.a <= d.b, field + ": uniform bounds a > b");
      break;
    case Family::kLognormal:
      check(d.a > 0.0, field + ": lognormal median must be positive");
      check(d.b >= 0.0, field + ": lognormal sigma must be nonnegative");
      break;
    case Family::kGamma:
      check(d.a > 0.0, field + ": gamma mean must be positive");
      check(d.b > 0.0, field + ": gamma coefficient of variation must be positive");
      break;
  }
}

double central_value(const DistSpec& d) {
  double c = d.a;
  if (d.family == Family::kUniform) c = 0.5 * (d.a + d.b);
  return std::clamp(c, d.lo, d.hi);
}

const char* family_name(Family f) {
  switch (f) {
    case Family::kConstant: return "constant";
    case Family::kUniform: return "uniform";
    case Family::kLognormal: return "lognormal";
    case Family::kGamma: return "gamma";
  }
  return "constant";
}

Family family_from_name(const std::string& s, const std::string& field) {
  if (s == "constant") return Family::kConstant;
  if (s == "uniform") return Family::kUniform;
  if (s == "lognormal") return Family::kLognormal;
  if (s == "gamma") return Family::kGamma;
  throw ConfigError(field + ": unknown distribution family '" + s + "'");
}

void check_ids(const std::vector<int>& ids, int n, const std::string& name) {
  check(!ids.empty(), name + " must be nonempty");
  std::set<int> seen;
  for (int id : ids) {
    check(id >= 0 && id < n, name + " contains out-of-range id " + std::to_string(id));
    check(seen.insert(id).second, name + " contains duplicate id " + std::to_string(id));
  }
}

void validate_synapse(const SynapseParams& p, const std::string& where) {
  check(p.w_min <= p.w_max, where + ": w_min > w_max");
  check(p.weight >= p.w_min && p.weight <= p.w_max, where + ": weight outside [w_min, w_max]");
  check(p.tau_plus > 0.0 && p.tau_minus > 0.0, where + ": STDP time constants must be positive");
  check(p.eta_plus >= 0.0 && p.eta_minus >= 0.0, where + ": learning rates must be nonnegative");
}

nlohmann::json synapse_params_json(const SynapseParams& p) {
  return {{"weight", p.weight},     {"tau_plus", p.tau_plus},   {"tau_minus", p.tau_minus},
          {"eta_plus", p.eta_plus}, {"eta_minus", p.eta_minus}, {"w_min", p.w_min},
          {"w_max", p.w_max},       {"plastic", p.plastic}};
}

SynapseParams synapse_params_from_json(const nlohmann::json& j) {
  SynapseParams p;
  p.weight = j.at("weight").get<double>();
  p.tau_plus = j.at("tau_plus").get<double>();
  p.tau_minus = j.at("tau_minus").get<double>();
  p.eta_plus = j.at("eta_plus").get<double>();
  p.eta_minus = j.at("eta_minus").get<double>();
  p.w_min = j.at("w_min").get<double>();
  p.w_max = j.at("w_max").get<double>();
  p.plastic = j.at("plastic").get<bool>();
  return p;
}

}  // namespace

void NetworkTopology::validate() const {
  check(neuron_count >= 1, "neuron_count must be positive");
  check(static_cast<int>(neurons.size()) == neuron_count, "neurons.size() != neuron_count");
  for (int i = 0; i < neuron_count; ++i) {
    const auto& p = neurons[i];
    const std::string where = "neuron " + std::to_string(i);
    check(p.tau_m > 0.0, where + ": tau_m must be positive");
    check(p.t_ref >= 0.0, where + ": t_ref must be nonnegative");
    check(p.v_th > p.v_reset, where + ": v_th must exceed v_reset");
    check(p.v_th > p.v_rest, where + ": v_th must exceed v_rest");
  }
  check_ids(input_ids, neuron_count, "input_ids");
  check_ids(output_ids, neuron_count, "output_ids");
  for (int id : input_ids) {
    check(std::find(output_ids.begin(), output_ids.end(), id) == output_ids.end(),
          "input_ids and output_ids overlap at " + std::to_string(id));
  }
  check(input_synapses.size() == input_ids.size(), "input_synapses.size() != input_ids.size()");
  for (std::size_t k = 0; k < input_synapses.size(); ++k) {
    validate_synapse(input_synapses[k], "input synapse " + std::to_string(k));
  }
  std::set<std::pair<int, int>> pairs;
  for (const auto& s : synapses) {
    const std::string where = "synapse " + std::to_string(s.pre) + "->" + std::to_string(s.post);
    check(s.pre >= 0 && s.pre < neuron_count && s.post >= 0 && s.post < neuron_count,
          where + ": endpoint out of range");
    check(s.pre != s.post, where + ": self loop");
    check(pairs.emplace(s.pre, s.post).second, where + ": duplicate synapse");
    validate_synapse(s.params, where);
  }
}

HeterogeneityConfig HeterogeneityConfig::homogeneous() const {
  HeterogeneityConfig h = *this;
  for (DistSpec* d : {&h.tau_m, &h.v_th, &h.tau_plus, &h.tau_minus, &h.eta_plus, &h.eta_minus}) {
    *d = DistSpec::constant(central_value(*d), d->lo, d->hi);
  }
  return h;
}

std::vector<double> sample_series(const DistSpec& spec, const std::string& field,
                                  std::uint64_t seed, std::size_t count) {
  validate_spec(spec, field);
  std::vector<double> out(count);
  if (spec.family == Family::kConstant) {
    std::fill(out.begin(), out.end(), std::clamp(spec.a, spec.lo, spec.hi));
    return out;
  }
  Rng rng = make_rng(seed, field);
  switch (spec.family) {
    case Family::kUniform: {
      std::uniform_real_distribution<double> dist(spec.a, spec.b);
      for (auto& v : out) v = dist(rng);
      break;
    }
    case Family::kLognormal: {
      std::lognormal_distribution<double> dist(std::log(spec.a), spec.b);
      for (auto& v : out) v = spec.b == 0.0 ? spec.a : dist(rng);
      break;
    }
    case Family::kGamma: {
      const double shape = 1.0 / (spec.b * spec.b);
      std::gamma_distribution<double> dist(shape, spec.a / shape);
      for (auto& v : out) v = dist(rng);
      break;
    }
    case Family::kConstant:
      break;
  }
  for (auto& v : out) v = std::clamp(v, spec.lo, spec.hi);
  return out;
}

std::vector<NeuronParams> sample_params(const HeterogeneityConfig& cfg, int n,
                                        std::uint64_t seed) {
  if (n < 1) throw InputDomainError("sample_params: n must be >= 1");
  check(cfg.t_ref >= 0.0, "t_ref must be nonnegative");
  const auto tau_m = sample_series(cfg.tau_m, "tau_m", seed, n);
  const auto v_th = sample_series(cfg.v_th, "v_th", seed, n);
  std::vector<NeuronParams> out(n);
  for (int i = 0; i < n; ++i) {
    out[i].tau_m = tau_m[i];
    out[i].v_th = v_th[i];
    out[i].v_rest = cfg.v_rest;
    out[i].v_reset = cfg.v_reset;
    out[i].t_ref = cfg.t_ref;
    check(out[i].tau_m > 0.0, "tau_m: sampled value not positive; tighten the clamp range");
    check(out[i].v_th > cfg.v_reset && out[i].v_th > cfg.v_rest,
          "v_th: sampled value not above v_rest/v_reset; tighten the clamp range");
  }
  return out;
}

NetworkTopology build_network(const HeterogeneityConfig& cfg, int neuron_count,
                              const std::vector<int>& input_ids,
                              const std::vector<int>& output_ids) {
  check(cfg.connection_probability > 0.0 && cfg.connection_probability <= 1.0,
        "connection_probability must lie in (0, 1]");
  check(cfg.w_min <= cfg.w_max, "w_min > w_max");
  const double w_lo = cfg.w_init_lo.value_or(cfg.w_min);
  const double w_hi = cfg.w_init_hi.value_or(cfg.w_max);
  check(cfg.w_min <= w_lo && w_lo <= w_hi && w_hi <= cfg.w_max,
        "recurrent weight init range must lie inside [w_min, w_max]");
  check(cfg.input_w_min <= cfg.input_w_init_lo && cfg.input_w_init_lo <= cfg.input_w_init_hi &&
            cfg.input_w_init_hi <= cfg.input_w_max,
        "input weight init range must lie inside [input_w_min, input_w_max]");
  check(neuron_count >= static_cast<int>(input_ids.size() + output_ids.size()),
        "neuron_count smaller than |input_ids| + |output_ids|");

  NetworkTopology net;
  net.neuron_count = neuron_count;
  net.input_ids = input_ids;
  net.output_ids = output_ids;
  net.neurons = sample_params(cfg, neuron_count, cfg.seed);

  Rng wiring = make_rng(cfg.seed, "wiring");
  std::bernoulli_distribution connect(cfg.connection_probability);
  for (int pre = 0; pre < neuron_count; ++pre) {
    for (int post = 0; post < neuron_count; ++post) {
      if (pre == post) continue;
      if (connect(wiring)) net.synapses.push_back({pre, post, {}});
    }
  }

  auto fill_stdp = [&](std::vector<SynapseParams>& ps, const std::string& prefix) {
    const std::size_t m = ps.size();
    const auto tp = sample_series(cfg.tau_plus, prefix + "tau_plus", cfg.seed, m);
    const auto tm = sample_series(cfg.tau_minus, prefix + "tau_minus", cfg.seed, m);
    const auto ep = sample_series(cfg.eta_plus, prefix + "eta_plus", cfg.seed, m);
    const auto em = sample_series(cfg.eta_minus, prefix + "eta_minus", cfg.seed, m);
    for (std::size_t k = 0; k < m; ++k) {
      ps[k].tau_plus = tp[k];
      ps[k].tau_minus = tm[k];
      ps[k].eta_plus = ep[k];
      ps[k].eta_minus = em[k];
    }
  };

  std::vector<SynapseParams> rec(net.synapses.size());
  fill_stdp(rec, "");
  Rng weights = make_rng(cfg.seed, "weights");
  std::uniform_real_distribution<double> w_dist(w_lo, w_hi);
  for (std::size_t k = 0; k < rec.size(); ++k) {
    rec[k].w_min = cfg.w_min;
    rec[k].w_max = cfg.w_max;
    rec[k].weight = w_lo == w_hi ? w_lo : w_dist(weights);
    net.synapses[k].params = rec[k];
  }

  net.input_synapses.resize(input_ids.size());
  fill_stdp(net.input_synapses, "input_");
  Rng in_weights = make_rng(cfg.seed, "input_weights");
  std::uniform_real_distribution<double> in_dist(cfg.input_w_init_lo, cfg.input_w_init_hi);
  for (auto& p : net.input_synapses) {
    p.w_min = cfg.input_w_min;
    p.w_max = cfg.input_w_max;
    p.weight = cfg.input_w_init_lo == cfg.input_w_init_hi ? cfg.input_w_init_lo : in_dist(in_weights);
  }

  net.config_echo = to_json(cfg);
  net.validate();
  return net;
}

nlohmann::json to_json(const DistSpec& d) {
  return {{"family", family_name(d.family)}, {"a", d.a}, {"b", d.b}, {"lo", d.lo}, {"hi", d.hi}};
}

DistSpec dist_from_json(const nlohmann::json& j, const std::string& field) {
  try {
    DistSpec d;
    d.family = family_from_name(j.at("family").get<std::string>(), field);
    d.a = j.value("a", 0.0);
    d.b = j.value("b", 0.0);
    d.lo = j.value("lo", -1e300);
    d.hi = j.value("hi", 1e300);
    validate_spec(d, field);
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(field + ": " + e.what());
  }
}

nlohmann::json to_json(const HeterogeneityConfig& c) {
  return {{"tau_m", to_json(c.tau_m)},
          {"v_th", to_json(c.v_th)},
          {"tau_plus", to_json(c.tau_plus)},
          {"tau_minus", to_json(c.tau_minus)},
          {"eta_plus", to_json(c.eta_plus)},
          {"eta_minus", to_json(c.eta_minus)},
          {"v_rest", c.v_rest},
          {"v_reset", c.v_reset},
          {"t_ref", c.t_ref},
          {"w_min", c.w_min},
          {"w_max", c.w_max},
          {"w_init_lo", c.w_init_lo.value_or(c.w_min)},
          {"w_init_hi", c.w_init_hi.value_or(c.w_max)},
          {"input_w_min", c.input_w_min},
          {"input_w_max", c.input_w_max},
          {"input_w_init_lo", c.input_w_init_lo},
          {"input_w_init_hi", c.input_w_init_hi},
          {"connection_probability", c.connection_probability},
          {"seed", c.seed}};
}

HeterogeneityConfig heterogeneity_from_json(const nlohmann::json& j) {
  HeterogeneityConfig c;
  auto dist = [&](const char* key, DistSpec& d) {
    if (j.contains(key)) d = dist_from_json(j.at(key), key);
  };
  dist("tau_m", c.tau_m);
  dist("v_th", c.v_th);
  dist("tau_plus", c.tau_plus);
  dist("tau_minus", c.tau_minus);
  dist("eta_plus", c.eta_plus);
  dist("eta_minus", c.eta_minus);
  try {
    c.v_rest = j.value("v_rest", c.v_rest);
    c.v_reset = j.value("v_reset", c.v_reset);
    c.t_ref = j.value("t_ref", c.t_ref);
    c.w_min = j.value("w_min", c.w_min);
    c.w_max = j.value("w_max", c.w_max);
    if (j.contains("w_init_lo")) c.w_init_lo = j.at("w_init_lo").get<double>();
    if (j.contains("w_init_hi")) c.w_init_hi = j.at("w_init_hi").get<double>();
    c.input_w_min = j.value("input_w_min", c.input_w_min);
    c.input_w_max = j.value("input_w_max", c.input_w_max);
    c.input_w_init_lo = j.value("input_w_init_lo", c.input_w_init_lo);
    c.input_w_init_hi = j.value("input_w_init_hi", c.input_w_init_hi);
    c.connection_probability = j.value("connection_probability", c.connection_probability);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("heterogeneity: ") + e.what());
  }
  return c;
}

nlohmann::json to_json(const NetworkTopology& net) {
  nlohmann::json neurons = nlohmann::json::array();
  for (const auto& p : net.neurons) {
    neurons.push_back({{"tau_m", p.tau_m},
                       {"v_th", p.v_th},
                       {"v_rest", p.v_rest},
                       {"v_reset", p.v_reset},
                       {"t_ref", p.t_ref}});
  }
  nlohmann::json synapses = nlohmann::json::array();
  for (const auto& s : net.synapses) {
    auto js = synapse_params_json(s.params);
    js["pre"] = s.pre;
    js["post"] = s.post;
    synapses.push_back(std::move(js));
  }
  nlohmann::json inputs = nlohmann::json::array();
  for (const auto& p : net.input_synapses) inputs.push_back(synapse_params_json(p));
  return {{"version", kNetworkFormatVersion},
          {"neuron_count", net.neuron_count},
          {"neurons", neurons},
          {"synapses", synapses},
          {"input_ids", net.input_ids},
          {"output_ids", net.output_ids},
          {"input_synapses", inputs},
          {"config_echo", net.config_echo}};
}

NetworkTopology network_from_json(const nlohmann::json& j) {
  NetworkTopology net;
  try {
    const int version = j.at("version").get<int>();
    if (version != kNetworkFormatVersion) {
      throw ParseError("unsupported network format version " + std::to_string(version));
    }
    net.neuron_count = j.at("neuron_count").get<int>();
    for (const auto& jn : j.at("neurons")) {
      NeuronParams p;
      p.tau_m = jn.at("tau_m").get<double>();
      p.v_th = jn.at("v_th").get<double>();
      p.v_rest = jn.at("v_rest").get<double>();
      p.v_reset = jn.at("v_reset").get<double>();
      p.t_ref = jn.at("t_ref").get<double>();
      net.neurons.push_back(p);
    }
    for (const auto& js : j.at("synapses")) {
      net.synapses.push_back(
          {js.at("pre").get<int>(), js.at("post").get<int>(), synapse_params_from_json(js)});
    }
    net.input_ids = j.at("input_ids").get<std::vector<int>>();
    net.output_ids = j.at("output_ids").get<std::vector<int>>();
    for (const auto& js : j.at("input_synapses")) {
      net.input_synapses.push_back(synapse_params_from_json(js));
    }
    net.config_echo = j.value("config_echo", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("network JSON: ") + e.what());
  }
  try {
    net.validate();
  } catch (const ConfigError& e) {
    throw ParseError(std::string("network JSON: ") + e.what());
  }
  return net;
}

void save_network(const NetworkTopology& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_json(net).dump(1) << '\n';
}

NetworkTopology load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return network_from_json(j);
}

}  // namespace spiketopo
