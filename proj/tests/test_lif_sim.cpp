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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <fstream>
#include <random>

#include "spiketopo/errors.hpp"
#include "spiketopo/lif_sim.hpp"
#include "test_util.hpp"

using namespace spiketopo;

namespace {

SpikeRaster empty_input(int channels, double duration) {
  SpikeRaster r;
  r.duration = duration;
  r.trains.assign(channels, {});
  return r;
}

// Neuron 0 driven by a constant current; neuron 1 is an isolated output.
NetworkTopology lone_neuron(double tau_m, double t_ref) {
  auto net = testutil::make_net(2, {}, {0}, {1});
  for (auto& p : net.neurons) {
    p.tau_m = tau_m;
    p.t_ref = t_ref;
  }
  return net;
}

double mean_isi(const SpikeTrain& t) {
  REQUIRE(t.size() >= 2);
  return (t.back() - t.front()) / static_cast<double>(t.size() - 1);
}

double simulated_isi(double current, double dt) {
  SimOptions o;
  o.dt = dt;
  o.duration = 100.0;
  o.bias = {current, 0.0};
  return mean_isi(simulate(lone_neuron(10.0, 0.0), empty_input(1, o.duration), o).trains[0]);
}

}  // namespace

TEST_CASE("zero features encode to empty trains") {
  const std::vector<double> f(8, 0.0);
  const auto r = rate_encode(f, 500.0, 100.0, 3);
  CHECK(r.neuron_count() == 8);
  CHECK(r.total_spikes() == 0);
}

TEST_CASE("Poisson count at full rate") {
  const std::vector<double> f{1.0};
  double mean = 0.0;
  const int seeds = 500;
  for (int s = 0; s < seeds; ++s) {
    mean += static_cast<double>(rate_encode(f, 1000.0, 100.0, s).trains[0].size()) / seeds;
  }
  CHECK(std::abs(mean - 100.0) <= 3.0 * std::sqrt(100.0 / seeds));
}

TEST_CASE("rate encoding is deterministic and validated") {
  const std::vector<double> f{0.3, 0.9, 0.5};
  const auto a = rate_encode(f, 200.0, 80.0, 42);
  CHECK(a == rate_encode(f, 200.0, 80.0, 42));
  CHECK_NOTHROW(a.validate());
  const std::vector<double> bad{0.3, 1.2};
  CHECK_THROWS_AS(rate_encode(bad, 100.0, 10.0, 1), InputDomainError);
  const std::vector<double> neg{-0.1};
  CHECK_THROWS_AS(rate_encode(neg, 100.0, 10.0, 1), InputDomainError);
}

TEST_CASE("no drive and no weights gives an empty raster") {
  auto net = testutil::make_net(4, {{0, 1}, {1, 2}, {2, 3}}, {0}, {3}, 0.0);
  net.input_synapses[0].weight = 0.0;
  std::mt19937_64 rng(1);
  const auto input = testutil::random_raster(rng, 1, 100.0, 20);
  SimOptions o;
  o.duration = 100.0;
  CHECK(simulate(net, input, o).total_spikes() == 0);
}

TEST_CASE("constant-current ISI matches the closed form") {
  const double expect = 10.0 * std::log(2.0 / (2.0 - 1.0));
  CHECK(std::abs(expect - 6.931) < 1e-3);
  CHECK(std::abs(simulated_isi(2.0, 0.01) - expect) <= 0.02);
}

TEST_CASE("ISI error is bounded by the step") {
  const double expect = 10.0 * std::log(2.0);
  for (double dt : {0.2, 0.1, 0.05, 0.02, 0.01, 0.005}) {
    const double err = std::abs(simulated_isi(2.0, dt) - expect);
    CHECK(err <= dt);
  }
}

TEST_CASE("subthreshold current settles at its fixed point") {
  auto net = lone_neuron(10.0, 0.0);
  SimOptions o;
  o.dt = 0.1;
  o.bias = {0.5, 0.0};
  LifEngine engine(net, o.dt);
  double v_last = 0.0;
  const auto out = engine.run(empty_input(1, 100.0), 100.0, o.bias,
                              [&](const StepView& s) { v_last = s.v_pre[0]; });
  CHECK(out.total_spikes() == 0);
  // After ten membrane time constants the exact solution is 0.5 (1 - e^-10).
  CHECK(std::abs(v_last - 0.5 * (1.0 - std::exp(-10.0))) <= 1e-9);
  LifEngine longer(net, o.dt);
  longer.run(empty_input(1, 200.0), 200.0, o.bias, [&](const StepView& s) { v_last = s.v_pre[0]; });
  CHECK(std::abs(v_last - 0.5) <= 1e-6);
}

TEST_CASE("input channel count must match input ids") {
  auto net = testutil::make_net(3, {}, {0, 1}, {2});
  SimOptions o;
  o.duration = 10.0;
  CHECK_THROWS_AS(simulate(net, empty_input(3, 10.0), o), InputDomainError);
}

TEST_CASE("pulses arrive in the step after the presynaptic spike") {
  auto net = testutil::make_net(2, {{0, 1}}, {0}, {1}, 1.0);
  net.input_synapses[0].weight = 1.5;
  SimOptions o;
  o.dt = 0.5;
  o.duration = 10.0;
  SpikeRaster in = empty_input(1, 10.0);
  in.trains[0] = {2.2};
  const auto out = simulate(net, in, o);
  REQUIRE(out.trains[0].size() == 1);
  REQUIRE(out.trains[1].size() == 1);
  CHECK(out.trains[0][0] == doctest::Approx(2.5));
  CHECK(out.trains[1][0] == doctest::Approx(3.0));
}

TEST_CASE("refractory gaps and raster invariants hold") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    HeterogeneityConfig cfg;
    cfg.seed = seed;
    cfg.t_ref = 3.0;
    const auto net = build_network(cfg, 40, {0, 1, 2, 3}, {38, 39});
    const std::vector<double> f{1.0, 0.8, 0.6, 0.9};
    SimOptions o;
    o.duration = 200.0;
    const auto out = simulate(net, rate_encode(f, 200.0, 200.0, seed), o);
    CHECK_NOTHROW(out.validate());
    CHECK(out.total_spikes() > 0);
    for (int i = 0; i < out.neuron_count(); ++i) {
      const auto& t = out.trains[i];
      for (std::size_t k = 1; k < t.size(); ++k) {
        CHECK(t[k] - t[k - 1] >= net.neurons[i].t_ref - 1e-9);
      }
    }
  }
}

TEST_CASE("spike count is nondecreasing in current") {
  std::size_t prev = 0;
  for (double current = 0.5; current <= 5.0; current += 0.25) {
    SimOptions o;
    o.duration = 200.0;
    o.bias = {current, 0.0};
    const auto n = simulate(lone_neuron(20.0, 2.0), empty_input(1, 200.0), o).trains[0].size();
    CHECK(n >= prev);
    prev = n;
  }
  CHECK(prev > 0);
}

TEST_CASE("simulation is deterministic") {
  HeterogeneityConfig cfg;
  const auto net = build_network(cfg, 30, {0, 1}, {29});
  const std::vector<double> f{0.7, 0.4};
  const auto in = rate_encode(f, 100.0, 150.0, 2);
  SimOptions o;
  CHECK(simulate(net, in, o) == simulate(net, in, o));
}

TEST_CASE("readout rates") {
  SpikeRaster r = empty_input(3, 200.0);
  CHECK(readout_rates(r, 0.0, 100.0) == std::vector<double>(3, 0.0));
  r.trains[1] = {50.0};
  CHECK(readout_rates(r, 0.0, 100.0)[1] == doctest::Approx(10.0));
  CHECK_THROWS_AS(readout_rates(r, 50.0, 50.0), InputDomainError);
  CHECK_THROWS_AS(readout_rates(r, 0.0, 300.0), InputDomainError);

  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    const auto x = testutil::random_raster(rng, 5, 200.0, 30);
    const double t0 = 37.0, t1 = 151.5;
    const auto rates = readout_rates(x, t0, t1);
    for (int i = 0; i < 5; ++i) {
      int count = 0;
      for (double t : x.trains[i]) count += (t >= t0 && t < t1) ? 1 : 0;
      CHECK(rates[i] == doctest::Approx(count * 1000.0 / (t1 - t0)));
    }
  }
}

TEST_CASE("raster CSV round trip") {
  std::mt19937_64 rng(9);
  const auto r = testutil::random_raster(rng, 6, 80.0, 10);
  const auto dir = testutil::scratch_dir("lif_csv");
  const auto path = (dir / "r.csv").string();
  write_raster_csv(r, path, {{"label", 1}});
  nlohmann::json side;
  CHECK(read_raster_csv(path, &side) == r);
  CHECK(side.at("label") == 1);
  CHECK(side.at("neuron_count") == 6);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "neuron_id,time_ms");
}

TEST_CASE("format_time keeps six decimals and round-trips") {
  CHECK(format_time(1.5) == "1.500000");
  for (double t : {0.1, 1.0 / 3.0, 12.345678912345, 99.9}) {
    CHECK(std::stod(format_time(t)) == t);
  }
}

TEST_CASE("raster CSV errors carry line numbers") {
  const auto dir = testutil::scratch_dir("lif_csv_bad");
  SpikeRaster r = empty_input(2, 10.0);
  r.trains[0] = {1.0, 2.0};
  const auto good = (dir / "good.csv").string();
  write_raster_csv(r, good);
  auto write = [&](const std::string& name, const std::string& body) {
    const auto p = (dir / name).string();
    std::ofstream(p) << "neuron_id,time_ms\n" << body;
    std::filesystem::copy_file(sidecar_path(good), sidecar_path(p),
                               std::filesystem::copy_options::overwrite_existing);
    return p;
  };
  auto expect_line = [](const std::string& p, const std::string& line) {
    try {
      read_raster_csv(p);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("line " + line) != std::string::npos);
    }
  };
  expect_line(write("late.csv", "0,1.000000\n0,10.000000\n"), "3");
  expect_line(write("neg.csv", "0,-1.000000\n"), "2");
  expect_line(write("unsorted.csv", "0,2.000000\n0,1.000000\n"), "3");
  expect_line(write("rows.csv", "1,1.000000\n0,2.000000\n"), "3");
  expect_line(write("id.csv", "5,1.000000\n"), "2");
  expect_line(write("junk.csv", "0,abc\n"), "2");
  const auto lonely = (dir / "lonely.csv").string();
  std::ofstream(lonely) << "neuron_id,time_ms\n";
  CHECK_THROWS_AS(read_raster_csv(lonely), ParseError);
}
