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

#include <omp.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include "spiketopo/errors.hpp"
#include "spiketopo/experiment.hpp"
#include "spiketopo/surrogate_trainer.hpp"
#include "test_util.hpp"

using namespace spiketopo;

namespace {

struct Task {
  NetworkTopology net;
  PreparedData data;
  SimOptions sim;
};

// The 64-neuron two-class temporal task used by the experiment defaults.
Task toy_task(std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.seed = seed;
  cfg.dataset.seed = seed;
  Task t;
  t.data = prepare_data(cfg);
  t.net = initial_network(cfg, ModelKind::kBprsnn, t.data.channels, seed);
  t.sim = cfg.sim_options();
  return t;
}

}  // namespace

TEST_CASE("surrogate derivative") {
  CHECK(surrogate_grad(1.0, 1.0, 10.0) == 1.0);
  CHECK(surrogate_grad(1.1, 1.0, 10.0) == doctest::Approx(0.25));
  CHECK(surrogate_grad(0.9, 1.0, 10.0) == doctest::Approx(0.25));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int k = 0; k < 100; ++k) {
    const double d = u(rng);
    const double up = surrogate_grad(d, 0.0, 7.0);
    CHECK(up == surrogate_grad(-d, 0.0, 7.0));
    CHECK(up > 0.0);
    CHECK(up <= 1.0);
  }
}

TEST_CASE("readout gradient matches central differences") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<int> cnt(0, 12);
  Readout r(3, 5);
  for (auto& w : r.weights) w = 0.3 * g(rng);
  for (auto& b : r.bias) b = 0.3 * g(rng);
  std::vector<std::vector<double>> x(10, std::vector<double>(5));
  std::vector<int> y(10);
  for (int s = 0; s < 10; ++s) {
    for (auto& v : x[s]) v = cnt(rng);
    y[s] = s % 3;
  }
  const auto grad = readout_loss_and_grad(r, x, y);
  const double h = 1e-6;
  auto check = [&](double& param, double analytic) {
    const double keep = param;
    param = keep + h;
    const double up = readout_loss_and_grad(r, x, y).loss;
    param = keep - h;
    const double down = readout_loss_and_grad(r, x, y).loss;
    param = keep;
    const double numeric = (up - down) / (2.0 * h);
    CHECK(std::abs(numeric - analytic) <= 1e-4 * std::max(1.0, std::abs(analytic)));
  };
  for (std::size_t k = 0; k < r.weights.size(); ++k) check(r.weights[k], grad.d_weights[k]);
  for (std::size_t k = 0; k < r.bias.size(); ++k) check(r.bias[k], grad.d_bias[k]);
}

TEST_CASE("zero learning rate returns the input weights") {
  auto t = toy_task(1);
  TrainConfig cfg = default_bptt();
  cfg.epochs = 2;
  cfg.learning_rate = 0.0;
  const auto res = train_bptt(t.net, t.data.train.rasters, t.data.train.labels, 2, cfg, t.sim);
  CHECK(res.network == t.net);
  CHECK(res.curve.size() == 2);
}

TEST_CASE("two-class temporal task is learned") {
  int nonincreasing = 0, transitions = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto t = toy_task(seed);
    TrainConfig cfg = default_bptt();
    cfg.seed = seed;
    const auto res = train_bptt(t.net, t.data.train.rasters, t.data.train.labels, 2, cfg, t.sim);
    REQUIRE(res.curve.size() == 20);
    CHECK(res.curve.back().train_accuracy >= 0.9);
    for (std::size_t e = 0; e < res.curve.size(); ++e) {
      CHECK(std::isfinite(res.curve[e].loss));
      if (e > 0) {
        ++transitions;
        nonincreasing += res.curve[e].loss <= res.curve[e - 1].loss ? 1 : 0;
      }
    }
  }
  CHECK(nonincreasing >= 0.8 * transitions);
}

TEST_CASE("forward pass is the plain simulation") {
  auto t = toy_task(2);
  TrainConfig cfg = default_bptt();
  cfg.epochs = 1;
  const auto res = train_bptt(t.net, t.data.train.rasters, t.data.train.labels, 2, cfg, t.sim);
  // evaluate() must agree with a decoder applied to simulate() output.
  int hits = 0;
  for (std::size_t s = 0; s < t.data.train.rasters.size(); ++s) {
    const auto out = simulate(res.network, t.data.train.rasters[s], t.sim);
    hits += res.readout.predict(spike_counts(out, res.network.output_ids)) == t.data.train.labels[s];
  }
  const auto ev =
      evaluate(res.network, res.readout, t.data.train.rasters, t.data.train.labels, t.sim);
  CHECK(ev.accuracy == doctest::Approx(static_cast<double>(hits) / t.data.train.rasters.size()));
  CHECK(ev.accuracy == res.curve.back().train_accuracy);
  CHECK(ev.loss == res.curve.back().loss);
}

TEST_CASE("training is independent of the thread count") {
  auto t = toy_task(3);
  TrainConfig cfg = default_bptt();
  cfg.epochs = 3;
  cfg.batch_size = 7;
  const int threads = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto a = train_bptt(t.net, t.data.train.rasters, t.data.train.labels, 2, cfg, t.sim);
  omp_set_num_threads(4);
  const auto b = train_bptt(t.net, t.data.train.rasters, t.data.train.labels, 2, cfg, t.sim);
  omp_set_num_threads(threads);
  CHECK(a.network == b.network);
  CHECK(a.readout.weights == b.readout.weights);
}

TEST_CASE("weights respect their bounds and snapshots are kept") {
  auto t = toy_task(4);
  TrainConfig cfg = default_bptt();
  cfg.epochs = 3;
  cfg.learning_rate = 0.5;
  cfg.keep_snapshots = true;
  const auto res = train_bptt(t.net, t.data.train.rasters, t.data.train.labels, 2, cfg, t.sim);
  CHECK_NOTHROW(res.network.validate());
  REQUIRE(res.snapshots.size() == 4);
  CHECK(res.snapshots[0].network == t.net);
  CHECK(res.snapshots[3].network == res.network);
  for (int e = 0; e <= 3; ++e) CHECK(res.snapshots[e].epoch == e);
}

TEST_CASE("truncation still trains") {
  auto t = toy_task(5);
  TrainConfig cfg = default_bptt();
  cfg.epochs = 2;
  cfg.truncation_length = 10;
  const auto cut = train_bptt(t.net, t.data.train.rasters, t.data.train.labels, 2, cfg, t.sim);
  cfg.truncation_length = default_bptt().truncation_length;
  const auto full = train_bptt(t.net, t.data.train.rasters, t.data.train.labels, 2, cfg, t.sim);
  CHECK_FALSE(cut.network == t.net);
  CHECK_FALSE(cut.network == full.network);
}

TEST_CASE("non-finite loss reports epoch and batch") {
  auto t = toy_task(1);
  TrainConfig cfg = default_bptt();
  cfg.epochs = 3;
  cfg.learning_rate = std::numeric_limits<double>::infinity();
  try {
    train_bptt(t.net, t.data.train.rasters, t.data.train.labels, 2, cfg, t.sim);
    FAIL("expected TrainingError");
  } catch (const TrainingError& e) {
    CHECK(e.epoch() >= 1);
    CHECK(e.batch() >= 0);
    CHECK(std::string(e.what()).find("epoch") != std::string::npos);
  }
}

TEST_CASE("bad inputs and configs are rejected") {
  auto t = toy_task(1);
  TrainConfig cfg = default_bptt();
  std::vector<int> bad = t.data.train.labels;
  bad[0] = 7;
  CHECK_THROWS_AS(train_bptt(t.net, t.data.train.rasters, bad, 2, cfg, t.sim), InputDomainError);
  bad.pop_back();
  CHECK_THROWS_AS(train_bptt(t.net, t.data.train.rasters, bad, 2, cfg, t.sim), InputDomainError);
  cfg.surrogate_beta = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = default_bptt();
  cfg.truncation_length = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = default_bptt();
  cfg.learning_rate = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("config and readout JSON round trips") {
  TrainConfig cfg = default_bptt();
  cfg.epochs = 7;
  cfg.learning_rate = 0.125;
  cfg.truncation_length = 33;
  const auto back = train_config_from_json(to_json(cfg));
  CHECK(back.epochs == 7);
  CHECK(back.learning_rate == 0.125);
  CHECK(back.truncation_length == 33);
  CHECK_THROWS_AS(train_config_from_json({{"epochs", "many"}}), ConfigError);

  Readout r(2, 3);
  r.weights = {0.1, -0.2, 0.3, 0.4, 0.5, -0.6};
  r.bias = {0.01, -0.02};
  const auto rb = readout_from_json(to_json(r));
  CHECK(rb.weights == r.weights);
  CHECK(rb.bias == r.bias);
  CHECK_THROWS_AS(readout_from_json({{"classes", 2}}), ParseError);
}

TEST_CASE("training curve CSV") {
  const auto dir = testutil::scratch_dir("bptt_curve");
  write_training_curve({{1, 0.5, 0.75}, {2, 0.25, 1.0}}, (dir / "c.csv").string());
  std::ifstream in(dir / "c.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "epoch,loss,train_accuracy");
  std::getline(in, line);
  CHECK(line == "1,0.5,0.75");
}
