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

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "oracles/oracles.hpp"
#include "spiketopo/dual_rep.hpp"
#include "spiketopo/errors.hpp"
#include "test_util.hpp"

using namespace spiketopo;

namespace {

Adjacency random_digraph(std::mt19937_64& rng, int n, double p) {
  std::bernoulli_distribution edge(p);
  Adjacency adj(n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (a != b && edge(rng)) adj[a].push_back(b);
    }
  }
  return adj;
}

NetworkTopology chain6() {
  std::vector<std::pair<int, int>> e;
  for (int k = 0; k < 5; ++k) e.push_back({k, k + 1});
  return testutil::make_net(6, e, {0}, {5});
}

NetworkTopology random_net(std::mt19937_64& rng, int n, double p) {
  std::vector<std::pair<int, int>> e;
  const auto adj = random_digraph(rng, n, p);
  for (int a = 0; a < n; ++a) {
    for (int b : adj[a]) e.push_back({a, b});
  }
  return testutil::make_net(n, e, {0, 1, 2}, {n - 2, n - 1});
}

std::set<int> as_set(const std::vector<int>& v) { return {v.begin(), v.end()}; }

}  // namespace

TEST_CASE("betweenness worked examples") {
  CHECK(betweenness(Adjacency{{1}, {2}, {}}) == std::vector<double>{0.0, 1.0, 0.0});
  CHECK(betweenness(Adjacency{{1, 2}, {0, 2}, {0, 1}}) == std::vector<double>{0.0, 0.0, 0.0});
  const Adjacency star{{1, 2, 3}, {0}, {0}, {0}};
  CHECK(betweenness(star) == std::vector<double>{6.0, 0.0, 0.0, 0.0});
}

TEST_CASE("betweenness matches path enumeration") {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> size(2, 8);
  std::uniform_real_distribution<double> density(0.1, 0.7);
  for (int rep = 0; rep < 200; ++rep) {
    const auto adj = random_digraph(rng, size(rng), density(rng));
    const auto fast = betweenness(adj);
    const auto slow = oracle::betweenness_by_paths(adj);
    REQUIRE(fast.size() == slow.size());
    for (std::size_t v = 0; v < fast.size(); ++v) {
      CHECK(fast[v] == doctest::Approx(slow[v]).epsilon(1e-12));
      CHECK(fast[v] >= 0.0);
    }
  }
}

TEST_CASE("parallel and serial betweenness agree bitwise") {
  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 10; ++rep) {
    const auto adj = random_digraph(rng, 60, 0.08);
    CHECK(betweenness(adj) == serial::betweenness(adj));
  }
}

TEST_CASE("chain layers") {
  const auto la = extract_layers(chain6(), 1.0 / 6.0, 0.1);
  CHECK(la.centrality[2] == 6.0);
  CHECK(la.centrality[3] == 6.0);
  CHECK(la.layer(1) == std::vector<int>{0});
  CHECK(la.layer(3) == std::vector<int>{2});
  CHECK(la.layer(2) == std::vector<int>{1});
  CHECK(la.d13[1] == 2);
  CHECK(la.layer(4) == std::vector<int>{3});
  CHECK(la.d35[3] == 3);
  CHECK(la.d35[4] == 3);
  CHECK(la.layer(5) == std::vector<int>{5});
}

TEST_CASE("complete graph picks lowest ids") {
  std::vector<std::pair<int, int>> e;
  for (int a = 0; a < 8; ++a) {
    for (int b = 0; b < 8; ++b) {
      if (a != b) e.push_back({a, b});
    }
  }
  const auto la = extract_layers(testutil::make_net(8, e, {0}, {1}), 0.25, 0.1);
  for (double c : la.centrality) CHECK(c == 0.0);
  CHECK(la.layer(3) == std::vector<int>{2, 3});
}

TEST_CASE("degenerate pools name the layer") {
  try {
    extract_layers(chain6(), 1.0, 0.1);
    FAIL("expected DegenerateTopologyError");
  } catch (const DegenerateTopologyError& e) {
    CHECK(e.layer() == "L2");
  }
  try {
    extract_layers(testutil::make_net(2, {{0, 1}}, {0}, {1}), 0.1, 0.1);
    FAIL("expected DegenerateTopologyError");
  } catch (const DegenerateTopologyError& e) {
    CHECK(e.layer() == "L3");
  }
  // Four free nodes: one for L3, two for L2, one left for L4 only if the band is small.
  try {
    extract_layers(chain6(), 0.1, 1.0);
    FAIL("expected DegenerateTopologyError");
  } catch (const DegenerateTopologyError& e) {
    CHECK(e.layer() == "L4");
  }
}

TEST_CASE("layers are disjoint and cover their roles") {
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 50; ++rep) {
    const auto net = random_net(rng, 40, 0.1);
    const auto la = extract_layers(net, 0.1, 0.1);
    std::set<int> seen;
    std::size_t total = 0;
    for (int l = 1; l <= 5; ++l) {
      CHECK_FALSE(la.layer(l).empty());
      total += la.layer(l).size();
      for (int v : la.layer(l)) seen.insert(v);
    }
    CHECK(seen.size() == total);
    CHECK(as_set(la.layer(1)) == as_set(net.input_ids));
    CHECK(as_set(la.layer(5)) == as_set(net.output_ids));
    CHECK(la.layer(3).size() == 4);
  }
}

TEST_CASE("unreachable nodes rank last") {
  // Node 4 is isolated; every other free node is connected.
  auto net = testutil::make_net(7, {{0, 1}, {1, 2}, {2, 3}, {3, 5}, {5, 6}}, {0}, {6});
  const auto la = extract_layers(net, 0.1, 0.1);
  CHECK(la.d13[4] >= 7);
  CHECK(la.rank_l2[4] == 3);
}

TEST_CASE("synapse order does not matter") {
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 10; ++rep) {
    auto net = random_net(rng, 30, 0.12);
    const auto a = extract_layers(net, 0.1, 0.1);
    std::shuffle(net.synapses.begin(), net.synapses.end(), rng);
    const auto b = extract_layers(net, 0.1, 0.1);
    CHECK(a.layers == b.layers);
    CHECK(a.d13 == b.d13);
    CHECK(a.d35 == b.d35);
  }
}

TEST_CASE("relabeling permutes the assignment") {
  std::mt19937_64 rng(6);
  int compared = 0;
  for (int rep = 0; rep < 200 && compared < 20; ++rep) {
    const int n = 16;
    const auto net = random_net(rng, n, 0.15);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    NetworkTopology moved = net;
    for (auto& s : moved.synapses) {
      s.pre = perm[s.pre];
      s.post = perm[s.post];
    }
    for (auto& id : moved.input_ids) id = perm[id];
    for (auto& id : moved.output_ids) id = perm[id];
    const auto a = extract_layers(net, 0.2, 0.2);
    const auto b = extract_layers(moved, 0.2, 0.2);
    for (int v = 0; v < n; ++v) {
      CHECK(b.centrality[perm[v]] == doctest::Approx(a.centrality[v]).epsilon(1e-12));
    }
    // Only instances whose cut points are free of ties are determined by the
    // graph alone; elsewhere the id tie-break decides.
    std::vector<double> free_c;
    for (int v = 0; v < n; ++v) {
      if (std::find(net.input_ids.begin(), net.input_ids.end(), v) == net.input_ids.end() &&
          std::find(net.output_ids.begin(), net.output_ids.end(), v) == net.output_ids.end()) {
        free_c.push_back(a.centrality[v]);
      }
    }
    std::sort(free_c.rbegin(), free_c.rend());
    const std::size_t k = a.layer(3).size();
    if (k < free_c.size() && free_c[k - 1] - free_c[k] < 1e-6) continue;
    for (int v = 0; v < n; ++v) {
      if (a.d13[v] >= 0) {
        CHECK(b.d13[perm[v]] == a.d13[v]);
        CHECK(b.d35[perm[v]] == a.d35[v]);
      }
    }
    auto mapped = [&](const std::vector<int>& layer) {
      std::set<int> out;
      for (int v : layer) out.insert(perm[v]);
      return out;
    };
    CHECK(mapped(a.layer(3)) == as_set(b.layer(3)));
    ++compared;
  }
  CHECK(compared > 0);
}

TEST_CASE("extraction is deterministic and exports round-trip") {
  HeterogeneityConfig cfg;
  const auto net = build_network(cfg, 50, {0, 1, 2, 3}, {46, 47, 48, 49});
  const auto a = extract_layers(net);
  const auto b = extract_layers(net);
  CHECK(a.layers == b.layers);
  const auto back = layers_from_json(to_json(a));
  CHECK(back.layers == a.layers);
  CHECK(back.centrality == a.centrality);
  CHECK(back.d13 == a.d13);
  CHECK(back.rank_l4 == a.rank_l4);
  const auto j = to_json(a);
  for (const char* k : {"L1", "L2", "L3", "L4", "L5", "centrality", "d13", "d35"}) CHECK(j.contains(k));
  const auto dot = to_dot(net, a);
  CHECK(dot.find("digraph") != std::string::npos);
}
