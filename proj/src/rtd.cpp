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

#include "spiketopo/rtd.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <numeric>
#include <tuple>

#include "spiketopo/errors.hpp"

namespace spiketopo {

namespace {

struct Edge {
  double w;
  int i;
  int j;
};

std::vector<Edge> sorted_edges(int n, auto&& weight) {
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) edges.push_back({weight(i, j), i, j});
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.w, a.i, a.j) < std::tie(b.w, b.i, b.j);
  });
  return edges;
}

class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  int find(int x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  // Attaches the larger root under the smaller so roots stay deterministic.
  int unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a > b) std::swap(a, b);
    parent_[b] = a;
    return a;
  }

 private:
  std::vector<int> parent_;
};

struct OpenBar {
  double birth;
  int x;  // reference-component roots at the two ends
  int y;
  bool open = true;
};

void check_same_size(const DistanceMatrix& a, const DistanceMatrix& b, const char* who) {
  if (a.size() != b.size()) {
    throw InputDomainError(std::string(who) + ": distance matrices differ in size (" +
                           std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  }
}

}  // namespace

double CrossBarcode::total_length() const {
  double s = 0.0;
  for (const auto& b : bars) s += b.length();
  return s;
}

CrossBarcode cross_barcode_h0(const DistanceMatrix& reference, const DistanceMatrix& other) {
  check_same_size(reference, other, "cross_barcode_h0");
  const int n = reference.size();
  const auto union_edges = sorted_edges(
      n, [&](int i, int j) { return std::min(reference(i, j), other(i, j)); });
  const auto ref_edges = sorted_edges(n, [&](int i, int j) { return reference(i, j); });

  UnionFind uf_union(n), uf_ref(n);
  std::vector<OpenBar> bars;
  std::vector<Bar> closed;
  std::vector<std::vector<int>> incident(n);  // reference root -> open bar ids
  bars.reserve(n);

  std::vector<int> prev_bar(n), prev_node(n), seen(n, -1);
  int stamp = 0;
  std::size_t iu = 0, ir = 0;
  while (ir < ref_edges.size()) {
    // Union-filtration edges go first on equal thresholds.
    if (iu < union_edges.size() && union_edges[iu].w <= ref_edges[ir].w) {
      const Edge& e = union_edges[iu++];
      if (uf_union.find(e.i) == uf_union.find(e.j)) continue;
      uf_union.unite(e.i, e.j);
      const int x = uf_ref.find(e.i), y = uf_ref.find(e.j);
      bars.push_back({e.w, x, y});
      incident[x].push_back(static_cast<int>(bars.size()) - 1);
      incident[y].push_back(static_cast<int>(bars.size()) - 1);
      continue;
    }
    const Edge& e = ref_edges[ir++];
    const int x = uf_ref.find(e.i), y = uf_ref.find(e.j);
    if (x == y) continue;

    // BFS over open bars from x to y, then close the youngest bar on the path.
    ++stamp;
    std::deque<int> q{x};
    seen[x] = stamp;
    while (!q.empty() && seen[y] != stamp) {
      const int u = q.front();
      q.pop_front();
      for (int b : incident[u]) {
        const int v = bars[b].x == u ? bars[b].y : bars[b].x;
        if (seen[v] == stamp) continue;
        seen[v] = stamp;
        prev_bar[v] = b;
        prev_node[v] = u;
        q.push_back(v);
      }
    }
    int victim = -1;
    for (int v = y; v != x; v = prev_node[v]) {
      const int b = prev_bar[v];
      if (victim < 0 || bars[b].birth > bars[victim].birth ||
          (bars[b].birth == bars[victim].birth && b > victim)) {
        victim = b;
      }
    }
    bars[victim].open = false;
    closed.push_back({bars[victim].birth, e.w});
    for (int end : {bars[victim].x, bars[victim].y}) {
      auto& inc = incident[end];
      inc.erase(std::find(inc.begin(), inc.end(), victim));
    }

    const int root = uf_ref.unite(x, y);
    const int gone = root == x ? y : x;
    for (int b : incident[gone]) {
      if (bars[b].x == gone) bars[b].x = root;
      if (bars[b].y == gone) bars[b].y = root;
      incident[root].push_back(b);
    }
    incident[gone].clear();
  }

  CrossBarcode cb;
  cb.bars = std::move(closed);
  std::sort(cb.bars.begin(), cb.bars.end(), [](const Bar& a, const Bar& b) {
    return std::tie(a.birth, a.death) < std::tie(b.birth, b.death);
  });
  return cb;
}

double mean_pairwise_divergence(const DistanceMatrix& a, const DistanceMatrix& b) {
  check_same_size(a, b, "mean_pairwise_divergence");
  const int n = a.size();
  if (n < 2) return 0.0;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) s += std::abs(a(i, j) - b(i, j));
  }
  return s / (0.5 * n * (n - 1));
}

RtdReport rtd_score(const DistanceMatrix& a, const DistanceMatrix& b, std::string label_a,
                    std::string label_b) {
  check_same_size(a, b, "rtd_score");
  RtdReport r;
  r.n = a.size();
  r.label_a = std::move(label_a);
  r.label_b = std::move(label_b);
  r.bars_ab = cross_barcode_h0(a, b);
  r.bars_ba = cross_barcode_h0(b, a);
  r.rtd_ab = r.bars_ab.total_length();
  r.rtd_ba = r.bars_ba.total_length();
  r.rtd = 0.5 * (r.rtd_ab + r.rtd_ba);
  r.mean_pairwise_divergence = mean_pairwise_divergence(a, b);
  return r;
}

nlohmann::json to_json(const RtdReport& r) {
  auto bars = [](const CrossBarcode& cb) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& b : cb.bars) arr.push_back({b.birth, b.death});
    return arr;
  };
  return {{"rtd", r.rtd},
          {"rtd_ab", r.rtd_ab},
          {"rtd_ba", r.rtd_ba},
          {"bars_ab", bars(r.bars_ab)},
          {"bars_ba", bars(r.bars_ba)},
          {"n", r.n},
          {"labels", {r.label_a, r.label_b}},
          {"diagnostics", {{"mean_pairwise_divergence", r.mean_pairwise_divergence}}}};
}

std::vector<std::vector<double>> classical_mds(const DistanceMatrix& d, int dims) {
  const int n = d.size();
  if (dims < 1 || dims >= n) {
    throw InputDomainError("classical_mds: dims must satisfy 1 <= dims < n");
  }
  Eigen::MatrixXd sq(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) sq(i, j) = d(i, j) * d(i, j);
  }
  const Eigen::MatrixXd centering =
      Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / n);
  const Eigen::MatrixXd gram = -0.5 * centering * sq * centering;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  const auto& values = solver.eigenvalues();  // ascending
  const auto& vectors = solver.eigenvectors();

  std::vector<std::vector<double>> coords(n, std::vector<double>(dims, 0.0));
  for (int k = 0; k < dims; ++k) {
    const int col = n - 1 - k;
    const double lambda = std::max(0.0, values(col));
    Eigen::VectorXd v = vectors.col(col);
    for (int i = 0; i < n; ++i) {
      if (std::abs(v(i)) > 1e-12) {
        if (v(i) < 0) v = -v;
        break;
      }
    }
    const double s = std::sqrt(lambda);
    for (int i = 0; i < n; ++i) coords[i][k] = v(i) * s;
  }
  return coords;
}

void write_coordinates_csv(const std::vector<std::vector<double>>& coords,
                           const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(17);
  const std::size_t dims = coords.empty() ? 0 : coords[0].size();
  out << "index";
  for (std::size_t k = 0; k < dims; ++k) out << ",x" << k;
  out << '\n';
  for (std::size_t i = 0; i < coords.size(); ++i) {
    out << i;
    for (double c : coords[i]) out << ',' << c;
    out << '\n';
  }
}

}  // namespace spiketopo
