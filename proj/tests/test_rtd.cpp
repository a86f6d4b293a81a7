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
#include <cmath>
#include <numeric>
#include <random>

#include "oracles/oracles.hpp"
#include "spiketopo/errors.hpp"
#include "spiketopo/rtd.hpp"
#include "test_util.hpp"

using namespace spiketopo;

namespace {

DistanceMatrix tri(double ab, double bc, double ac) {
  DistanceMatrix d(3);
  d.set(0, 1, ab);
  d.set(1, 2, bc);
  d.set(0, 2, ac);
  return d;
}

std::vector<double> sorted_births(const CrossBarcode& cb) {
  std::vector<double> v;
  for (const auto& b : cb.bars) v.push_back(b.birth);
  std::sort(v.begin(), v.end());
  return v;
}

std::vector<double> sorted_deaths(const CrossBarcode& cb) {
  std::vector<double> v;
  for (const auto& b : cb.bars) v.push_back(b.death);
  std::sort(v.begin(), v.end());
  return v;
}

void check_against_sweep(const DistanceMatrix& ref, const DistanceMatrix& other) {
  const int n = ref.size();
  const auto cb = cross_barcode_h0(ref, other);
  const auto sw = oracle::threshold_sweep(testutil::flat(ref), testutil::flat(other), n);
  REQUIRE(static_cast<int>(cb.bars.size()) == n - 1);
  CHECK(sorted_births(cb) == sw.births);
  CHECK(sorted_deaths(cb) == sw.deaths);
  CHECK(cb.total_length() == doctest::Approx(sw.total).epsilon(1e-12));
  for (std::size_t k = 0; k < sw.thresholds.size(); ++k) {
    const double a = sw.thresholds[k];
    int alive = 0;
    for (const auto& b : cb.bars) alive += (b.birth <= a && a < b.death) ? 1 : 0;
    CHECK(alive == sw.alive[k]);
  }
  for (const auto& b : cb.bars) {
    CHECK(b.death >= b.birth);
    CHECK(b.birth >= 0.0);
  }
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

}  // namespace

TEST_CASE("identical filtrations give zero-length bars") {
  std::mt19937_64 rng(41);
  const auto d = testutil::random_matrix(rng, 9);
  const auto cb = cross_barcode_h0(d, d);
  CHECK(cb.bars.size() == 8);
  for (const auto& b : cb.bars) CHECK(b.length() == 0.0);
  CHECK(rtd_score(d, d).rtd == 0.0);
}

TEST_CASE("three-point swap") {
  const auto w = tri(1, 2, 3);
  const auto wt = tri(2, 1, 3);
  const auto cb = cross_barcode_h0(w, wt);
  CHECK(sorted_births(cb) == std::vector<double>{1, 1});
  CHECK(sorted_deaths(cb) == std::vector<double>{1, 2});
  CHECK(cb.total_length() == 1.0);
  // The swap is symmetric, so each direction contributes the same sum.
  const auto r = rtd_score(w, wt);
  CHECK(r.rtd_ab == 1.0);
  CHECK(r.rtd_ba == 1.0);
  CHECK(r.rtd == 1.0);
}

TEST_CASE("three-point scaling") {
  const auto w = tri(1, 3, 2);
  DistanceMatrix wt(3);
  wt.set(0, 1, 2);
  wt.set(1, 2, 6);
  wt.set(0, 2, 4);
  for (const auto& b : cross_barcode_h0(w, wt).bars) CHECK(b.length() == 0.0);
  const auto back = cross_barcode_h0(wt, w);
  CHECK(sorted_births(back) == std::vector<double>{1, 2});
  CHECK(sorted_deaths(back) == std::vector<double>{2, 4});
  CHECK(back.total_length() == 3.0);
  CHECK(rtd_score(w, wt).rtd == 1.5);
}

TEST_CASE("barcode matches exhaustive threshold sweep") {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> size(2, 7);
  for (int rep = 0; rep < 300; ++rep) {
    const int n = size(rng);
    const bool ties = rep % 2 == 0;
    const auto a = testutil::random_matrix(rng, n, ties);
    const auto b = testutil::random_matrix(rng, n, ties);
    check_against_sweep(a, b);
    check_against_sweep(b, a);
  }
}

TEST_CASE("dominance measures merge delays") {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> bump(0.0, 3.0);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 6;
    const auto a = testutil::random_matrix(rng, n);
    auto b = a;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) b.set(i, j, a(i, j) + bump(rng));
    }
    check_against_sweep(b, a);
    for (const auto& bar : cross_barcode_h0(a, b).bars) CHECK(bar.length() == 0.0);
    CHECK(rtd_score(a, b).rtd_ab == 0.0);
    CHECK(rtd_score(a, b).rtd_ba > 0.0);
  }
}

TEST_CASE("score properties") {
  std::mt19937_64 rng(44);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 8;
    const auto a = testutil::random_matrix(rng, n);
    const auto b = testutil::random_matrix(rng, n);
    const auto r = rtd_score(a, b, "x", "y");
    CHECK(r.rtd >= 0.0);
    CHECK(r.rtd == doctest::Approx(0.5 * (r.rtd_ab + r.rtd_ba)));
    CHECK(r.n == n);
    CHECK(r.label_a == "x");
    const auto s = rtd_score(b, a);
    CHECK(s.rtd_ab == r.rtd_ba);
    CHECK(s.rtd_ba == r.rtd_ab);
    CHECK(s.rtd == r.rtd);

    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    CHECK(rtd_score(a.permuted(perm), b.permuted(perm)).rtd == doctest::Approx(r.rtd).epsilon(1e-12));
  }
  CHECK_THROWS_AS(rtd_score(DistanceMatrix(3), DistanceMatrix(4)), InputDomainError);
  CHECK_THROWS_AS(cross_barcode_h0(DistanceMatrix(3), DistanceMatrix(2)), InputDomainError);
}

TEST_CASE("noise monotonicity") {
  const int n = 20;
  std::mt19937_64 base(45);
  std::vector<DistanceMatrix> as;
  for (int s = 0; s < 20; ++s) as.push_back(testutil::random_matrix(base, n));
  double previous = -1.0;
  for (double eps : {0.1, 0.2, 0.4, 0.8}) {
    std::vector<double> scores;
    for (int s = 0; s < 20; ++s) {
      const auto& a = as[s];
      const double scale = median(testutil::flat(a));
      std::mt19937_64 rng(1000 + s);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      auto b = a;
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) b.set(i, j, a(i, j) + eps * scale * u(rng));
      }
      scores.push_back(rtd_score(a, b).rtd);
    }
    const double m = median(scores);
    CHECK(m >= previous);
    previous = m;
  }
}

TEST_CASE("mean pairwise divergence") {
  std::mt19937_64 rng(46);
  const auto a = testutil::random_matrix(rng, 7);
  CHECK(mean_pairwise_divergence(a, a) == 0.0);
  auto shifted = a;
  for (int i = 0; i < 7; ++i) {
    for (int j = i + 1; j < 7; ++j) shifted.set(i, j, a(i, j) + 0.75);
  }
  CHECK(mean_pairwise_divergence(a, shifted) == doctest::Approx(0.75).epsilon(1e-12));
  const auto b = testutil::random_matrix(rng, 7);
  double brute = 0.0;
  for (int i = 0; i < 7; ++i) {
    for (int j = i + 1; j < 7; ++j) brute += std::abs(a(i, j) - b(i, j));
  }
  CHECK(mean_pairwise_divergence(a, b) == doctest::Approx(brute / 21.0).epsilon(1e-12));
  CHECK(rtd_score(a, b).mean_pairwise_divergence == mean_pairwise_divergence(a, b));
  CHECK_THROWS_AS(mean_pairwise_divergence(a, DistanceMatrix(3)), InputDomainError);
}

TEST_CASE("classical mds") {
  const auto zero = classical_mds(DistanceMatrix(4), 2);
  REQUIRE(zero.size() == 4);
  for (const auto& row : zero) {
    for (double x : row) CHECK(x == doctest::Approx(0.0).epsilon(1e-12));
  }

  const auto line = classical_mds(tri(1, 1, 2), 1);
  CHECK(std::abs(line[0][0] - line[1][0]) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(line[1][0] - line[2][0]) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(line[0][0] - line[2][0]) == doctest::Approx(2.0).epsilon(1e-9));

  std::mt19937_64 rng(47);
  std::normal_distribution<double> g(0.0, 3.0);
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 9, dims = 3;
    std::vector<std::vector<double>> pts(n, std::vector<double>(dims));
    for (auto& p : pts) {
      for (auto& x : p) x = g(rng);
    }
    auto dist = [](const std::vector<double>& p, const std::vector<double>& q) {
      double s = 0.0;
      for (std::size_t k = 0; k < p.size(); ++k) s += (p[k] - q[k]) * (p[k] - q[k]);
      return std::sqrt(s);
    };
    DistanceMatrix d(n);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) d.set(i, j, dist(pts[i], pts[j]));
    }
    const auto y = classical_mds(d, dims);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) CHECK(std::abs(dist(y[i], y[j]) - d(i, j)) < 1e-9);
    }
  }
  CHECK_THROWS_AS(classical_mds(DistanceMatrix(3), 3), InputDomainError);
  CHECK_THROWS_AS(classical_mds(DistanceMatrix(3), 0), InputDomainError);
}

TEST_CASE("report json") {
  const auto r = rtd_score(tri(1, 2, 3), tri(2, 1, 3), "H", "BP");
  const auto j = to_json(r);
  CHECK(j.at("rtd").get<double>() == r.rtd);
  CHECK(j.at("rtd_ab").get<double>() == r.rtd_ab);
  CHECK(j.at("bars_ab").size() == 2);
  CHECK(j.at("bars_ba").size() == 2);
  CHECK(j.at("n").get<int>() == 3);
  CHECK(j.at("diagnostics").contains("mean_pairwise_divergence"));
  CHECK(j.dump().find("BP") != std::string::npos);
}
