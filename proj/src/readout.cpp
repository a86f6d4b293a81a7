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

#include "spiketopo/readout.hpp"

#include <algorithm>
#include <cmath>

#include "spiketopo/errors.hpp"

namespace spiketopo {

void LogisticProbe::fit(std::span<const std::vector<double>> x, std::span<const int> y,
                        int classes, const Options& opts) {
  if (x.empty() || x.size() != y.size()) throw InputDomainError("LogisticProbe: bad training set");
  classes_ = classes;
  dim_ = static_cast<int>(x[0].size());
  const double m = static_cast<double>(x.size());
  mean_.assign(dim_, 0.0);
  scale_.assign(dim_, 0.0);
  for (const auto& row : x) {
    for (int j = 0; j < dim_; ++j) mean_[j] += row[j] / m;
  }
  for (const auto& row : x) {
    for (int j = 0; j < dim_; ++j) scale_[j] += (row[j] - mean_[j]) * (row[j] - mean_[j]) / m;
  }
  for (auto& s : scale_) s = s > 1e-12 ? 1.0 / std::sqrt(s) : 0.0;

  std::vector<std::vector<double>> z(x.size(), std::vector<double>(dim_));
  for (std::size_t s = 0; s < x.size(); ++s) {
    for (int j = 0; j < dim_; ++j) z[s][j] = (x[s][j] - mean_[j]) * scale_[j];
  }
  w_.assign(static_cast<std::size_t>(classes_) * dim_, 0.0);
  b_.assign(classes_, 0.0);
  std::vector<double> gw(w_.size()), gb(classes_), p(classes_);
  for (int it = 0; it < opts.iterations; ++it) {
    std::fill(gw.begin(), gw.end(), 0.0);
    std::fill(gb.begin(), gb.end(), 0.0);
    for (std::size_t s = 0; s < z.size(); ++s) {
      double mx = -1e300;
      for (int c = 0; c < classes_; ++c) {
        p[c] = b_[c];
        for (int j = 0; j < dim_; ++j) p[c] += w_[c * dim_ + j] * z[s][j];
        mx = std::max(mx, p[c]);
      }
      double sum = 0.0;
      for (auto& v : p) sum += (v = std::exp(v - mx));
      for (int c = 0; c < classes_; ++c) {
        const double d = p[c] / sum - (c == y[s] ? 1.0 : 0.0);
        gb[c] += d / m;
        for (int j = 0; j < dim_; ++j) gw[c * dim_ + j] += d * z[s][j] / m;
      }
    }
    for (std::size_t k = 0; k < w_.size(); ++k) {
      w_[k] -= opts.learning_rate * (gw[k] + opts.l2 * w_[k]);
    }
    for (int c = 0; c < classes_; ++c) b_[c] -= opts.learning_rate * gb[c];
  }
}

int LogisticProbe::predict(std::span<const double> x) const {
  int best = 0;
  double best_v = -1e300;
  for (int c = 0; c < classes_; ++c) {
    double v = b_[c];
    for (int j = 0; j < dim_; ++j) v += w_[c * dim_ + j] * (x[j] - mean_[j]) * scale_[j];
    if (v > best_v) {
      best_v = v;
      best = c;
    }
  }
  return best;
}

double LogisticProbe::accuracy(std::span<const std::vector<double>> x,
                               std::span<const int> y) const {
  if (x.empty()) return 0.0;
  int hits = 0;
  for (std::size_t s = 0; s < x.size(); ++s) hits += predict(x[s]) == y[s] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(x.size());
}

}  // namespace spiketopo
