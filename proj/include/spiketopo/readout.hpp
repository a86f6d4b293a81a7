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

#ifndef SPIKETOPO_READOUT_HPP_
#define SPIKETOPO_READOUT_HPP_

#include <span>
#include <vector>

namespace spiketopo {

/// Multinomial logistic-regression probe on frozen features, fitted by
/// full-batch gradient descent on standardized inputs. Deterministic.
class LogisticProbe {
 public:
  struct Options {
    int iterations = 500;
    double learning_rate = 0.5;
    double l2 = 1e-3;
  };

  LogisticProbe() = default;

  void fit(std::span<const std::vector<double>> x, std::span<const int> y, int classes,
           const Options& opts);
  void fit(std::span<const std::vector<double>> x, std::span<const int> y, int classes) {
    fit(x, y, classes, Options{});
  }
  int predict(std::span<const double> x) const;
  double accuracy(std::span<const std::vector<double>> x, std::span<const int> y) const;

 private:
  int classes_ = 0;
  int dim_ = 0;
  std::vector<double> mean_, scale_;
  std::vector<double> w_;  // classes x dim
  std::vector<double> b_;
};

}  // namespace spiketopo

#endif  // SPIKETOPO_READOUT_HPP_
