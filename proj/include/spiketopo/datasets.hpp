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

#ifndef SPIKETOPO_DATASETS_HPP_
#define SPIKETOPO_DATASETS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "spiketopo/lif_sim.hpp"

namespace spiketopo {

struct LabeledFeatures {
  std::vector<std::vector<double>> features;
  std::vector<int> labels;
};

struct LabeledRasters {
  std::vector<SpikeRaster> rasters;
  std::vector<int> labels;
};

/// Fixed random class prototypes in [0,1]^feature_dim plus clipped Gaussian
/// noise. Samples are grouped by class.
LabeledFeatures gen_synthetic_spatial(int classes, int samples_per_class, int feature_dim,
                                      double noise, std::uint64_t seed);

struct TemporalSpec {
  int classes = 2;
  int samples_per_class = 50;
  int channels = 16;
  double duration = 50.0;
  double jitter = 1.0;           // ms, Gaussian sd truncated at 3 sd
  int spikes_per_channel = 3;    // same for every class, so rates carry no label
  double drop_rate = 0.0;        // per-spike deletion probability
  double add_rate = 0.0;         // expected insertions per template spike
  double min_gap = 2.0;          // ms between template spikes on one channel
  double dt = 0.1;
  std::uint64_t seed = 1;
};

/// Class templates of per-channel spike times; every class fires the same
/// number of template spikes on each channel, so only timing separates them.
LabeledRasters gen_synthetic_temporal(const TemporalSpec& spec);

/// Templates used by gen_synthetic_temporal, one raster per class.
std::vector<SpikeRaster> temporal_templates(const TemporalSpec& spec);

/// Reads one spike CSV (label in its sidecar) or every `*.csv` in a directory,
/// in filename order.
LabeledRasters ingest_spike_csv(const std::string& path);

/// Writes `<dir>/<prefix>_NNNN.csv` + sidecars with the label field.
void write_labeled_rasters(const LabeledRasters& data, const std::string& dir,
                           const std::string& prefix = "sample");

}  // namespace spiketopo

#endif  // SPIKETOPO_DATASETS_HPP_
