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

#include "spiketopo/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "spiketopo/errors.hpp"
#include "spiketopo/rng.hpp"

namespace spiketopo {

namespace fs = std::filesystem;

LabeledFeatures gen_synthetic_spatial(int classes, int samples_per_class, int feature_dim,
                                      double noise, std::uint64_t seed) {
  if (classes < 2) throw ConfigError("spatial dataset: classes must be >= 2");
  if (samples_per_class < 1 || feature_dim < 1) {
    throw ConfigError("spatial dataset: samples_per_class and feature_dim must be >= 1");
  }
  if (!(noise >= 0.0)) throw ConfigError("spatial dataset: noise must be >= 0");
  Rng proto_rng = make_rng(seed, "spatial_prototypes");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::vector<double>> protos(classes, std::vector<double>(feature_dim));
  for (auto& p : protos) {
    for (auto& x : p) x = unit(proto_rng);
  }
  LabeledFeatures out;
  Rng noise_rng = make_rng(seed, "spatial_noise");
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int c = 0; c < classes; ++c) {
    for (int s = 0; s < samples_per_class; ++s) {
      std::vector<double> x = protos[c];
      if (noise > 0.0) {
        for (auto& v : x) v = std::clamp(v + noise * gauss(noise_rng), 0.0, 1.0);
      }
      out.features.push_back(std::move(x));
      out.labels.push_back(c);
    }
  }
  return out;
}

namespace {

void check_temporal(const TemporalSpec& s) {
  if (s.classes < 2) throw ConfigError("temporal dataset: classes must be >= 2");
  if (s.samples_per_class < 1 || s.channels < 1 || s.spikes_per_channel < 1) {
    throw ConfigError("temporal dataset: sizes must be >= 1");
  }
  if (!(s.jitter >= 0.0)) throw ConfigError("temporal dataset: jitter must be >= 0");
  if (!(s.drop_rate >= 0.0 && s.drop_rate < 1.0) || !(s.add_rate >= 0.0)) {
    throw ConfigError("temporal dataset: drop_rate must be in [0,1), add_rate >= 0");
  }
  const double margin = 3.0 * s.jitter;
  const double usable = s.duration - 2.0 * margin;
  if (!(usable > s.spikes_per_channel * s.min_gap)) {
    throw ConfigError("temporal dataset: duration too short for " +
                      std::to_string(s.spikes_per_channel) + " template spikes per channel");
  }
}

}  // namespace

std::vector<SpikeRaster> temporal_templates(const TemporalSpec& spec) {
  check_temporal(spec);
  const double margin = 3.0 * spec.jitter;
  std::uniform_real_distribution<double> when(margin, spec.duration - margin);
  std::vector<SpikeRaster> templates(spec.classes);
  for (int c = 0; c < spec.classes; ++c) {
    Rng rng = make_rng(spec.seed, "temporal_template", static_cast<std::uint64_t>(c));
    auto& t = templates[c];
    t.duration = spec.duration;
    t.dt = spec.dt;
    t.trains.resize(spec.channels);
    for (auto& train : t.trains) {
      for (int attempt = 0;; ++attempt) {
        if (attempt == 10000) {
          throw ConfigError("temporal dataset: cannot place template spikes; increase duration");
        }
        train.clear();
        for (int k = 0; k < spec.spikes_per_channel; ++k) train.push_back(when(rng));
        std::sort(train.begin(), train.end());
        bool ok = true;
        for (std::size_t k = 1; k < train.size(); ++k) ok = ok && train[k] - train[k - 1] >= spec.min_gap;
        if (ok) break;
      }
    }
  }
  return templates;
}

LabeledRasters gen_synthetic_temporal(const TemporalSpec& spec) {
  const auto templates = temporal_templates(spec);
  LabeledRasters out;
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> anywhere(0.0, spec.duration);
  std::poisson_distribution<int> extra(spec.add_rate * spec.spikes_per_channel);
  for (int c = 0; c < spec.classes; ++c) {
    for (int s = 0; s < spec.samples_per_class; ++s) {
      Rng rng = make_rng(spec.seed, "temporal_sample", static_cast<std::uint64_t>(c),
                         static_cast<std::uint64_t>(s));
      SpikeRaster r = templates[c];
      for (auto& train : r.trains) {
        SpikeTrain next;
        for (double t : train) {
          if (spec.drop_rate > 0.0 && unit(rng) < spec.drop_rate) continue;
          double z = 0.0;
          if (spec.jitter > 0.0) {
            do {
              z = gauss(rng);
            } while (std::abs(z) > 3.0);
          }
          next.push_back(t + spec.jitter * z);
        }
        if (spec.add_rate > 0.0) {
          const int k = extra(rng);
          for (int e = 0; e < k; ++e) next.push_back(anywhere(rng));
        }
        for (auto& t : next) t = std::clamp(t, 0.0, std::nextafter(spec.duration, 0.0));
        std::sort(next.begin(), next.end());
        next.erase(std::unique(next.begin(), next.end()), next.end());
        train = std::move(next);
      }
      out.rasters.push_back(std::move(r));
      out.labels.push_back(c);
    }
  }
  return out;
}

LabeledRasters ingest_spike_csv(const std::string& path) {
  std::vector<fs::path> files;
  if (fs::is_directory(path)) {
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.path().extension() == ".csv") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw ParseError(path + ": no .csv files");
  } else {
    files.emplace_back(path);
  }
  LabeledRasters out;
  for (const auto& f : files) {
    nlohmann::json side;
    SpikeRaster r = read_raster_csv(f.string(), &side);
    if (!side.contains("label") || !side["label"].is_number_integer()) {
      throw ParseError(sidecar_path(f.string()) + ": missing integer 'label'");
    }
    out.labels.push_back(side["label"].get<int>());
    out.rasters.push_back(std::move(r));
  }
  return out;
}

void write_labeled_rasters(const LabeledRasters& data, const std::string& dir,
                           const std::string& prefix) {
  fs::create_directories(dir);
  for (std::size_t k = 0; k < data.rasters.size(); ++k) {
    char name[64];
    std::snprintf(name, sizeof name, "%s_%04zu.csv", prefix.c_str(), k);
    write_raster_csv(data.rasters[k], (fs::path(dir) / name).string(),
                     {{"label", data.labels[k]}});
  }
}

}  // namespace spiketopo
