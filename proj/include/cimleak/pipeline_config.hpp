/* Copyright 2026 The CIMLeak Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef CIMLEAK_PIPELINE_CONFIG_HPP_
#define CIMLEAK_PIPELINE_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cimleak/adc_model.hpp"
#include "cimleak/cim_sim.hpp"
#include "cimleak/dataset.hpp"
#include "cimleak/device_model.hpp"
#include "cimleak/power_trace.hpp"
#include "cimleak/trace_pipeline.hpp"

namespace cimleak::io {

// Where the first-layer weights come from: a CIMT f32 [C_out, C_in, K, K]
// file, or seeded Gaussian weights when `path` is empty.
struct WeightSource {
  std::string path;
  double stddev = 0.1;
  std::uint64_t seed = 1;
};

struct PipelineConfig {
  device::DeviceConfig device;
  adc::SarAdcConfig adc;  // full_scale_current 0 selects the tile default
  device::LayerGeometry layer;
  WeightSource weights;
  double programming_sigma = 0.0;

  std::vector<double> noise_levels{0.0, 0.05, 0.10, 0.15, 0.20};
  pipeline::NoiseTarget noise_target = pipeline::NoiseTarget::kFeatureMatrices;

  std::string input_dir;
  std::size_t image_rows = 256;
  std::size_t image_cols = 256;

  sim::PhaseTiming timing;
  double sample_rate = 1e9;

  SplitRatios split;
  std::uint64_t seed = 7;
  std::size_t workers = 8;
  std::string output_dir;

  // ConfigError describing the first violated constraint.
  void validate() const;
};

// Missing keys keep their defaults; unknown keys are rejected.
PipelineConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const PipelineConfig& cfg);

PipelineConfig load_config(const std::filesystem::path& path);
// Copy of the effective config written next to every output.
void save_config(const std::filesystem::path& dir, const PipelineConfig& cfg);

device::QuantizedWeights load_weights(const PipelineConfig& cfg);
sim::CimLayer build_layer(const PipelineConfig& cfg);

}  // namespace cimleak::io

#endif  // CIMLEAK_PIPELINE_CONFIG_HPP_
