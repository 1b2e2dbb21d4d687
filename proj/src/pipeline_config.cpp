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

#include "cimleak/pipeline_config.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>

#include "cimleak/errors.hpp"
#include "cimleak/tensor_file.hpp"

namespace cimleak::io {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError("config: '" + where + "' must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; }))
      throw ConfigError("config: unknown key '" + where + "." + key + "'");
  }
}

template <typename T>
void read_opt(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

const char* target_name(pipeline::NoiseTarget t) {
  return t == pipeline::NoiseTarget::kFeatureMatrices ? "feature_matrices" : "trace_samples";
}

}  // namespace

void PipelineConfig::validate() const {
  device.validate();
  adc.validate();
  layer.validate();
  if (adc.resolution > adc::kMaxLutResolution)
    throw ConfigError("adc: resolution above the LUT limit");
  if (!(programming_sigma >= 0.0)) throw ConfigError("device: programming_sigma must be >= 0");
  if (weights.path.empty() && !(weights.stddev > 0.0))
    throw ConfigError("weights: stddev must be > 0 for synthetic weights");
  for (double l : noise_levels)
    if (!(l >= 0.0)) throw ConfigError("noise: levels must be >= 0");
  if (image_rows == 0 || image_cols == 0) throw ConfigError("dataset: image_size must be > 0");
  if (layer.output_rows(image_rows) == 0 || layer.output_cols(image_cols) == 0)
    throw ConfigError("layer: geometry produces an empty output for the image size");
  if (!(timing.analog_seconds > 0.0) || !(timing.adc_seconds > 0.0) || !(sample_rate > 0.0))
    throw ConfigError("trace: durations and sample_rate must be > 0");
  split.validate();
}

PipelineConfig config_from_json(const json& j) {
  PipelineConfig cfg;
  try {
    reject_unknown(j, "<root>",
                   {"device", "adc", "layer", "weights", "noise", "dataset", "trace", "split",
                    "seed", "workers", "output_dir"});
    if (j.contains("device")) {
      const auto& d = j.at("device");
      reject_unknown(d, "device", {"g_min", "g_max", "num_levels", "v_read", "programming_sigma"});
      read_opt(d, "g_min", cfg.device.g_min);
      read_opt(d, "g_max", cfg.device.g_max);
      read_opt(d, "num_levels", cfg.device.num_levels);
      read_opt(d, "v_read", cfg.device.v_read);
      read_opt(d, "programming_sigma", cfg.programming_sigma);
    }
    if (j.contains("adc")) {
      const auto& a = j.at("adc");
      reject_unknown(a, "adc", {"resolution", "v_ref", "c_unit", "full_scale_current"});
      read_opt(a, "resolution", cfg.adc.resolution);
      read_opt(a, "v_ref", cfg.adc.v_ref);
      read_opt(a, "c_unit", cfg.adc.c_unit);
      read_opt(a, "full_scale_current", cfg.adc.full_scale_current);
    }
    if (j.contains("layer")) {
      const auto& l = j.at("layer");
      reject_unknown(l, "layer",
                     {"kernel_dim", "in_channels", "out_channels", "stride", "padding",
                      "tile_rows", "tile_cols", "adcs_per_tile"});
      read_opt(l, "kernel_dim", cfg.layer.kernel_dim);
      read_opt(l, "in_channels", cfg.layer.in_channels);
      read_opt(l, "out_channels", cfg.layer.out_channels);
      read_opt(l, "stride", cfg.layer.stride);
      read_opt(l, "padding", cfg.layer.padding);
      read_opt(l, "tile_rows", cfg.layer.tile_rows);
      read_opt(l, "tile_cols", cfg.layer.tile_cols);
      read_opt(l, "adcs_per_tile", cfg.layer.adcs_per_tile);
    }
    if (j.contains("weights")) {
      const auto& w = j.at("weights");
      reject_unknown(w, "weights", {"path", "stddev", "seed"});
      read_opt(w, "path", cfg.weights.path);
      read_opt(w, "stddev", cfg.weights.stddev);
      read_opt(w, "seed", cfg.weights.seed);
    }
    if (j.contains("noise")) {
      const auto& n = j.at("noise");
      reject_unknown(n, "noise", {"levels", "target"});
      read_opt(n, "levels", cfg.noise_levels);
      if (n.contains("target")) {
        const auto t = n.at("target").get<std::string>();
        if (t == "feature_matrices") cfg.noise_target = pipeline::NoiseTarget::kFeatureMatrices;
        else if (t == "trace_samples") cfg.noise_target = pipeline::NoiseTarget::kTraceSamples;
        else throw ConfigError("config: noise.target must be feature_matrices or trace_samples");
      }
    }
    if (j.contains("dataset")) {
      const auto& d = j.at("dataset");
      reject_unknown(d, "dataset", {"input_dir", "image_size"});
      read_opt(d, "input_dir", cfg.input_dir);
      if (d.contains("image_size")) {
        cfg.image_rows = d.at("image_size").at(0).get<std::size_t>();
        cfg.image_cols = d.at("image_size").at(1).get<std::size_t>();
      }
    }
    if (j.contains("trace")) {
      const auto& t = j.at("trace");
      reject_unknown(t, "trace", {"analog_seconds", "adc_seconds", "sample_rate"});
      read_opt(t, "analog_seconds", cfg.timing.analog_seconds);
      read_opt(t, "adc_seconds", cfg.timing.adc_seconds);
      read_opt(t, "sample_rate", cfg.sample_rate);
    }
    if (j.contains("split")) {
      const auto& s = j.at("split");
      reject_unknown(s, "split", {"train", "val", "test"});
      read_opt(s, "train", cfg.split.train);
      read_opt(s, "val", cfg.split.val);
      read_opt(s, "test", cfg.split.test);
    }
    read_opt(j, "seed", cfg.seed);
    read_opt(j, "workers", cfg.workers);
    read_opt(j, "output_dir", cfg.output_dir);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

json config_to_json(const PipelineConfig& cfg) {
  json j;
  j["device"] = {{"g_min", cfg.device.g_min},
                 {"g_max", cfg.device.g_max},
                 {"num_levels", cfg.device.num_levels},
                 {"v_read", cfg.device.v_read},
                 {"programming_sigma", cfg.programming_sigma}};
  j["adc"] = {{"resolution", cfg.adc.resolution},
              {"v_ref", cfg.adc.v_ref},
              {"c_unit", cfg.adc.c_unit},
              {"full_scale_current", cfg.adc.full_scale_current}};
  j["layer"] = {{"kernel_dim", cfg.layer.kernel_dim},     {"in_channels", cfg.layer.in_channels},
                {"out_channels", cfg.layer.out_channels}, {"stride", cfg.layer.stride},
                {"padding", cfg.layer.padding},           {"tile_rows", cfg.layer.tile_rows},
                {"tile_cols", cfg.layer.tile_cols},       {"adcs_per_tile", cfg.layer.adcs_per_tile}};
  j["weights"] = {{"path", cfg.weights.path},
                  {"stddev", cfg.weights.stddev},
                  {"seed", cfg.weights.seed}};
  j["noise"] = {{"levels", cfg.noise_levels}, {"target", target_name(cfg.noise_target)}};
  j["dataset"] = {{"input_dir", cfg.input_dir}, {"image_size", {cfg.image_rows, cfg.image_cols}}};
  j["trace"] = {{"analog_seconds", cfg.timing.analog_seconds},
                {"adc_seconds", cfg.timing.adc_seconds},
                {"sample_rate", cfg.sample_rate}};
  j["split"] = {{"train", cfg.split.train}, {"val", cfg.split.val}, {"test", cfg.split.test}};
  j["seed"] = cfg.seed;
  j["workers"] = cfg.workers;
  j["output_dir"] = cfg.output_dir;
  return j;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError(path.string(), "cannot open config");
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

void save_config(const std::filesystem::path& dir, const PipelineConfig& cfg) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(dir.string(), ec.message());
  const auto path = dir / "config.json";
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError(path.string(), "cannot open for writing");
  os << config_to_json(cfg).dump(2) << '\n';
  if (!os) throw IoError(path.string(), "write failed");
}

device::QuantizedWeights load_weights(const PipelineConfig& cfg) {
  const device::KernelShape shape{cfg.layer.out_channels, cfg.layer.in_channels,
                                  cfg.layer.kernel_dim};
  device::RealWeights w = cfg.weights.path.empty()
                              ? device::gaussian_weights(shape, cfg.weights.stddev, cfg.weights.seed)
                              : weights_from_tensor(read_tensor(cfg.weights.path));
  if (!(w.shape == shape))
    throw ConfigError("weights: file shape does not match the layer geometry");
  return device::quantize_weights(w);
}

sim::CimLayer build_layer(const PipelineConfig& cfg) {
  cfg.validate();
  sim::CimLayer layer = sim::build_layer(load_weights(cfg), cfg.layer, cfg.device, cfg.adc);
  device::apply_programming_variability(layer.tiles, cfg.programming_sigma,
                                        cfg.weights.seed ^ 0x9e3779b97f4a7c15ULL);
  return layer;
}

}  // namespace cimleak::io
