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

#include <fstream>

#include <gtest/gtest.h>

#include "cimleak/errors.hpp"
#include "cimleak/tensor_file.hpp"
#include "oracles/temp_dir.hpp"

namespace cimleak::io {
namespace {

using nlohmann::json;

TEST(PipelineConfig, DefaultsValidate) {
  const PipelineConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(cfg.noise_levels, (std::vector<double>{0.0, 0.05, 0.10, 0.15, 0.20}));
  EXPECT_EQ(cfg.layer.adcs_per_tile, 4u);
  EXPECT_EQ(cfg.adc.resolution, 8);
}

TEST(PipelineConfig, JsonRoundtrip) {
  PipelineConfig cfg;
  cfg.device.g_max = 80e-6;
  cfg.adc.resolution = 10;
  cfg.layer.in_channels = 3;
  cfg.weights.seed = 17;
  cfg.noise_levels = {0.05, 0.1};
  cfg.noise_target = pipeline::NoiseTarget::kTraceSamples;
  cfg.image_rows = 64;
  cfg.image_cols = 32;
  cfg.split = {0.6, 0.2, 0.2};
  cfg.seed = 1234567890123ULL;
  cfg.workers = 3;
  cfg.output_dir = "out";
  const json j = config_to_json(cfg);
  EXPECT_EQ(config_to_json(config_from_json(j)), j);
  EXPECT_EQ(j.at("noise").at("target"), "trace_samples");
  EXPECT_EQ(j.at("dataset").at("image_size"), json::array({64, 32}));
}

TEST(PipelineConfig, MissingKeysKeepDefaults) {
  const auto cfg = config_from_json(json::parse(R"({"adc": {"resolution": 6}})"));
  EXPECT_EQ(cfg.adc.resolution, 6);
  EXPECT_EQ(cfg.device.num_levels, 16);
  EXPECT_EQ(cfg.seed, 7u);
}

TEST(PipelineConfig, UnknownKeysRejected) {
  EXPECT_THROW(config_from_json(json::parse(R"({"sead": 1})")), ConfigError);
  EXPECT_THROW(config_from_json(json::parse(R"({"adc": {"bits": 8}})")), ConfigError);
  EXPECT_THROW(config_from_json(json::parse(R"({"layer": 3})")), ConfigError);
}

TEST(PipelineConfig, InvalidValuesRejected) {
  EXPECT_THROW(config_from_json(json::parse(R"({"split": {"train": 0.9}})")), ConfigError);
  EXPECT_THROW(config_from_json(json::parse(R"({"adc": {"resolution": 0}})")), ConfigError);
  EXPECT_THROW(config_from_json(json::parse(R"({"adc": {"resolution": 24}})")), ConfigError);
  EXPECT_THROW(config_from_json(json::parse(R"({"layer": {"adcs_per_tile": 5}})")), ConfigError);
  EXPECT_THROW(config_from_json(json::parse(R"({"noise": {"levels": [0.1, -0.1]}})")), ConfigError);
  EXPECT_THROW(config_from_json(json::parse(R"({"noise": {"target": "weights"}})")), ConfigError);
  EXPECT_THROW(config_from_json(json::parse(R"({"device": {"g_min": "low"}})")), ConfigError);
  EXPECT_THROW(config_from_json(json::parse(R"({"trace": {"sample_rate": 0}})")), ConfigError);
  EXPECT_THROW(config_from_json(json::parse(R"({"dataset": {"image_size": [2, 2]},
                                                "layer": {"padding": 0}})")),
               ConfigError);
}

TEST(PipelineConfig, SaveWritesExactSerialization) {
  testing_support::TempDir dir;
  PipelineConfig cfg;
  cfg.seed = 99;
  save_config(dir.path() / "run", cfg);
  std::ifstream is(dir.path() / "run" / "config.json");
  const json j = json::parse(is);
  EXPECT_EQ(j, config_to_json(cfg));
  EXPECT_EQ(config_to_json(load_config(dir.path() / "run" / "config.json")), j);
  EXPECT_THROW(load_config(dir / "absent.json"), IoError);
  std::ofstream(dir / "broken.json") << "{ nope";
  EXPECT_THROW(load_config(dir / "broken.json"), ConfigError);
}

TEST(PipelineConfig, SyntheticWeightsAreSeeded) {
  PipelineConfig cfg;
  const auto a = load_weights(cfg);
  EXPECT_EQ(a.values, load_weights(cfg).values);
  EXPECT_EQ(a.shape, (device::KernelShape{32, 1, 3}));
  cfg.weights.seed = 2;
  EXPECT_NE(a.values, load_weights(cfg).values);
}

TEST(PipelineConfig, WeightsFromFile) {
  testing_support::TempDir dir;
  std::vector<float> w(32 * 9);
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = static_cast<float>(i % 7) - 3.0f;
  write_tensor(dir / "w.cimt", Tensor({32, 1, 3, 3}, w));
  PipelineConfig cfg;
  cfg.weights.path = (dir / "w.cimt").string();
  const auto q = load_weights(cfg);
  EXPECT_EQ(q.values[6], 127);
  EXPECT_EQ(q.values[0], -127);
  EXPECT_EQ(q.values[3], 0);
  write_tensor(dir / "wrong.cimt", Tensor({16, 1, 3, 3}, std::vector<float>(144, 1.0f)));
  cfg.weights.path = (dir / "wrong.cimt").string();
  EXPECT_THROW(load_weights(cfg), ConfigError);
}

TEST(PipelineConfig, BuildLayerAppliesVariability) {
  PipelineConfig cfg;
  const auto clean = build_layer(cfg);
  EXPECT_DOUBLE_EQ(clean.adc.full_scale_current, 0.2 * 62e-6 * 128);
  cfg.programming_sigma = 0.05;
  const auto spread = build_layer(cfg);
  EXPECT_NE(spread.tiles[0].conductances, clean.tiles[0].conductances);
  EXPECT_EQ(spread.tiles[0].levels, clean.tiles[0].levels);
  EXPECT_EQ(build_layer(cfg).tiles[0].conductances, spread.tiles[0].conductances);
}

}  // namespace
}  // namespace cimleak::io
