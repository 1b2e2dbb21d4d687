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

#include "cimleak/device_model.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "cimleak/errors.hpp"

namespace cimleak::device {
namespace {

QuantizedWeights single_weight(int q) {
  QuantizedWeights w;
  w.shape = {1, 1, 1};
  w.values = {static_cast<std::int8_t>(q)};
  w.scale = 1.0;
  return w;
}

LayerGeometry pointwise_geometry() {
  LayerGeometry g;
  g.kernel_dim = 1;
  g.in_channels = 1;
  g.out_channels = 1;
  g.padding = 0;
  return g;
}

TEST(LevelToConductance, Endpoints) {
  const DeviceConfig cfg;
  EXPECT_EQ(level_to_conductance(0, cfg), 2e-6);
  EXPECT_EQ(level_to_conductance(15, cfg), 62e-6);
}

TEST(LevelToConductance, MidLevelHandComputed) {
  // 2 uS + 8 * (60 uS / 15) = 34 uS
  EXPECT_NEAR(level_to_conductance(8, DeviceConfig{}), 34e-6, 1e-18);
}

TEST(LevelToConductance, StrictlyIncreasing) {
  DeviceConfig cfg;
  cfg.num_levels = 64;
  for (int l = 1; l < cfg.num_levels; ++l)
    EXPECT_LT(level_to_conductance(l - 1, cfg), level_to_conductance(l, cfg));
}

TEST(LevelToConductance, OutOfRangeThrows) {
  const DeviceConfig cfg;
  EXPECT_THROW(level_to_conductance(-1, cfg), DomainError);
  EXPECT_THROW(level_to_conductance(16, cfg), DomainError);
}

TEST(DeviceConfig, Validation) {
  DeviceConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.g_max = cfg.g_min;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.g_min = -1e-6;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.num_levels = 1;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.v_read = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(LayerGeometry, RowsAndColumns) {
  LayerGeometry g;
  g.kernel_dim = 3;
  g.in_channels = 3;
  g.out_channels = 16;
  EXPECT_EQ(g.kernel_rows(), 27u);
  EXPECT_EQ(g.mapped_cols(), 64u);
}

TEST(LayerGeometry, OutputShape) {
  LayerGeometry g;
  EXPECT_EQ(g.output_rows(256), 256u);
  g.padding = 0;
  EXPECT_EQ(g.output_rows(4), 2u);
  g.stride = 2;
  EXPECT_EQ(g.output_rows(7), 3u);
  EXPECT_EQ(g.output_rows(2), 0u);
}

TEST(LayerGeometry, RejectsAdcCountNotDividingColumns) {
  LayerGeometry g;
  g.adcs_per_tile = 3;
  EXPECT_THROW(g.validate(), ConfigError);
  g.adcs_per_tile = 4;
  g.tile_cols = 130;
  EXPECT_THROW(g.validate(), ConfigError);
}

TEST(QuantizeWeights, AllZero) {
  RealWeights w{{1, 1, 3}, std::vector<double>(9, 0.0)};
  const auto q = quantize_weights(w);
  EXPECT_TRUE(q.all_zero);
  EXPECT_EQ(q.scale, 0.0);
  for (auto v : q.values) EXPECT_EQ(v, 0);
}

TEST(QuantizeWeights, MaxMapsTo127) {
  RealWeights w{{1, 1, 1}, {1.27}};
  const auto q = quantize_weights(w);
  EXPECT_EQ(q.values[0], 127);
  EXPECT_NEAR(q.scale, 0.01, 1e-15);
}

TEST(QuantizeWeights, RoundingErrorAtMostHalf) {
  const auto w = gaussian_weights({32, 3, 3}, 0.3, 99);
  const auto q = quantize_weights(w);
  ASSERT_FALSE(q.all_zero);
  for (std::size_t i = 0; i < w.values.size(); ++i) {
    EXPECT_LE(std::abs(w.values[i] / q.scale - q.values[i]), 0.5 + 1e-12);
    EXPECT_LE(std::abs(int{q.values[i]}), 127);
  }
}

TEST(QuantizeWeights, RejectsNonFinite) {
  RealWeights w{{1, 1, 1}, {std::nan("")}};
  EXPECT_THROW(quantize_weights(w), DomainError);
}

TEST(GaussianWeights, Seeded) {
  EXPECT_EQ(gaussian_weights({4, 1, 3}, 0.1, 5).values,
            gaussian_weights({4, 1, 3}, 0.1, 5).values);
  EXPECT_NE(gaussian_weights({4, 1, 3}, 0.1, 5).values,
            gaussian_weights({4, 1, 3}, 0.1, 6).values);
}

TEST(MapWeights, Plus127) {
  const auto tiles = map_weights(single_weight(127), pointwise_geometry(), DeviceConfig{});
  ASSERT_EQ(tiles.size(), 1u);
  const auto& lv = tiles[0].levels;
  EXPECT_EQ(lv(0, 0), 7);   // MSB+
  EXPECT_EQ(lv(0, 1), 0);   // MSB-
  EXPECT_EQ(lv(0, 2), 15);  // LSB+
  EXPECT_EQ(lv(0, 3), 0);   // LSB-
}

TEST(MapWeights, MinusOne) {
  const auto tiles = map_weights(single_weight(-1), pointwise_geometry(), DeviceConfig{});
  const auto& lv = tiles[0].levels;
  EXPECT_EQ(lv(0, 0), 0);
  EXPECT_EQ(lv(0, 1), 0);
  EXPECT_EQ(lv(0, 2), 0);
  EXPECT_EQ(lv(0, 3), 1);
}

TEST(MapWeights, ZeroWeightSitsAtGmin) {
  const DeviceConfig cfg;
  const auto tiles = map_weights(single_weight(0), pointwise_geometry(), cfg);
  for (std::size_t c = 0; c < 4; ++c) {
    EXPECT_EQ(tiles[0].levels(0, c), 0);
    EXPECT_EQ(tiles[0].conductances(0, c), cfg.g_min);
  }
}

TEST(MapWeights, ExhaustiveRoundtripAndPolarityExclusivity) {
  for (int q = -127; q <= 127; ++q) {
    const auto geom = pointwise_geometry();
    const auto tiles = map_weights(single_weight(q), geom, DeviceConfig{});
    EXPECT_EQ(readback_weights(tiles, geom)[0], q);
    const auto& lv = tiles[0].levels;
    for (std::size_t sig : {0u, 2u}) {
      const bool pos = lv(0, sig) != 0;
      const bool neg = lv(0, sig + 1) != 0;
      EXPECT_FALSE(pos && neg) << "q=" << q;
      if (q > 0) { EXPECT_FALSE(neg); }
      if (q < 0) { EXPECT_FALSE(pos); }
    }
    if (q == 0)
      for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(lv(0, c), 0);
    else
      EXPECT_TRUE(lv(0, 0) || lv(0, 1) || lv(0, 2) || lv(0, 3));
  }
}

TEST(MapWeights, RandomTensorRoundtripAndShape) {
  LayerGeometry geom;
  geom.in_channels = 2;
  geom.out_channels = 24;
  const auto q = quantize_weights(gaussian_weights({24, 2, 3}, 1.0, 3));
  const auto tiles = map_weights(q, geom, DeviceConfig{});
  ASSERT_EQ(tiles.size(), 1u);
  EXPECT_EQ(tiles[0].rows(), 18u);
  EXPECT_EQ(tiles[0].cols(), 96u);
  const auto back = readback_weights(tiles, geom);
  for (std::size_t i = 0; i < back.size(); ++i) EXPECT_EQ(back[i], q.values[i]);
  for (auto lv : tiles[0].levels.data()) EXPECT_LT(lv, 16);
}

TEST(MapWeights, SplitsAcrossTilesRowMajor) {
  LayerGeometry geom;
  geom.in_channels = 4;     // 36 kernel rows
  geom.out_channels = 12;   // 48 columns
  geom.tile_rows = 16;
  geom.tile_cols = 32;
  const auto q = quantize_weights(gaussian_weights({12, 4, 3}, 1.0, 11));
  const auto tiles = map_weights(q, geom, DeviceConfig{});
  ASSERT_EQ(tiles.size(), 6u);  // 3 row blocks x 2 column blocks
  EXPECT_EQ(tiles[0].row_offset, 0u);
  EXPECT_EQ(tiles[0].col_offset, 0u);
  EXPECT_EQ(tiles[1].row_offset, 0u);
  EXPECT_EQ(tiles[1].col_offset, 32u);
  EXPECT_EQ(tiles[1].cols(), 16u);
  EXPECT_EQ(tiles[4].row_offset, 32u);
  EXPECT_EQ(tiles[4].rows(), 4u);
  const auto back = readback_weights(tiles, geom);
  for (std::size_t i = 0; i < back.size(); ++i) EXPECT_EQ(back[i], q.values[i]);
}

TEST(MapWeights, ColumnRoles) {
  const auto r = role_of_column(4 * 5 + 3);
  EXPECT_EQ(r.out_channel, 5u);
  EXPECT_EQ(r.significance, Significance::kLsb);
  EXPECT_EQ(r.polarity, Polarity::kNegative);
  const auto m = role_of_column(4 * 2 + 0);
  EXPECT_EQ(m.significance, Significance::kMsb);
  EXPECT_EQ(m.polarity, Polarity::kPositive);
}

TEST(MapWeights, RowConductanceSums) {
  const auto q = quantize_weights(gaussian_weights({32, 1, 3}, 1.0, 8));
  const auto tiles = map_weights(q, LayerGeometry{}, DeviceConfig{});
  const auto& t = tiles[0];
  for (std::size_t r = 0; r < t.rows(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < t.cols(); ++c) s += t.conductances(r, c);
    EXPECT_DOUBLE_EQ(t.row_conductance[r], s);
  }
}

TEST(MapWeights, ShapeMismatchIsConfigError) {
  auto w = single_weight(3);
  LayerGeometry geom;  // expects 32 x 1 x 3 x 3
  EXPECT_THROW(map_weights(w, geom, DeviceConfig{}), ConfigError);
}

TEST(MapWeights, NeedsSixteenLevels) {
  DeviceConfig cfg;
  cfg.num_levels = 8;
  EXPECT_THROW(map_weights(single_weight(3), pointwise_geometry(), cfg), ConfigError);
}

TEST(ProgrammingVariability, ZeroSigmaIsIdentity) {
  auto tiles = map_weights(single_weight(77), pointwise_geometry(), DeviceConfig{});
  const auto before = tiles[0].conductances;
  apply_programming_variability(tiles, 0.0, 1);
  EXPECT_EQ(tiles[0].conductances, before);
}

TEST(ProgrammingVariability, PerturbsAndRefreshesRowSums) {
  const auto q = quantize_weights(gaussian_weights({32, 1, 3}, 1.0, 8));
  auto tiles = map_weights(q, LayerGeometry{}, DeviceConfig{});
  const auto before = tiles[0].conductances;
  apply_programming_variability(tiles, 0.05, 1);
  EXPECT_NE(tiles[0].conductances, before);
  double s = 0.0;
  for (double g : tiles[0].conductances.row(0)) s += g;
  EXPECT_DOUBLE_EQ(tiles[0].row_conductance[0], s);
  // levels are untouched
  EXPECT_EQ(readback_weights(tiles, LayerGeometry{}),
            std::vector<int>(q.values.begin(), q.values.end()));
}

}  // namespace
}  // namespace cimleak::device
