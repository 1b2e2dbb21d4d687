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

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "cimleak/errors.hpp"

namespace cimleak::device {

void DeviceConfig::validate() const {
  if (!(g_min >= 0.0) || !(g_max > g_min))
    throw ConfigError("device: require g_max > g_min >= 0");
  if (num_levels < 2) throw ConfigError("device: num_levels must be >= 2");
  if (num_levels > 256)
    throw ConfigError("device: num_levels must fit an 8-bit level index");
  if (!(v_read > 0.0)) throw ConfigError("device: v_read must be > 0");
}

double level_to_conductance(int level, const DeviceConfig& cfg) {
  if (level < 0 || level >= cfg.num_levels)
    throw DomainError("level " + std::to_string(level) + " outside [0, " +
                      std::to_string(cfg.num_levels) + ")");
  // Written as a single product so both endpoints are exact.
  return cfg.g_min + (cfg.g_max - cfg.g_min) * level / (cfg.num_levels - 1);
}

void LayerGeometry::validate() const {
  if (kernel_dim == 0 || in_channels == 0 || out_channels == 0)
    throw ConfigError("layer: kernel_dim, in_channels, out_channels must be > 0");
  if (stride == 0) throw ConfigError("layer: stride must be > 0");
  if (tile_rows == 0 || tile_cols == 0 || adcs_per_tile == 0)
    throw ConfigError("layer: tile dimensions and ADC count must be > 0");
  if (tile_cols % adcs_per_tile != 0)
    throw ConfigError("layer: tile_cols must be divisible by adcs_per_tile");
  if (tile_cols % 4 != 0)
    throw ConfigError(
        "layer: tile_cols must hold whole MSB+/MSB-/LSB+/LSB- column groups");
  if (padding >= kernel_dim)
    throw ConfigError("layer: padding must be smaller than kernel_dim");
}

std::size_t LayerGeometry::output_rows(std::size_t input_rows) const {
  const std::size_t padded = input_rows + 2 * padding;
  return padded < kernel_dim ? 0 : (padded - kernel_dim) / stride + 1;
}

std::size_t LayerGeometry::output_cols(std::size_t input_cols) const {
  return output_rows(input_cols);
}

RealWeights gaussian_weights(const KernelShape& shape, double stddev,
                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, stddev);
  RealWeights w{shape, std::vector<double>(shape.count())};
  for (double& v : w.values) v = dist(rng);
  return w;
}

QuantizedWeights quantize_weights(const RealWeights& weights) {
  if (weights.values.size() != weights.shape.count())
    throw ShapeError("weight tensor size does not match its shape");
  QuantizedWeights q;
  q.shape = weights.shape;
  q.values.assign(weights.values.size(), 0);

  double max_abs = 0.0;
  for (double w : weights.values) {
    if (!std::isfinite(w)) throw DomainError("non-finite weight");
    max_abs = std::max(max_abs, std::abs(w));
  }
  if (max_abs == 0.0) {
    q.all_zero = true;
    return q;
  }
  q.scale = max_abs / 127.0;
  for (std::size_t i = 0; i < weights.values.size(); ++i) {
    const double r = std::round(weights.values[i] / q.scale);
    q.values[i] = static_cast<std::int8_t>(std::clamp(r, -127.0, 127.0));
  }
  return q;
}

ColumnRole role_of_column(std::size_t global_col) {
  ColumnRole role;
  role.out_channel = global_col / 4;
  const std::size_t slot = global_col % 4;
  role.significance = slot < 2 ? Significance::kMsb : Significance::kLsb;
  role.polarity = slot % 2 == 0 ? Polarity::kPositive : Polarity::kNegative;
  return role;
}

namespace {

void refresh_row_sums(ConductanceTile& tile) {
  tile.row_conductance.assign(tile.rows(), 0.0);
  for (std::size_t r = 0; r < tile.rows(); ++r) {
    double sum = 0.0;
    for (double g : tile.conductances.row(r)) sum += g;
    tile.row_conductance[r] = sum;
  }
}

}  // namespace

std::vector<ConductanceTile> map_weights(const QuantizedWeights& q,
                                         const LayerGeometry& geom,
                                         const DeviceConfig& cfg) {
  geom.validate();
  cfg.validate();
  if (cfg.num_levels < 16)
    throw ConfigError("device: nibble mapping needs at least 16 levels");
  const KernelShape expected{geom.out_channels, geom.in_channels,
                             geom.kernel_dim};
  if (!(q.shape == expected) || q.values.size() != expected.count())
    throw ConfigError("weight tensor shape does not match layer geometry");

  const std::size_t rows = geom.kernel_rows();
  const std::size_t cols = geom.mapped_cols();

  // Full mapped level matrix first, then slice into tiles.
  Matrix<std::uint8_t> levels(rows, cols, 0);
  for (std::size_t oc = 0; oc < geom.out_channels; ++oc) {
    for (std::size_t r = 0; r < rows; ++r) {
      const int w = q.values[oc * rows + r];
      if (w < -127 || w > 127) throw DomainError("weight outside [-127, 127]");
      const unsigned mag = static_cast<unsigned>(w < 0 ? -w : w);
      const std::size_t neg = w < 0 ? 1 : 0;
      levels(r, 4 * oc + 0 + neg) = static_cast<std::uint8_t>(mag >> 4);
      levels(r, 4 * oc + 2 + neg) = static_cast<std::uint8_t>(mag & 0xF);
    }
  }

  std::vector<ConductanceTile> tiles;
  for (std::size_t r0 = 0; r0 < rows; r0 += geom.tile_rows) {
    for (std::size_t c0 = 0; c0 < cols; c0 += geom.tile_cols) {
      const std::size_t nr = std::min(geom.tile_rows, rows - r0);
      const std::size_t nc = std::min(geom.tile_cols, cols - c0);
      ConductanceTile tile;
      tile.config = cfg;
      tile.row_offset = r0;
      tile.col_offset = c0;
      tile.levels = Matrix<std::uint8_t>(nr, nc);
      tile.conductances = Matrix<double>(nr, nc);
      for (std::size_t r = 0; r < nr; ++r) {
        for (std::size_t c = 0; c < nc; ++c) {
          const std::uint8_t lv = levels(r0 + r, c0 + c);
          tile.levels(r, c) = lv;
          tile.conductances(r, c) = level_to_conductance(lv, cfg);
        }
      }
      tile.column_roles.reserve(nc);
      for (std::size_t c = 0; c < nc; ++c)
        tile.column_roles.push_back(role_of_column(c0 + c));
      refresh_row_sums(tile);
      tiles.push_back(std::move(tile));
    }
  }
  return tiles;
}

std::vector<int> readback_weights(const std::vector<ConductanceTile>& tiles,
                                  const LayerGeometry& geom) {
  const std::size_t rows = geom.kernel_rows();
  std::vector<int> out(geom.out_channels * rows, 0);
  for (const auto& tile : tiles) {
    for (std::size_t r = 0; r < tile.rows(); ++r) {
      for (std::size_t c = 0; c < tile.cols(); ++c) {
        const ColumnRole& role = tile.column_roles[c];
        int v = tile.levels(r, c);
        if (role.significance == Significance::kMsb) v *= 16;
        if (role.polarity == Polarity::kNegative) v = -v;
        out[role.out_channel * rows + tile.row_offset + r] += v;
      }
    }
  }
  return out;
}

void apply_programming_variability(std::vector<ConductanceTile>& tiles,
                                   double sigma_rel, std::uint64_t seed) {
  if (!(sigma_rel >= 0.0)) throw ConfigError("variability sigma must be >= 0");
  if (sigma_rel == 0.0) return;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (auto& tile : tiles) {
    for (double& g : tile.conductances.data())
      g = std::max(0.0, g * (1.0 + sigma_rel * dist(rng)));
    refresh_row_sums(tile);
  }
}

}  // namespace cimleak::device
