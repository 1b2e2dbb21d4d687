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

// Multi-level RRAM devices and the crossbar weight mapping.
//
// A signed 8-bit weight q is stored on four 4-bit devices. Its magnitude is
// split into the high and low nibble; the sign decides whether a nibble lands
// in the positive or the negative column of the pair:
//
//   column 4*oc + 0 : MSB+     column 4*oc + 2 : LSB+
//   column 4*oc + 1 : MSB-     column 4*oc + 3 : LSB-
//
// so that q = 16 * (MSB+ - MSB-) + (LSB+ - LSB-). Kernel rows follow the
// [in_channel][ky][kx] flattening of the weight tensor.

#ifndef CIMLEAK_DEVICE_MODEL_HPP_
#define CIMLEAK_DEVICE_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cimleak/matrix.hpp"

namespace cimleak::device {

struct DeviceConfig {
  double g_min = 2e-6;   // siemens
  double g_max = 62e-6;  // siemens
  int num_levels = 16;
  double v_read = 0.2;   // volts

  void validate() const;
  double level_step() const { return (g_max - g_min) / (num_levels - 1); }
};

// Linear level spacing on [g_min, g_max]. Throws DomainError for a level
// outside [0, num_levels).
double level_to_conductance(int level, const DeviceConfig& cfg);

struct LayerGeometry {
  std::size_t kernel_dim = 3;
  std::size_t in_channels = 1;
  std::size_t out_channels = 32;
  std::size_t stride = 1;
  std::size_t padding = 1;
  std::size_t tile_rows = 128;
  std::size_t tile_cols = 128;
  std::size_t adcs_per_tile = 4;

  void validate() const;

  // K^2 * C_in crossbar rows per kernel.
  std::size_t kernel_rows() const {
    return kernel_dim * kernel_dim * in_channels;
  }
  // Two polarities times two significances per output channel.
  std::size_t mapped_cols() const { return 4 * out_channels; }

  std::size_t output_rows(std::size_t input_rows) const;
  std::size_t output_cols(std::size_t input_cols) const;
};

struct KernelShape {
  std::size_t out_channels = 0;
  std::size_t in_channels = 0;
  std::size_t kernel_dim = 0;

  std::size_t count() const {
    return out_channels * in_channels * kernel_dim * kernel_dim;
  }
  bool operator==(const KernelShape&) const = default;
};

// Real-valued weights, [C_out][C_in][K][K] row-major.
struct RealWeights {
  KernelShape shape;
  std::vector<double> values;
};

struct QuantizedWeights {
  KernelShape shape;
  std::vector<std::int8_t> values;  // in [-127, 127]
  double scale = 0.0;               // w ~= scale * q
  bool all_zero = false;
};

// Seeded N(0, stddev^2) weights, used when no weight file is supplied.
RealWeights gaussian_weights(const KernelShape& shape, double stddev,
                             std::uint64_t seed);

// Symmetric per-tensor quantization: scale = max|w| / 127, q = round(w/scale)
// clamped to [-127, 127]. An all-zero tensor yields scale 0 and all_zero set.
QuantizedWeights quantize_weights(const RealWeights& weights);

enum class Significance : std::uint8_t { kMsb, kLsb };
enum class Polarity : std::uint8_t { kPositive, kNegative };

struct ColumnRole {
  std::size_t out_channel = 0;
  Significance significance = Significance::kMsb;
  Polarity polarity = Polarity::kPositive;
};

ColumnRole role_of_column(std::size_t global_col);

// One crossbar tile holding a rectangular slice of the mapped weight matrix.
struct ConductanceTile {
  DeviceConfig config;
  Matrix<std::uint8_t> levels;       // [rows x cols] level indices
  Matrix<double> conductances;       // siemens, same shape as levels
  std::vector<double> row_conductance;  // sum over the row's columns
  std::vector<ColumnRole> column_roles;
  std::size_t row_offset = 0;  // first kernel row held by this tile
  std::size_t col_offset = 0;  // first global column held by this tile

  std::size_t rows() const { return levels.rows(); }
  std::size_t cols() const { return levels.cols(); }
};

// Maps quantized weights onto tiles. Tiles are ordered row-major over the
// (row block, column block) grid. Throws ConfigError when the weight shape does
// not match the geometry.
std::vector<ConductanceTile> map_weights(const QuantizedWeights& q,
                                         const LayerGeometry& geom,
                                         const DeviceConfig& cfg);

// Digital readback 16*(MSB+ - MSB-) + (LSB+ - LSB-) for every weight,
// [C_out][C_in][K][K] order.
std::vector<int> readback_weights(const std::vector<ConductanceTile>& tiles,
                                  const LayerGeometry& geom);

// Optional device-to-device programming spread: every conductance is scaled
// by (1 + sigma_rel * N(0,1)), floored at zero. Row sums are refreshed.
void apply_programming_variability(std::vector<ConductanceTile>& tiles,
                                   double sigma_rel, std::uint64_t seed);

}  // namespace cimleak::device

#endif  // CIMLEAK_DEVICE_MODEL_HPP_
