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

// First-layer execution on mapped CIM tiles with 8-bit bit-serial inputs.
//
// Each convolution window is applied one input bit at a time, LSB first. A bit
// consists of an analog phase (the bit-plane drives the word lines, every
// active device dissipates v_read^2 * G) followed by an ADC phase, in which
// each column current is converted and charged against the code energy LUT.
// With adcs_per_tile converters a tile of C columns needs ceil(C / adcs)
// sequential executions; the recorded ADC energy of a bit is the sum over all
// of them.

#ifndef CIMLEAK_CIM_SIM_HPP_
#define CIMLEAK_CIM_SIM_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cimleak/adc_model.hpp"
#include "cimleak/device_model.hpp"

namespace cimleak::sim {

inline constexpr int kInputBits = 8;

// Channel-major 8-bit image, [channels][rows][cols].
struct Image {
  std::size_t channels = 1;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(std::size_t ch, std::size_t r, std::size_t c, std::uint8_t fill = 0)
      : channels(ch), rows(r), cols(c), pixels(ch * r * c, fill) {}

  std::uint8_t& at(std::size_t ch, std::size_t r, std::size_t c) {
    return pixels[(ch * rows + r) * cols + c];
  }
  std::uint8_t at(std::size_t ch, std::size_t r, std::size_t c) const {
    return pixels[(ch * rows + r) * cols + c];
  }
};

struct BitSerialInput {
  std::vector<std::uint8_t> window;  // one entry per kernel row

  // 0/1 vector holding bit i of every window entry.
  std::vector<std::uint8_t> bit_plane(int i) const;
};

// Flattened [in_channel][ky][kx] window for output position (out_row,
// out_col); positions falling into the zero padding read as 0.
BitSerialInput extract_window(const Image& image,
                              const device::LayerGeometry& geom,
                              std::size_t out_row, std::size_t out_col);

// v_read * g_max * tile_rows: the worst-case column current of a full tile.
double default_full_scale_current(const device::DeviceConfig& dev,
                                  const device::LayerGeometry& geom);

// Everything the simulator needs, read-only once built.
struct CimLayer {
  device::LayerGeometry geometry;
  device::DeviceConfig device;
  adc::SarAdcConfig adc;
  adc::AdcEnergyLut lut;
  std::vector<device::ConductanceTile> tiles;
};

// Maps the weights, resolves a zero full_scale_current to the default and
// builds the LUT.
CimLayer build_layer(const device::QuantizedWeights& weights,
                     const device::LayerGeometry& geom,
                     const device::DeviceConfig& dev, adc::SarAdcConfig adc);

// P = v_read^2 * sum over active rows of the row conductance.
double array_bit_power(std::span<const std::uint8_t> bits,
                       const device::ConductanceTile& tile,
                       const device::DeviceConfig& dev);

struct AdcPhase {
  double energy = 0.0;               // joules, all executions of the tile
  std::vector<std::uint32_t> codes;  // one per tile column
};

AdcPhase adc_phase(std::span<const std::uint8_t> bits,
                   const device::ConductanceTile& tile,
                   const device::DeviceConfig& dev,
                   const adc::SarAdcConfig& adc, const adc::AdcEnergyLut& lut);

// Sequential ADC executions needed to convert every column of the tile.
std::size_t adc_executions(const device::ConductanceTile& tile,
                           const device::LayerGeometry& geom);

struct WindowPhases {
  std::array<double, kInputBits> array_power{};  // watts, per input bit
  std::array<double, kInputBits> adc_energy{};   // joules, per input bit
  bool operator==(const WindowPhases&) const = default;
};

struct ExecRecord {
  std::size_t row = 0;
  std::size_t col = 0;
  WindowPhases phases;
  // Digital dot product per output channel rebuilt from the column codes.
  std::vector<std::int64_t> outputs;
  // Only with RunOptions::keep_codes: [bit][tile][tile column].
  std::vector<std::uint32_t> codes;
  bool operator==(const ExecRecord&) const = default;
};

struct RunOptions {
  bool keep_codes = false;
};

ExecRecord run_window(const BitSerialInput& input, const CimLayer& layer,
                      const RunOptions& options = {});

struct RecordGrid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<ExecRecord> records;  // row-major

  const ExecRecord& at(std::size_t r, std::size_t c) const {
    return records[r * cols + c];
  }
  bool operator==(const RecordGrid&) const = default;
};

// Slides the window over the whole image. Work is split across `workers`
// threads (0 = hardware concurrency); each cell is written by exactly one
// worker, so the grid does not depend on the worker count.
RecordGrid run_layer(const Image& image, const CimLayer& layer,
                     std::size_t workers, const RunOptions& options = {});

}  // namespace cimleak::sim

#endif  // CIMLEAK_CIM_SIM_HPP_
