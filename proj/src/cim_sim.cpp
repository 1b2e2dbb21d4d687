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

#include "cimleak/cim_sim.hpp"

#include <algorithm>
#include <cmath>

#include "cimleak/detail/parallel.hpp"
#include "cimleak/errors.hpp"

namespace cimleak::sim {

using device::ConductanceTile;
using device::Polarity;
using device::Significance;

std::vector<std::uint8_t> BitSerialInput::bit_plane(int i) const {
  if (i < 0 || i >= kInputBits) throw DomainError("input bit index outside [0, 8)");
  std::vector<std::uint8_t> plane(window.size());
  for (std::size_t r = 0; r < window.size(); ++r)
    plane[r] = static_cast<std::uint8_t>((window[r] >> i) & 1u);
  return plane;
}

BitSerialInput extract_window(const Image& image,
                              const device::LayerGeometry& geom,
                              std::size_t out_row, std::size_t out_col) {
  if (image.channels != geom.in_channels)
    throw ShapeError("image channels do not match layer in_channels");
  const std::size_t k = geom.kernel_dim;
  BitSerialInput in;
  in.window.assign(geom.kernel_rows(), 0);
  // Signed arithmetic for the padded origin.
  const auto r0 = static_cast<std::ptrdiff_t>(out_row * geom.stride) -
                  static_cast<std::ptrdiff_t>(geom.padding);
  const auto c0 = static_cast<std::ptrdiff_t>(out_col * geom.stride) -
                  static_cast<std::ptrdiff_t>(geom.padding);
  const auto rows = static_cast<std::ptrdiff_t>(image.rows);
  const auto cols = static_cast<std::ptrdiff_t>(image.cols);
  std::size_t idx = 0;
  for (std::size_t ch = 0; ch < geom.in_channels; ++ch) {
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx, ++idx) {
        const std::ptrdiff_t r = r0 + static_cast<std::ptrdiff_t>(ky);
        const std::ptrdiff_t c = c0 + static_cast<std::ptrdiff_t>(kx);
        if (r >= 0 && r < rows && c >= 0 && c < cols)
          in.window[idx] = image.at(ch, static_cast<std::size_t>(r),
                                    static_cast<std::size_t>(c));
      }
    }
  }
  return in;
}

double default_full_scale_current(const device::DeviceConfig& dev,
                                  const device::LayerGeometry& geom) {
  return dev.v_read * dev.g_max * static_cast<double>(geom.tile_rows);
}

CimLayer build_layer(const device::QuantizedWeights& weights,
                     const device::LayerGeometry& geom,
                     const device::DeviceConfig& dev, adc::SarAdcConfig adc) {
  if (adc.full_scale_current == 0.0)
    adc.full_scale_current = default_full_scale_current(dev, geom);
  adc.validate();
  CimLayer layer;
  layer.geometry = geom;
  layer.device = dev;
  layer.adc = adc;
  layer.tiles = device::map_weights(weights, geom, dev);
  layer.lut = adc::build_energy_lut(adc);
  return layer;
}

double array_bit_power(std::span<const std::uint8_t> bits,
                       const ConductanceTile& tile,
                       const device::DeviceConfig& dev) {
  if (bits.size() != tile.rows())
    throw ShapeError("bit vector length does not match tile rows");
  double g = 0.0;
  for (std::size_t r = 0; r < bits.size(); ++r)
    if (bits[r]) g += tile.row_conductance[r];
  return dev.v_read * dev.v_read * g;
}

AdcPhase adc_phase(std::span<const std::uint8_t> bits,
                   const ConductanceTile& tile,
                   const device::DeviceConfig& dev,
                   const adc::SarAdcConfig& adc, const adc::AdcEnergyLut& lut) {
  if (bits.size() != tile.rows())
    throw ShapeError("bit vector length does not match tile rows");
  if (lut.size() != adc.num_codes())
    throw ShapeError("energy LUT size does not match ADC resolution");
  std::vector<double> g_col(tile.cols(), 0.0);
  for (std::size_t r = 0; r < bits.size(); ++r) {
    if (!bits[r]) continue;
    const auto row = tile.conductances.row(r);
    for (std::size_t c = 0; c < g_col.size(); ++c) g_col[c] += row[c];
  }
  AdcPhase out;
  out.codes.resize(tile.cols());
  for (std::size_t c = 0; c < g_col.size(); ++c) {
    out.codes[c] = adc::current_to_code(dev.v_read * g_col[c], adc);
    out.energy += lut[out.codes[c]];
  }
  return out;
}

std::size_t adc_executions(const ConductanceTile& tile,
                           const device::LayerGeometry& geom) {
  return (tile.cols() + geom.adcs_per_tile - 1) / geom.adcs_per_tile;
}

namespace {

// Per-worker scratch so the hot loop does not allocate.
class WindowKernel {
 public:
  explicit WindowKernel(const CimLayer& layer) : layer_(layer) {
    std::size_t max_cols = 0;
    for (const auto& t : layer.tiles) max_cols = std::max(max_cols, t.cols());
    g_col_.resize(max_cols);
  }

  void run(std::span<const std::uint8_t> window, const RunOptions& options,
           ExecRecord& rec) {
    const auto& geom = layer_.geometry;
    if (window.size() != geom.kernel_rows())
      throw ShapeError("window length does not match layer kernel rows");
    const auto& dev = layer_.device;
    const auto& adc = layer_.adc;
    const double v2 = dev.v_read * dev.v_read;
    const double lsb = adc.current_lsb();
    const double step = dev.level_step();

    rec.outputs.assign(geom.out_channels, 0);
    rec.codes.clear();
    if (options.keep_codes) {
      std::size_t total = 0;
      for (const auto& t : layer_.tiles) total += t.cols();
      rec.codes.reserve(total * kInputBits);
    }

    for (int bit = 0; bit < kInputBits; ++bit) {
      double g_active = 0.0;
      double energy = 0.0;
      for (const auto& tile : layer_.tiles) {
        std::fill(g_col_.begin(), g_col_.begin() + tile.cols(), 0.0);
        std::size_t active = 0;
        for (std::size_t r = 0; r < tile.rows(); ++r) {
          if (!((window[tile.row_offset + r] >> bit) & 1u)) continue;
          ++active;
          g_active += tile.row_conductance[r];
          const auto row = tile.conductances.row(r);
          for (std::size_t c = 0; c < tile.cols(); ++c) g_col_[c] += row[c];
        }
        // Every active device carries at least g_min; the digital side removes
        // that floor before rounding the code back to a level sum.
        const double floor_current = dev.v_read * dev.g_min * static_cast<double>(active);
        for (std::size_t c = 0; c < tile.cols(); ++c) {
          const std::uint32_t code =
              adc::current_to_code(dev.v_read * g_col_[c], adc);
          energy += layer_.lut[code];
          if (options.keep_codes) rec.codes.push_back(code);

          const double i_est = (code + 0.5) * lsb;
          const auto level_sum = static_cast<std::int64_t>(
              std::llround((i_est - floor_current) / (dev.v_read * step)));
          const auto& role = tile.column_roles[c];
          std::int64_t v = level_sum * (std::int64_t{1} << bit);
          if (role.significance == Significance::kMsb) v *= 16;
          if (role.polarity == Polarity::kNegative) v = -v;
          rec.outputs[role.out_channel] += v;
        }
      }
      rec.phases.array_power[bit] = v2 * g_active;
      rec.phases.adc_energy[bit] = energy;
    }
  }

 private:
  const CimLayer& layer_;
  std::vector<double> g_col_;
};

}  // namespace

ExecRecord run_window(const BitSerialInput& input, const CimLayer& layer,
                      const RunOptions& options) {
  ExecRecord rec;
  WindowKernel(layer).run(input.window, options, rec);
  return rec;
}

RecordGrid run_layer(const Image& image, const CimLayer& layer,
                     std::size_t workers, const RunOptions& options) {
  const auto& geom = layer.geometry;
  if (image.channels != geom.in_channels)
    throw ShapeError("image channels do not match layer in_channels");
  if (image.pixels.size() != image.channels * image.rows * image.cols)
    throw ShapeError("image pixel buffer does not match its dimensions");
  RecordGrid grid;
  grid.rows = geom.output_rows(image.rows);
  grid.cols = geom.output_cols(image.cols);
  if (grid.rows == 0 || grid.cols == 0)
    throw ConfigError("layer geometry produces an empty output feature map");
  grid.records.resize(grid.rows * grid.cols);

  detail::parallel_for(grid.rows, workers, [&] {
    return [&, kernel = WindowKernel(layer)](std::size_t r) mutable {
      for (std::size_t c = 0; c < grid.cols; ++c) {
        ExecRecord& rec = grid.records[r * grid.cols + c];
        rec.row = r;
        rec.col = c;
        const BitSerialInput in = extract_window(image, geom, r, c);
        kernel.run(in.window, options, rec);
      }
    };
  });
  return grid;
}

}  // namespace cimleak::sim
