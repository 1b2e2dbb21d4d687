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

#include "cimleak/trace_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "cimleak/errors.hpp"

namespace cimleak::pipeline {

using sim::kInputBits;
using sim::Phase;

namespace {

// Independent stream per (seed, stream) pair.
std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32), stream};
  std::mt19937_64 rng(seq);
  return rng();
}

}  // namespace

sim::PhaseGrid segment_trace(const sim::PowerTrace& trace) {
  if (!(trace.sample_rate > 0.0)) throw FormatError("trace: sample rate must be > 0");
  sim::PhaseGrid grid;
  grid.rows = trace.grid_rows;
  grid.cols = trace.grid_cols;
  grid.cells.assign(grid.rows * grid.cols, {});
  // One flag per (window, bit, phase).
  std::vector<std::uint8_t> seen(grid.cells.size() * kInputBits * 2, 0);

  for (const auto& s : trace.segments) {
    if (s.row >= grid.rows || s.col >= grid.cols || s.bit >= kInputBits)
      throw FormatError("trace: segment outside the window grid");
    if (s.length == 0) throw FormatError("trace: empty segment");
    if (s.start > trace.samples.size() || s.length > trace.samples.size() - s.start)
      throw FormatError("trace: segment runs past the end of the samples (truncated?)");
    const std::size_t cell = std::size_t{s.row} * grid.cols + s.col;
    auto& flag = seen[(cell * kInputBits + s.bit) * 2 + static_cast<std::size_t>(s.phase)];
    if (flag) throw FormatError("trace: duplicate segment marker");
    flag = 1;

    // Extended precision keeps a constant segment's sum exact.
    long double sum = 0.0L;
    for (std::uint64_t i = s.start; i < s.start + s.length; ++i) sum += trace.samples[i];
    auto& phases = grid.cells[cell];
    if (s.phase == Phase::kAnalog) {
      phases.array_power[s.bit] = static_cast<double>(sum / static_cast<long double>(s.length));
    } else {
      phases.adc_energy[s.bit] =
          static_cast<double>(sum / static_cast<long double>(trace.sample_rate));
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end())
    throw FormatError("trace: missing segment markers for some windows");
  return grid;
}

double weighted_sum(std::span<const double> per_bit) {
  if (per_bit.size() != kInputBits)
    throw ShapeError("weighted_sum expects exactly 8 per-bit values, got " +
                     std::to_string(per_bit.size()));
  double sum = 0.0;
  for (int i = 0; i < kInputBits; ++i) sum += std::ldexp(per_bit[i], i);
  return sum;
}

PowerFeatureMatrices assemble_features(const sim::PhaseGrid& phases) {
  if (phases.cells.size() != phases.rows * phases.cols || phases.cells.empty())
    throw FormatError("feature assembly: phase grid is incomplete");
  PowerFeatureMatrices pf{Matrix<double>(phases.rows, phases.cols),
                          Matrix<double>(phases.rows, phases.cols)};
  for (std::size_t r = 0; r < phases.rows; ++r) {
    for (std::size_t c = 0; c < phases.cols; ++c) {
      const auto& cell = phases.at(r, c);
      pf.array_pf(r, c) = weighted_sum(cell.array_power);
      pf.adc_pf(r, c) = weighted_sum(cell.adc_energy);
    }
  }
  return pf;
}

PowerFeatureMatrices assemble_features(const sim::RecordGrid& records) {
  if (records.records.size() != records.rows * records.cols || records.records.empty())
    throw FormatError("feature assembly: record grid is missing windows");
  sim::PhaseGrid phases{records.rows, records.cols, {}};
  phases.cells.reserve(records.records.size());
  for (std::size_t i = 0; i < records.records.size(); ++i) {
    const auto& rec = records.records[i];
    if (rec.row != i / records.cols || rec.col != i % records.cols)
      throw FormatError("feature assembly: missing window (" +
                        std::to_string(i / records.cols) + ", " +
                        std::to_string(i % records.cols) + ")");
    phases.cells.push_back(rec.phases);
  }
  return assemble_features(phases);
}

Normalized8 normalize_8bit(const Matrix<double>& pf) {
  Normalized8 out;
  out.values = Matrix<std::uint8_t>(pf.rows(), pf.cols(), 0);
  if (pf.empty()) {
    out.degenerate = true;
    return out;
  }
  const auto [lo, hi] = std::minmax_element(pf.data().begin(), pf.data().end());
  out.min = *lo;
  out.max = *hi;
  if (!(out.max > out.min)) {
    out.degenerate = true;
    return out;
  }
  const double range = out.max - out.min;
  auto src = pf.data();
  auto dst = out.values.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double q = std::floor((src[i] - out.min) * 255.0 / range);
    dst[i] = static_cast<std::uint8_t>(std::clamp(q, 0.0, 255.0));
  }
  return out;
}

Matrix<double> denormalize_8bit(const Normalized8& n) {
  Matrix<double> out(n.values.rows(), n.values.cols(), n.min);
  if (n.degenerate) return out;
  const double step = (n.max - n.min) / 255.0;
  auto src = n.values.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = n.min + src[i] * step;
  return out;
}

void NoiseConfig::validate() const {
  if (!(level >= 0.0)) throw ConfigError("noise level must be >= 0");
}

Matrix<double> inject_noise(const Matrix<double>& m, double level,
                            std::uint64_t seed) {
  if (!(level >= 0.0)) throw ConfigError("noise level must be >= 0");
  Matrix<double> out = m;
  if (level == 0.0 || m.empty()) return out;
  const double peak = *std::max_element(m.data().begin(), m.data().end());
  if (peak == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, level * std::abs(peak));
  for (double& v : out.data()) v += dist(rng);
  return out;
}

PowerFeatureMatrices inject_noise(const PowerFeatureMatrices& pf,
                                  const NoiseConfig& noise) {
  noise.validate();
  return {inject_noise(pf.array_pf, noise.level, derive_seed(noise.seed, 0)),
          inject_noise(pf.adc_pf, noise.level, derive_seed(noise.seed, 1))};
}

}  // namespace cimleak::pipeline
