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

// Sampled power traces of a simulated inference.
//
// Windows are serialized row-major; every window contributes 8 bits, each bit
// an ANALOG segment followed by an ADC segment. Power is constant inside a
// segment: the array power for ANALOG, energy * sample_rate / samples for ADC
// so that the segment integrates to the recorded energy.

#ifndef CIMLEAK_POWER_TRACE_HPP_
#define CIMLEAK_POWER_TRACE_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "cimleak/cim_sim.hpp"

namespace cimleak::sim {

enum class Phase : std::uint8_t { kAnalog = 0, kAdc = 1 };

struct PhaseTiming {
  double analog_seconds = 10e-9;
  double adc_seconds = 40e-9;
};

struct Segment {
  std::uint32_t row = 0;
  std::uint32_t col = 0;
  std::uint8_t bit = 0;
  Phase phase = Phase::kAnalog;
  std::uint64_t start = 0;   // first sample
  std::uint64_t length = 0;  // sample count
  bool operator==(const Segment&) const = default;
};

struct PowerTrace {
  double sample_rate = 1e9;  // hertz
  std::size_t grid_rows = 0;
  std::size_t grid_cols = 0;
  std::vector<double> samples;  // watts
  std::vector<Segment> segments;

  std::vector<Phase> sample_phases() const;
};

// Additive white Gaussian noise on the samples, sigma = level * max|sample|.
struct SampleNoise {
  double level = 0.0;
  std::uint64_t seed = 0;
};

// Samples per segment of each phase: round(duration * rate), at least 1.
std::uint64_t samples_per_phase(double seconds, double sample_rate);

// Segment table of a trace with fixed per-phase timing, in emission order.
std::vector<Segment> fixed_timing_segments(std::size_t grid_rows,
                                           std::size_t grid_cols,
                                           const PhaseTiming& timing,
                                           double sample_rate);

PowerTrace emit_trace(const RecordGrid& records, const PhaseTiming& timing,
                      double sample_rate,
                      const std::optional<SampleNoise>& noise = std::nullopt);

// Binary trace file: "CIMTRACE", u64 header length, JSON header, then the
// samples as little-endian float32.
void write_trace(const std::filesystem::path& path, const PowerTrace& trace);
PowerTrace read_trace(const std::filesystem::path& path);

// Per-window phase values, as recorded by the simulator or recovered from a
// trace.
struct PhaseGrid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<WindowPhases> cells;  // row-major
  const WindowPhases& at(std::size_t r, std::size_t c) const {
    return cells[r * cols + c];
  }
};

}  // namespace cimleak::sim

#endif  // CIMLEAK_POWER_TRACE_HPP_
