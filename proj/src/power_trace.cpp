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

#include "cimleak/power_trace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <string>

#include <nlohmann/json.hpp>

#include "cimleak/detail/little_endian.hpp"
#include "cimleak/errors.hpp"

namespace cimleak::sim {

namespace {

constexpr char kTraceMagic[8] = {'C', 'I', 'M', 'T', 'R', 'A', 'C', 'E'};
constexpr int kTraceVersion = 1;

void validate_timing(const PhaseTiming& timing, double sample_rate) {
  if (!(timing.analog_seconds > 0.0) || !(timing.adc_seconds > 0.0))
    throw ConfigError("trace: phase durations must be > 0");
  if (!(sample_rate > 0.0)) throw ConfigError("trace: sample rate must be > 0");
}

}  // namespace

std::vector<Phase> PowerTrace::sample_phases() const {
  std::vector<Phase> phases(samples.size(), Phase::kAnalog);
  for (const auto& s : segments)
    for (std::uint64_t i = s.start; i < s.start + s.length && i < phases.size(); ++i)
      phases[i] = s.phase;
  return phases;
}

std::uint64_t samples_per_phase(double seconds, double sample_rate) {
  return std::max<std::uint64_t>(
      1, static_cast<std::uint64_t>(std::llround(seconds * sample_rate)));
}

std::vector<Segment> fixed_timing_segments(std::size_t grid_rows,
                                           std::size_t grid_cols,
                                           const PhaseTiming& timing,
                                           double sample_rate) {
  validate_timing(timing, sample_rate);
  const std::uint64_t n_analog = samples_per_phase(timing.analog_seconds, sample_rate);
  const std::uint64_t n_adc = samples_per_phase(timing.adc_seconds, sample_rate);
  std::vector<Segment> segments;
  segments.reserve(grid_rows * grid_cols * kInputBits * 2);
  std::uint64_t cursor = 0;
  for (std::size_t r = 0; r < grid_rows; ++r) {
    for (std::size_t c = 0; c < grid_cols; ++c) {
      for (int bit = 0; bit < kInputBits; ++bit) {
        const auto row = static_cast<std::uint32_t>(r);
        const auto col = static_cast<std::uint32_t>(c);
        const auto b = static_cast<std::uint8_t>(bit);
        segments.push_back({row, col, b, Phase::kAnalog, cursor, n_analog});
        cursor += n_analog;
        segments.push_back({row, col, b, Phase::kAdc, cursor, n_adc});
        cursor += n_adc;
      }
    }
  }
  return segments;
}

PowerTrace emit_trace(const RecordGrid& records, const PhaseTiming& timing,
                      double sample_rate, const std::optional<SampleNoise>& noise) {
  if (records.records.size() != records.rows * records.cols)
    throw ShapeError("record grid is incomplete");
  PowerTrace trace;
  trace.sample_rate = sample_rate;
  trace.grid_rows = records.rows;
  trace.grid_cols = records.cols;
  trace.segments = fixed_timing_segments(records.rows, records.cols, timing, sample_rate);
  if (!trace.segments.empty()) {
    const Segment& last = trace.segments.back();
    trace.samples.resize(last.start + last.length);
  }

  std::size_t seg = 0;
  for (const ExecRecord& rec : records.records) {
    for (int bit = 0; bit < kInputBits; ++bit) {
      const Segment& analog = trace.segments[seg++];
      std::fill_n(trace.samples.begin() + static_cast<std::ptrdiff_t>(analog.start),
                  analog.length, rec.phases.array_power[bit]);
      const Segment& adc = trace.segments[seg++];
      const double power = rec.phases.adc_energy[bit] * sample_rate /
                           static_cast<double>(adc.length);
      std::fill_n(trace.samples.begin() + static_cast<std::ptrdiff_t>(adc.start),
                  adc.length, power);
    }
  }

  if (noise && noise->level != 0.0) {
    if (!(noise->level > 0.0)) throw ConfigError("trace noise level must be >= 0");
    double peak = 0.0;
    for (double s : trace.samples) peak = std::max(peak, std::abs(s));
    if (peak == 0.0) return trace;
    std::mt19937_64 rng(noise->seed);
    std::normal_distribution<double> dist(0.0, noise->level * peak);
    for (double& s : trace.samples) s += dist(rng);
  }
  return trace;
}

void write_trace(const std::filesystem::path& path, const PowerTrace& trace) {
  nlohmann::json header;
  header["format"] = "cimleak-trace";
  header["version"] = kTraceVersion;
  header["sample_rate"] = trace.sample_rate;
  header["num_samples"] = trace.samples.size();
  header["grid"] = {trace.grid_rows, trace.grid_cols};
  header["segment_fields"] = {"row", "col", "bit", "phase", "start", "length"};
  auto segs = nlohmann::json::array();
  for (const auto& s : trace.segments)
    segs.push_back({s.row, s.col, s.bit, static_cast<int>(s.phase), s.start, s.length});
  header["segments"] = std::move(segs);
  const std::string text = header.dump();

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError(path.string(), "cannot open for writing");
  os.write(kTraceMagic, sizeof(kTraceMagic));
  detail::write_le<std::uint64_t>(os, text.size());
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (double s : trace.samples) detail::write_le<float>(os, static_cast<float>(s));
  if (!os) throw IoError(path.string(), "write failed");
}

PowerTrace read_trace(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError(path.string(), "cannot open for reading");
  char magic[sizeof(kTraceMagic)];
  if (!is.read(magic, sizeof(magic)) ||
      !std::equal(magic, magic + sizeof(magic), kTraceMagic))
    throw FormatError(path.string() + ": not a trace file (bad magic)");
  std::uint64_t header_len = 0;
  if (!detail::read_le(is, header_len))
    throw FormatError(path.string() + ": truncated trace header");
  const auto file_size = std::filesystem::file_size(path);
  if (header_len > file_size - sizeof(kTraceMagic) - 8) throw FormatError(path.string() + ": header length exceeds file");
  std::string text(header_len, '\0');
  if (!is.read(text.data(), static_cast<std::streamsize>(header_len)))
    throw FormatError(path.string() + ": truncated trace header");

  PowerTrace trace;
  std::uint64_t num_samples = 0;
  try {
    const auto header = nlohmann::json::parse(text);
    if (header.at("format") != "cimleak-trace" || header.at("version") != kTraceVersion)
      throw FormatError(path.string() + ": unsupported trace format/version");
    trace.sample_rate = header.at("sample_rate").get<double>();
    num_samples = header.at("num_samples").get<std::uint64_t>();
    trace.grid_rows = header.at("grid").at(0).get<std::size_t>();
    trace.grid_cols = header.at("grid").at(1).get<std::size_t>();
    for (const auto& s : header.at("segments")) {
      const int phase = s.at(3).get<int>();
      if (phase != 0 && phase != 1) throw FormatError(path.string() + ": bad segment phase");
      trace.segments.push_back({s.at(0).get<std::uint32_t>(), s.at(1).get<std::uint32_t>(),
                                s.at(2).get<std::uint8_t>(), static_cast<Phase>(phase),
                                s.at(4).get<std::uint64_t>(), s.at(5).get<std::uint64_t>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": malformed trace header: " + e.what());
  }

  const std::uint64_t payload = file_size - sizeof(kTraceMagic) - 8 - header_len;
  if (payload != num_samples * sizeof(float))
    throw FormatError(path.string() + ": sample payload length mismatch");
  trace.samples.resize(num_samples);
  std::vector<char> raw(num_samples * sizeof(float));
  if (!is.read(raw.data(), static_cast<std::streamsize>(raw.size())))
    throw FormatError(path.string() + ": truncated sample payload");
  for (std::uint64_t i = 0; i < num_samples; ++i)
    trace.samples[i] = detail::from_le_bytes<float>(raw.data() + i * sizeof(float));
  return trace;
}

}  // namespace cimleak::sim
