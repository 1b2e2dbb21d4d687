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

// Adversary-side preprocessing: trace segmentation, bit-significance weighted
// sums, power feature matrices, 8-bit normalization and noise injection.

#ifndef CIMLEAK_TRACE_PIPELINE_HPP_
#define CIMLEAK_TRACE_PIPELINE_HPP_

#include <cstdint>
#include <span>

#include "cimleak/cim_sim.hpp"
#include "cimleak/matrix.hpp"
#include "cimleak/power_trace.hpp"

namespace cimleak::pipeline {

// Recovers per-window, per-bit values from a trace: the mean ANALOG power and
// the integrated ADC energy. Every (window, bit, phase) must appear exactly
// once and lie inside the sample buffer, otherwise FormatError.
sim::PhaseGrid segment_trace(const sim::PowerTrace& trace);

// sum_i values[i] * 2^i over exactly 8 values; ShapeError otherwise.
double weighted_sum(std::span<const double> per_bit);

struct PowerFeatureMatrices {
  Matrix<double> array_pf;  // weighted array power, watts
  Matrix<double> adc_pf;    // weighted ADC energy, joules
};

PowerFeatureMatrices assemble_features(const sim::PhaseGrid& phases);
// FormatError when a window is missing or out of place.
PowerFeatureMatrices assemble_features(const sim::RecordGrid& records);

struct Normalized8 {
  Matrix<std::uint8_t> values;
  double min = 0.0;
  double max = 0.0;
  bool degenerate = false;  // constant input, all zeros emitted
};

// floor((x - min) * 255 / (max - min)), clamped to [0, 255].
Normalized8 normalize_8bit(const Matrix<double>& pf);
Matrix<double> denormalize_8bit(const Normalized8& n);

enum class NoiseTarget : std::uint8_t { kFeatureMatrices, kTraceSamples };

struct NoiseConfig {
  double level = 0.0;  // sigma as a fraction of the matrix maximum
  std::uint64_t seed = 0;
  NoiseTarget target = NoiseTarget::kFeatureMatrices;

  void validate() const;
};

// Adds N(0, (level * max(m))^2) to every entry of each matrix. The array and
// ADC matrices use their own maxima and independent streams derived from the
// seed.
PowerFeatureMatrices inject_noise(const PowerFeatureMatrices& pf,
                                  const NoiseConfig& noise);
Matrix<double> inject_noise(const Matrix<double>& m, double level,
                            std::uint64_t seed);

}  // namespace cimleak::pipeline

#endif  // CIMLEAK_TRACE_PIPELINE_HPP_
