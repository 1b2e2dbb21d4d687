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

// Behavioral charge-redistribution SAR ADC.
//
// Reference topology: conventional binary-weighted array C_n = 2^(N-n) c_unit
// for n = 1..N plus one terminating c_unit, total C_T = 2^N c_unit. The top
// plate is held at ground while sampling and released at step 1, where it
// moves to V_ref C_1 / C_T - v_in. Step n connects C_n to V_ref; if the previous comparison returned 0, C_(n-1)
// falls back to ground in the same step. The comparator keeps bit n when
// V_x <= 0 (ties resolve to 1).
//
// Energy drawn from V_ref during step n:
//
//   n = 1 : E = -C_1 V_ref (dV_x - V_ref)
//   n > 1 : E = -V_ref (dV_x * sum_{i<n} C_i D_i + C_n (dV_x - V_ref))
//
// where dV_x = V_ref C_1 / C_T - v_in for n = 1 and +/- V_ref C_n / C_T
// afterwards, signed by the previous decision.

#ifndef CIMLEAK_ADC_MODEL_HPP_
#define CIMLEAK_ADC_MODEL_HPP_

#include <cstdint>
#include <span>
#include <vector>

namespace cimleak::adc {

inline constexpr int kMaxLutResolution = 20;

struct SarAdcConfig {
  int resolution = 8;
  double v_ref = 1.0;          // volts
  double c_unit = 1e-15;       // farads
  double full_scale_current = 0.0;  // amperes, mapped onto code 2^N

  void validate() const;
  std::uint32_t num_codes() const { return std::uint32_t{1} << resolution; }
  // Capacitance of switched step n in [1, N].
  double step_capacitance(int n) const;
  double total_capacitance() const;
  // Current represented by one code step.
  double current_lsb() const;
};

// DAC state between steps: decisions D_1..D_(n-1) already taken (bit k of
// `bits` holds D_(k+1)) and the current top-plate voltage.
struct DacState {
  double v_in = 0.0;
  int steps_done = 0;
  std::uint32_t bits = 0;
  double v_x = 0.0;

  bool decision(int i) const { return (bits >> (i - 1)) & 1u; }
};

// State right after sampling v_in, before the first switching step (V_x = 0).
DacState sampled_state(double v_in, const SarAdcConfig& cfg);

// The per-step energy expression above, evaluated for an arbitrary dV_x and
// prior decisions. Throws DomainError for n outside [1, N].
double switching_energy(int n, double delta_vx, std::uint32_t prior_bits,
                        const SarAdcConfig& cfg);

struct StepResult {
  double energy = 0.0;  // joules
  double delta_vx = 0.0;
  DacState next;
};

// Performs switching step n, which must equal state.steps_done + 1: derives
// dV_x from the capacitor switching, evaluates the energy and takes the
// comparator decision. The decision compares v_in against the trial level
// directly, which is the exact form of the V_x <= 0 test.
StepResult step_energy(int n, const DacState& state, const SarAdcConfig& cfg);

struct Conversion {
  std::uint32_t code = 0;
  std::vector<double> step_energies;  // one per step, joules
  double total_energy() const;
};

Conversion simulate_conversion(double v_in, const SarAdcConfig& cfg);

// clamp(floor(v_in / v_ref * 2^N), 0, 2^N - 1) through N MSB-first decisions.
// Throws DomainError for negative or NaN input.
std::uint32_t sar_convert(double v_in, const SarAdcConfig& cfg);

// clamp(floor(i / full_scale_current * 2^N), 0, 2^N - 1).
std::uint32_t current_to_code(double i_bitline, const SarAdcConfig& cfg);

// Code-indexed conversion energy, 2^N entries.
class AdcEnergyLut {
 public:
  AdcEnergyLut() = default;
  explicit AdcEnergyLut(std::vector<double> energies);

  double operator[](std::uint32_t code) const { return energies_[code]; }
  double at(std::uint32_t code) const { return energies_.at(code); }
  std::size_t size() const { return energies_.size(); }
  std::span<const double> energies() const { return energies_; }
  double max() const;
  bool operator==(const AdcEnergyLut&) const = default;

 private:
  std::vector<double> energies_;
};

// Converts each code's mid-step input (D + 0.5) v_ref / 2^N and sums the step
// energies. Resolution is limited to kMaxLutResolution bits.
AdcEnergyLut build_energy_lut(const SarAdcConfig& cfg);

}  // namespace cimleak::adc

#endif  // CIMLEAK_ADC_MODEL_HPP_
