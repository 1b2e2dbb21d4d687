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

#include "cimleak/adc_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cimleak/errors.hpp"

namespace cimleak::adc {

void SarAdcConfig::validate() const {
  if (resolution < 1 || resolution > 30)
    throw ConfigError("adc: resolution must be in [1, 30]");
  if (!(v_ref > 0.0)) throw ConfigError("adc: v_ref must be > 0");
  if (!(c_unit > 0.0)) throw ConfigError("adc: c_unit must be > 0");
  if (!(full_scale_current >= 0.0))
    throw ConfigError("adc: full_scale_current must be >= 0");
}

double SarAdcConfig::step_capacitance(int n) const {
  return std::ldexp(c_unit, resolution - n);
}

double SarAdcConfig::total_capacitance() const {
  return std::ldexp(c_unit, resolution);
}

double SarAdcConfig::current_lsb() const {
  return std::ldexp(full_scale_current, -resolution);
}

DacState sampled_state(double v_in, const SarAdcConfig& /*cfg*/) {
  if (!(v_in >= 0.0)) throw DomainError("SAR input voltage must be >= 0");
  DacState s;
  s.v_in = v_in;
  s.v_x = 0.0;  // top plate held at ground while sampling
  return s;
}

double switching_energy(int n, double delta_vx, std::uint32_t prior_bits,
                        const SarAdcConfig& cfg) {
  if (n < 1 || n > cfg.resolution)
    throw DomainError("SAR step " + std::to_string(n) + " outside [1, " +
                      std::to_string(cfg.resolution) + "]");
  const double c_n = cfg.step_capacitance(n);
  if (n == 1) return -c_n * cfg.v_ref * (delta_vx - cfg.v_ref);

  double set_capacitance = 0.0;
  for (int i = 1; i < n; ++i)
    if ((prior_bits >> (i - 1)) & 1u) set_capacitance += cfg.step_capacitance(i);
  return -cfg.v_ref * (delta_vx * set_capacitance + c_n * (delta_vx - cfg.v_ref));
}

StepResult step_energy(int n, const DacState& state, const SarAdcConfig& cfg) {
  if (n < 1 || n > cfg.resolution || n != state.steps_done + 1)
    throw DomainError("SAR step " + std::to_string(n) +
                      " invalid after " + std::to_string(state.steps_done) +
                      " completed steps");
  const double c_total = cfg.total_capacitance();
  double switched = cfg.step_capacitance(n);
  if (n > 1 && !state.decision(n - 1)) switched -= cfg.step_capacitance(n - 1);

  StepResult out;
  out.delta_vx = cfg.v_ref * switched / c_total;
  if (n == 1) out.delta_vx -= state.v_in;  // released top plate picks up -v_in
  out.energy = switching_energy(n, out.delta_vx, state.bits, cfg);

  out.next = state;
  out.next.steps_done = n;
  out.next.v_x = state.v_x + out.delta_vx;

  // Trial code: decided bits plus the bit under test.
  std::uint32_t trial = 0;
  for (int i = 1; i < n; ++i)
    if (state.decision(i)) trial |= std::uint32_t{1} << (cfg.resolution - i);
  trial |= std::uint32_t{1} << (cfg.resolution - n);
  const double threshold =
      std::ldexp(cfg.v_ref * static_cast<double>(trial), -cfg.resolution);
  if (state.v_in >= threshold) out.next.bits |= std::uint32_t{1} << (n - 1);
  return out;
}

double Conversion::total_energy() const {
  return std::accumulate(step_energies.begin(), step_energies.end(), 0.0);
}

Conversion simulate_conversion(double v_in, const SarAdcConfig& cfg) {
  DacState state = sampled_state(v_in, cfg);
  Conversion conv;
  conv.step_energies.reserve(static_cast<std::size_t>(cfg.resolution));
  for (int n = 1; n <= cfg.resolution; ++n) {
    StepResult step = step_energy(n, state, cfg);
    conv.step_energies.push_back(step.energy);
    state = step.next;
  }
  for (int i = 1; i <= cfg.resolution; ++i)
    if (state.decision(i)) conv.code |= std::uint32_t{1} << (cfg.resolution - i);
  return conv;
}

std::uint32_t sar_convert(double v_in, const SarAdcConfig& cfg) {
  return simulate_conversion(v_in, cfg).code;
}

std::uint32_t current_to_code(double i_bitline, const SarAdcConfig& cfg) {
  if (!(i_bitline >= 0.0)) throw DomainError("bit-line current must be >= 0");
  if (!(cfg.full_scale_current > 0.0))
    throw ConfigError("adc: full_scale_current must be > 0 for conversion");
  const double scaled =
      std::ldexp(i_bitline / cfg.full_scale_current, cfg.resolution);
  const double top = static_cast<double>(cfg.num_codes() - 1);
  return static_cast<std::uint32_t>(std::min(std::floor(scaled), top));
}

AdcEnergyLut::AdcEnergyLut(std::vector<double> energies)
    : energies_(std::move(energies)) {}

double AdcEnergyLut::max() const {
  return energies_.empty() ? 0.0
                           : *std::max_element(energies_.begin(), energies_.end());
}

AdcEnergyLut build_energy_lut(const SarAdcConfig& cfg) {
  cfg.validate();
  if (cfg.resolution > kMaxLutResolution)
    throw ConfigError("adc: LUT resolution above " +
                      std::to_string(kMaxLutResolution) + " bits");
  std::vector<double> energies(cfg.num_codes());
  for (std::uint32_t code = 0; code < cfg.num_codes(); ++code) {
    const double v_mid = std::ldexp(cfg.v_ref * (2.0 * code + 1.0),
                                    -(cfg.resolution + 1));
    energies[code] = simulate_conversion(v_mid, cfg).total_energy();
  }
  return AdcEnergyLut(std::move(energies));
}

}  // namespace cimleak::adc
