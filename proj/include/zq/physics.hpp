// Copyright 2026 The zeeman-qubit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Conversions between magnetic field, Zeeman splitting and dephasing time.
//
// Every frequency in this library is an angular frequency in rad/s. Hertz
// only appears at I/O boundaries (config parsing, reports).

#include <numbers>
#include <string>

#include "zq/errors.hpp"

namespace zq {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct PhysicalConstants {
  double bohr_magneton = 9.2740100783e-24;  // J/T
  double hbar = 1.054571817e-34;            // J s
  // 2.0 reproduces the factor-2 Zeeman coefficient used throughout; set to
  // 2.00231930436 for precision work.
  double electron_g_factor = 2.0;

  friend bool operator==(const PhysicalConstants&, const PhysicalConstants&) = default;

  void validate() const {
    detail::require(bohr_magneton > 0.0, "bohr_magneton must be positive");
    detail::require(hbar > 0.0, "hbar must be positive");
    detail::require(electron_g_factor >= 1.9 && electron_g_factor <= 2.1,
                    "electron_g_factor must lie in [1.9, 2.1]");
  }

  // Detuning per tesla, rad/s/T.
  double gyromagnetic_ratio() const { return electron_g_factor * bohr_magneton / hbar; }
};

struct FieldPoint {
  double magnitude = 0.0;  // T
  double gradient = 0.0;   // rad/s per metre of qubit splitting
};

inline double hertz_to_angular(double hz) { return kTwoPi * hz; }
inline double angular_to_hertz(double w) { return w / kTwoPi; }

// g mu_B B / hbar.
inline double zeeman_splitting(double field_tesla, const PhysicalConstants& c = {}) {
  detail::require(field_tesla >= 0.0, "zeeman_splitting: field must be non-negative");
  return c.gyromagnetic_ratio() * field_tesla;
}

inline double zeeman_splitting(const FieldPoint& p, const PhysicalConstants& c = {}) {
  return zeeman_splitting(p.magnitude, c);
}

// rms field fluctuation that produces Gaussian dephasing exp(-t^2 / 2 tau_d^2):
// hbar / (g mu_B tau_d), which is hbar / (2 mu_B tau_d) at g = 2.
inline double rms_field_from_dephasing(double tau_d, const PhysicalConstants& c = {}) {
  detail::require(tau_d > 0.0, "rms_field_from_dephasing: tau_d must be positive");
  return c.hbar / (c.electron_g_factor * c.bohr_magneton * tau_d);
}

// Detuning rms for a field rms; 1 / result is the matching dephasing time.
inline double dephasing_sigma_from_field(double sigma_b, const PhysicalConstants& c = {}) {
  detail::require(sigma_b >= 0.0, "dephasing_sigma_from_field: sigma_B must be non-negative");
  return c.gyromagnetic_ratio() * sigma_b;
}

}  // namespace zq
