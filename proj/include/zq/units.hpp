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

// Unit-suffixed scalars for configuration files ("25 Hz", "2.7 pT", "15 ms").
// Values are converted to the internal units: rad/s for frequencies, T, s, m,
// K, rad.

#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>
#include <system_error>

#include "zq/errors.hpp"

namespace zq {

enum class Dimension {
  frequency,            // Hz, rad/s
  field,                // T
  time,                 // s, min, h
  length,               // m
  temperature,          // K
  inverse_temperature,  // /K, %/K, ppm/K
  attenuation,          // dB
  angle,                // rad, deg
  gradient,             // Hz/m, rad/s/m
  diffusion,            // Hz^2/s, rad^2/s^3
  dimensionless,
};

namespace detail {

struct UnitEntry {
  std::string_view symbol;
  double factor;
  bool prefixable;
};

struct DimensionInfo {
  std::string_view name;
  std::string_view example;
  std::string_view canonical;  // symbol used when writing
  std::array<UnitEntry, 4> units;
  int count;
};

inline constexpr double kTau = 2.0 * std::numbers::pi;

inline const DimensionInfo& dimension_info(Dimension d) {
  static const std::array<DimensionInfo, 11> table{{
      {"frequency", "25 Hz", "rad/s", {{{"Hz", kTau, true}, {"rad/s", 1.0, false}}}, 2},
      {"magnetic field", "2.7 pT", "T", {{{"T", 1.0, true}}}, 1},
      {"time", "15 ms", "s", {{{"s", 1.0, true}, {"min", 60.0, false}, {"h", 3600.0, false}}}, 3},
      {"length", "10 nm", "m", {{{"m", 1.0, true}}}, 1},
      {"temperature", "0.2 K", "K", {{{"K", 1.0, true}}}, 1},
      {"temperature coefficient",
       "-0.03 %/K",
       "/K",
       {{{"/K", 1.0, false}, {"1/K", 1.0, false}, {"%/K", 0.01, false}, {"ppm/K", 1e-6, false}}},
       4},
      {"attenuation", "25 dB", "dB", {{{"dB", 1.0, false}}}, 1},
      {"angle", "0.5 rad", "rad", {{{"rad", 1.0, false}, {"deg", std::numbers::pi / 180.0, false}}}, 2},
      {"frequency gradient", "8e6 Hz/m", "rad/s/m", {{{"Hz/m", kTau, true}, {"rad/s/m", 1.0, false}}}, 2},
      {"diffusion", "4 Hz^2/s", "rad^2/s^3", {{{"Hz^2/s", kTau * kTau, false}, {"rad^2/s^3", 1.0, false}}}, 2},
      {"dimensionless number", "0.2", "", {{}}, 0},
  }};
  return table[static_cast<std::size_t>(d)];
}

inline bool prefix_factor(std::string_view p, double& f) {
  static constexpr std::array<std::pair<std::string_view, double>, 10> prefixes{{
      {"f", 1e-15}, {"p", 1e-12}, {"n", 1e-9}, {"u", 1e-6}, {"\xC2\xB5", 1e-6},
      {"\xCE\xBC", 1e-6}, {"m", 1e-3}, {"k", 1e3}, {"M", 1e6}, {"G", 1e9}}};
  for (const auto& [sym, val] : prefixes) {
    if (p == sym) {
      f = val;
      return true;
    }
  }
  return false;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace detail

inline std::string_view dimension_name(Dimension d) { return detail::dimension_info(d).name; }

// Parses "<number> <unit>" (the space is optional) and returns the value in
// internal units. `field` names the setting in error messages.
inline double parse_quantity(std::string_view text, Dimension dim, std::string_view field) {
  const auto& info = detail::dimension_info(dim);
  auto fail = [&](const std::string& why) -> double {
    throw ValidationError(std::string(field) + ": " + why + " (expected a " + std::string(info.name) +
                          " such as '" + std::string(info.example) + "', got '" + std::string(text) + "')");
  };
  const auto s = detail::trim(text);
  if (s.empty()) return fail("empty value");
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  if (*begin == '+') ++begin;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc()) return fail("not a number");
  if (!std::isfinite(value)) return fail("value must be finite");
  const auto unit = detail::trim(std::string_view(ptr, static_cast<std::size_t>(end - ptr)));

  if (dim == Dimension::dimensionless) {
    if (!unit.empty()) return fail("unexpected unit '" + std::string(unit) + "'");
    return value;
  }
  if (unit.empty()) return fail("missing unit");
  for (int i = 0; i < info.count; ++i) {
    const auto& u = info.units[static_cast<std::size_t>(i)];
    if (unit == u.symbol) return value * u.factor;
    if (u.prefixable && unit.size() > u.symbol.size() && unit.ends_with(u.symbol)) {
      double f = 1.0;
      if (detail::prefix_factor(unit.substr(0, unit.size() - u.symbol.size()), f)) {
        return value * f * u.factor;
      }
    }
  }
  return fail("unknown unit '" + std::string(unit) + "'");
}

// Shortest round-trip decimal form of a double.
inline std::string format_number(double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw NumericalError("format_number: conversion failed");
  return std::string(buf.data(), ptr);
}

// Writes a value in the canonical unit of its dimension; parse_quantity reads
// it back bit for bit.
inline std::string format_quantity(double value, Dimension dim) {
  const auto& info = detail::dimension_info(dim);
  if (info.canonical.empty()) return format_number(value);
  return format_number(value) + " " + std::string(info.canonical);
}

}  // namespace zq
