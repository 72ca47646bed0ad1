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

// JSON documents for fit results, drift tracks and the coherence-table suite.
// Frequencies are reported in Hz here; everything internal stays in rad/s.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"  // vendored nlohmann/json

#include "zq/drift.hpp"
#include "zq/fitting.hpp"
#include "zq/physics.hpp"
#include "zq/scenario.hpp"

namespace zq {

using Json = nlohmann::ordered_json;

struct Provenance {
  std::string config_hash;  // empty when the input was a data file
  std::optional<std::uint64_t> seed;
  std::string source;
};

namespace detail {

// Non-finite values become null.
inline Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json provenance_json(const Provenance& p) {
  Json j = Json::object();
  j["config_hash"] = p.config_hash.empty() ? Json(nullptr) : Json(p.config_hash);
  j["seed"] = p.seed ? Json(*p.seed) : Json(nullptr);
  if (!p.source.empty()) j["source"] = p.source;
  return j;
}

}  // namespace detail

inline Json fit_report(const DecayFit& fit, const PhysicalConstants& constants, const Provenance& prov,
                       const std::optional<DeviationEstimate>& probe = std::nullopt) {
  using detail::number_or_null;
  Json j;
  j["model"] = to_string(fit.model);
  Json params = Json::object(), err = Json::object();
  if (fit.model == DecayModel::gaussian) {
    params["tau_d_s"] = number_or_null(fit.value);
    err["tau_d_s"] = number_or_null(fit.stderr);
    if (!fit.diverged) {
      params["rms_field_t"] = rms_field_from_dephasing(fit.value, constants);
      // d(rms)/d(tau_d) = -rms / tau_d
      err["rms_field_t"] = rms_field_from_dephasing(fit.value, constants) * fit.stderr / fit.value;
    } else {
      params["rms_field_t"] = nullptr;
    }
  } else {
    params["delta_ac_hz"] = angular_to_hertz(fit.value);
    err["delta_ac_hz"] = angular_to_hertz(fit.stderr);
  }
  params["threshold_time_s"] = fit.threshold_time;
  params["threshold_censored"] = fit.threshold_censored;
  if (probe) {
    params["probe_delta_ac_hz"] = angular_to_hertz(probe->delta_ac);
    err["probe_delta_ac_hz"] = angular_to_hertz(probe->stderr);
  }
  j["params"] = params;
  j["stderr"] = err;
  j["residual_norm"] = fit.residual_norm;
  j["n_points"] = fit.n_points;
  j["diverged"] = fit.diverged;
  if (!fit.message.empty()) j["message"] = fit.message;
  j["provenance"] = detail::provenance_json(prov);
  return j;
}

inline Json probe_report(const DeviationEstimate& est, const Provenance& prov) {
  Json j;
  j["model"] = "short-ramsey";
  j["params"] = {{"delta_ac_hz", angular_to_hertz(est.delta_ac)},
                 {"phase_amplitude_rad", est.phase_amplitude},
                 {"phase_shift_rad", est.phase_shift},
                 {"phase_offset_rad", est.phase_offset}};
  j["stderr"] = {{"delta_ac_hz", angular_to_hertz(est.stderr)}};
  j["residual_norm"] = nullptr;
  j["n_points"] = est.n_points;
  j["provenance"] = detail::provenance_json(prov);
  return j;
}

inline Json drift_report(const DriftTrack& track, const Provenance& prov) {
  Json j;
  j["model"] = "drift";
  j["params"] = {{"wait_time_s", track.wait_time},
                 {"total_shift_hz", angular_to_hertz(track.total_shift)},
                 {"max_drift_rate_hz_per_s", angular_to_hertz(track.max_drift_rate)}};
  j["stderr"] = Json::object();
  j["residual_norm"] = nullptr;
  j["n_points"] = track.points.size();
  j["unwrap_failures"] = track.unwrap_failures;
  Json pts = Json::array();
  for (const auto& p : track.points) {
    pts.push_back({{"wall_time_s", p.wall_time},
                   {"phase_rad", p.phase},
                   {"unwrapped_phase_rad", p.unwrapped_phase},
                   {"frequency_offset_hz", angular_to_hertz(p.frequency_offset)},
                   {"drift_rate_hz_per_s", angular_to_hertz(p.drift_rate)}});
  }
  j["points"] = pts;
  j["provenance"] = detail::provenance_json(prov);
  return j;
}

inline Json reported_time_json(const ReportedTime& t) {
  return {{"value_s", t.value}, {"censored", t.censored}, {"from_gaussian_fit", t.from_fit}};
}

inline Json table1_report_json(const Table1Report& rep) {
  Json j;
  Json rows = Json::array();
  for (const auto& r : rep.rows) {
    Json row;
    row["row"] = r.row.id();
    row["tau_d_star"] = reported_time_json(r.tau_d_star);
    row["tau_d"] = reported_time_json(r.tau_d);
    auto table = [](const std::optional<TableValue>& v, bool hz) -> Json {
      if (!v) return nullptr;
      const double s = hz ? 1.0 / kTwoPi : 1.0;
      if (v->lower_bound) return {{"lower_bound", v->value * s}};
      return {{"value", v->value * s}, {"uncertainty", v->uncertainty * s}};
    };
    row["table"] = {{"tau_d_star_s", table(r.row.tau_d_star, false)},
                    {"tau_d_s", table(r.row.tau_d, false)},
                    {"delta_ac_hz", table(r.row.delta_ac, true)}};
    row["config_hash"] = {{"ramsey", r.ramsey.config_hash}, {"echo", r.echo.config_hash}};
    rows.push_back(row);
  }
  j["rows"] = rows;
  Json ord = Json::array();
  for (const auto& o : rep.orderings) {
    ord.push_back({{"check", o.description}, {"greater_s", o.greater}, {"lesser_s", o.lesser}, {"passed", o.passed}});
  }
  j["orderings"] = ord;
  Json dac = Json::array();
  for (const auto& d : rep.delta_checks) {
    dac.push_back({{"setup", d.setup},
                   {"method", d.method},
                   {"input_hz", angular_to_hertz(d.input)},
                   {"table_hz", angular_to_hertz(d.table)},
                   {"table_uncertainty_hz", angular_to_hertz(d.table_uncertainty)},
                   {"measured_hz", angular_to_hertz(d.measured)},
                   {"stderr_hz", angular_to_hertz(d.stderr)},
                   {"passed", d.passed}});
  }
  j["delta_ac"] = dac;
  j["passed"] = rep.passed;
  return j;
}

}  // namespace zq
