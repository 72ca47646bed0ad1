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

// Qubit-frequency drift from a series of fixed-wait Ramsey records.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "zq/errors.hpp"
#include "zq/mle.hpp"

namespace zq {

struct DriftPoint {
  double wall_time = 0.0;         // s
  double phase = 0.0;             // MLE phase, wrapped
  double unwrapped_phase = 0.0;   // rad
  double frequency_offset = 0.0;  // rad/s
  double drift_rate = 0.0;        // local slope, rad/s^2 (0 where no window fits)
};

struct DriftTrack {
  double wait_time = 0.0;
  std::vector<DriftPoint> points;
  double max_drift_rate = 0.0;  // rad/s^2, largest |local slope|
  double total_shift = 0.0;     // last minus first frequency offset, rad/s
  std::vector<std::size_t> unwrap_failures;  // indices whose step from the previous point is ambiguous
};

struct DriftOptions {
  // Points per local linear fit; 2 is a plain finite difference.
  std::size_t window = 2;
  // Wrapped steps at least this large cannot be told apart from their alias
  // and are flagged.
  double ambiguity_threshold = 0.9 * std::numbers::pi;
};

// Least-squares slope of y against x.
inline double linear_slope(const double* x, const double* y, std::size_t n) {
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

// Frequency offset = unwrapped phase / tau; unwrapping assumes the true phase
// step between consecutive records stays below pi.
inline DriftTrack track_drift(std::vector<MeasurementRecord> records, DriftOptions opt = {}) {
  detail::require(records.size() >= 2, "track_drift: needs at least two records");
  detail::require(opt.window >= 2, "track_drift: window must be at least 2");
  std::stable_sort(records.begin(), records.end(),
                   [](const auto& a, const auto& b) { return a.wall_time < b.wall_time; });
  const double tau = records.front().wait_time;
  for (std::size_t i = 0; i < records.size(); ++i) {
    detail::require(records[i].wait_time == tau, "track_drift: all records must share one wait time");
    if (i > 0) {
      detail::require(records[i].wall_time > records[i - 1].wall_time,
                      "track_drift: wall times must be strictly increasing");
    }
  }

  DriftTrack track;
  track.wait_time = tau;
  track.points.resize(records.size());
  double unwrapped = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto est = mle_coherence(records[i], {.with_interval = false});
    auto& p = track.points[i];
    p.wall_time = records[i].wall_time;
    p.phase = est.phase;
    if (i == 0) {
      unwrapped = est.phase;
    } else {
      const double step = wrap_phase(est.phase - track.points[i - 1].phase);
      if (std::fabs(step) >= opt.ambiguity_threshold) track.unwrap_failures.push_back(i);
      unwrapped += step;
    }
    p.unwrapped_phase = unwrapped;
    p.frequency_offset = unwrapped / tau;
  }

  const std::size_t n = track.points.size();
  const std::size_t win = std::min(opt.window, n);
  std::vector<double> t(n), f(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = track.points[i].wall_time;
    f[i] = track.points[i].frequency_offset;
  }
  for (std::size_t start = 0; start + win <= n; ++start) {
    const double slope = linear_slope(&t[start], &f[start], win);
    // Assign to the window centre.
    track.points[start + (win - 1) / 2].drift_rate = slope;
    track.max_drift_rate = std::max(track.max_drift_rate, std::fabs(slope));
  }
  track.total_shift = f.back() - f.front();
  return track;
}

}  // namespace zq
