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

// Projective readout: binomial shot sampling in the X and Y analysis bases,
// with a wait-time dependent readout-error model and its compensation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "zq/errors.hpp"
#include "zq/noise.hpp"
#include "zq/random.hpp"
#include "zq/sequence.hpp"

namespace zq {

using TriggerMode = PhaseMode;

inline std::string_view to_string(TriggerMode m) {
  return m == TriggerMode::triggered ? "triggered" : "free-running";
}

inline TriggerMode parse_trigger_mode(std::string_view s) {
  if (s == "triggered" || s == "on") return TriggerMode::triggered;
  if (s == "free-running" || s == "free_running" || s == "off") return TriggerMode::free_running;
  throw ValidationError("trigger_mode: expected 'triggered' or 'free-running', got '" +
                        std::string(s) + "'");
}

struct MeasurementRecord {
  double wait_time = 0.0;  // s
  long shots_x = 0;
  long bright_x = 0;
  long shots_y = 0;
  long bright_y = 0;
  TriggerMode trigger_mode = TriggerMode::triggered;
  double wall_time = 0.0;  // s

  void validate() const {
    detail::require(std::isfinite(wait_time) && wait_time > 0.0,
                    "record: wait_time_s must be positive");
    detail::require(shots_x > 0, "record: shots_x must be positive");
    detail::require(shots_y > 0, "record: shots_y must be positive");
    detail::require(bright_x >= 0 && bright_x <= shots_x,
                    "record: bright_x must lie in [0, shots_x]");
    detail::require(bright_y >= 0 && bright_y <= shots_y,
                    "record: bright_y must lie in [0, shots_y]");
    detail::require(std::isfinite(wall_time), "record: wall_time_s must be finite");
  }

  friend bool operator==(const MeasurementRecord&, const MeasurementRecord&) = default;
};

enum class ReadoutSymmetry { symmetric, asymmetric };

struct ErrorPoint {
  double wait_time = 0.0;
  double epsilon = 0.0;

  friend bool operator==(const ErrorPoint&, const ErrorPoint&) = default;
};

struct ReadoutErrors {
  double up = 0.0;    // bright reported as dark
  double down = 0.0;  // dark reported as bright
};

// Readout error interpolated linearly in wait time and clamped at the ends.
// The default is the single datum of a 20 % fidelity loss at 4 s, assumed to
// grow linearly from zero.
struct ReadoutErrorModel {
  ReadoutSymmetry symmetry = ReadoutSymmetry::symmetric;
  std::vector<ErrorPoint> error_at{{0.0, 0.0}, {4.0, 0.2}};
  std::vector<ErrorPoint> down_error_at;  // asymmetric only

  static ReadoutErrorModel none() {
    ReadoutErrorModel m;
    m.error_at = {{0.0, 0.0}};
    return m;
  }

  void validate() const {
    auto check = [](const std::vector<ErrorPoint>& pts, const char* name) {
      detail::require(!pts.empty(), std::string("readout: ") + name + " must not be empty");
      for (std::size_t i = 0; i < pts.size(); ++i) {
        detail::require(pts[i].epsilon >= 0.0 && pts[i].epsilon <= 1.0,
                        std::string("readout: ") + name + " epsilon must lie in [0, 1]");
        if (i > 0) {
          detail::require(pts[i].wait_time > pts[i - 1].wait_time,
                          std::string("readout: ") + name + " wait times must increase");
        }
      }
    };
    check(error_at, "error_at");
    if (symmetry == ReadoutSymmetry::asymmetric) check(down_error_at, "down_error_at");
  }

  static double interpolate(const std::vector<ErrorPoint>& pts, double t) {
    if (pts.empty()) return 0.0;
    if (t <= pts.front().wait_time) return pts.front().epsilon;
    if (t >= pts.back().wait_time) return pts.back().epsilon;
    auto it = std::upper_bound(pts.begin(), pts.end(), t,
                               [](double x, const ErrorPoint& p) { return x < p.wait_time; });
    const auto& b = *it;
    const auto& a = *(it - 1);
    return a.epsilon + (b.epsilon - a.epsilon) * (t - a.wait_time) / (b.wait_time - a.wait_time);
  }

  ReadoutErrors errors_at(double wait_time) const {
    const double up = interpolate(error_at, wait_time);
    if (symmetry == ReadoutSymmetry::symmetric) return {up, up};
    return {up, interpolate(down_error_at, wait_time)};
  }

  // Factor by which the readout shrinks the measured contrast.
  double contrast_factor(double wait_time) const {
    const auto e = errors_at(wait_time);
    return symmetry == ReadoutSymmetry::symmetric ? 1.0 - e.up : 1.0 - e.up - e.down;
  }

  friend bool operator==(const ReadoutErrorModel&, const ReadoutErrorModel&) = default;
};

// Symmetric depolarisation: (1 - eps) p + eps / 2.
inline double apply_readout_error(double p, double epsilon) {
  detail::require(p >= 0.0 && p <= 1.0, "apply_readout_error: p must lie in [0, 1]");
  detail::require(epsilon >= 0.0 && epsilon <= 1.0,
                  "apply_readout_error: epsilon must lie in [0, 1]");
  return (1.0 - epsilon) * p + 0.5 * epsilon;
}

// Asymmetric flips: (1 - eps_up) p + eps_down (1 - p).
inline double apply_readout_error(double p, double eps_up, double eps_down) {
  detail::require(p >= 0.0 && p <= 1.0, "apply_readout_error: p must lie in [0, 1]");
  detail::require(eps_up >= 0.0 && eps_up <= 1.0 && eps_down >= 0.0 && eps_down <= 1.0,
                  "apply_readout_error: epsilons must lie in [0, 1]");
  return std::clamp((1.0 - eps_up) * p + eps_down * (1.0 - p), 0.0, 1.0);
}

inline double apply_readout_error(double p, ReadoutErrors e, ReadoutSymmetry s) {
  return s == ReadoutSymmetry::symmetric ? apply_readout_error(p, e.up)
                                         : apply_readout_error(p, e.up, e.down);
}

// Undo the contrast scaling of the symmetric model, clamped to [0, 1].
inline double compensate_contrast(double measured, double epsilon) {
  detail::require(measured >= 0.0 && measured <= 1.0,
                  "compensate_contrast: contrast must lie in [0, 1]");
  detail::require(epsilon >= 0.0 && epsilon < 1.0,
                  "compensate_contrast: epsilon must lie in [0, 1)");
  return std::clamp(measured / (1.0 - epsilon), 0.0, 1.0);
}

// Asymmetric flips shrink the contrast by (1 - eps_up - eps_down); the offset
// they add to the populations does not enter the contrast and is ignored.
inline double compensate_contrast(double measured, double eps_up, double eps_down) {
  detail::require(measured >= 0.0 && measured <= 1.0,
                  "compensate_contrast: contrast must lie in [0, 1]");
  detail::require(eps_up >= 0.0 && eps_down >= 0.0 && eps_up + eps_down < 1.0,
                  "compensate_contrast: eps_up + eps_down must be below 1");
  return std::clamp(measured / (1.0 - eps_up - eps_down), 0.0, 1.0);
}

// Factor by which compensation stretches contrast differences.
inline double compensation_gain(ReadoutErrors e, ReadoutSymmetry s) {
  return s == ReadoutSymmetry::symmetric ? 1.0 / (1.0 - e.up) : 1.0 / (1.0 - e.up - e.down);
}

inline double compensate_contrast(double measured, ReadoutErrors e, ReadoutSymmetry s) {
  return s == ReadoutSymmetry::symmetric ? compensate_contrast(measured, e.up)
                                         : compensate_contrast(measured, e.up, e.down);
}

// Key for all random streams of one record: per-shot streams derive from
// (master, record, basis, shot).
struct RecordSeed {
  std::uint64_t master = 0;
  std::uint64_t record = 0;
};

inline std::uint64_t shot_seed(RecordSeed s, Basis basis, std::uint64_t shot) {
  return derive_seed(s.master, {s.record, basis == Basis::x ? 0ULL : 1ULL, shot});
}

// Accumulated phase of a single shot.
inline double shot_phase(const PulseSequence& seq, const CompositeNoise& noise,
                         std::optional<double> trigger_phase, std::uint64_t seed,
                         ShotContext ctx = {}) {
  ctx.segment_breaks = seq.pi_times();
  const auto traj = sample_trajectory(noise, seq.wait_time(), trigger_phase, seed, ctx);
  return accumulated_phase(seq, traj);
}

// Simulates `shots_per_basis` shots in each of the X and Y bases. `seq` is
// used for its pulse timing; its analysis phase is replaced per basis. A
// trigger phase marks the record as line-triggered.
inline MeasurementRecord simulate_record(const PulseSequence& seq, const CompositeNoise& noise,
                                         long shots_per_basis, const ReadoutErrorModel& readout,
                                         std::optional<double> trigger_phase, RecordSeed seed,
                                         double wall_time = 0.0) {
  detail::require(shots_per_basis >= 1, "simulate_record: shots_per_basis must be at least 1");
  noise.validate();
  readout.validate();

  MeasurementRecord rec;
  rec.wait_time = seq.wait_time();
  rec.shots_x = shots_per_basis;
  rec.shots_y = shots_per_basis;
  rec.trigger_mode = trigger_phase ? TriggerMode::triggered : TriggerMode::free_running;
  rec.wall_time = wall_time;

  const auto errors = readout.errors_at(seq.wait_time());
  const auto n = static_cast<std::size_t>(shots_per_basis);
  for (Basis basis : {Basis::x, Basis::y}) {
    const auto seq_b = seq.with_analysis_phase(analysis_phase_of(basis));
    const auto walk = persistent_walk_offsets(
        noise, n, derive_seed(seed.master, {seed.record, basis == Basis::x ? 0ULL : 1ULL, ~0ULL}));
    long bright = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const auto s = shot_seed(seed, basis, k);
      ShotContext ctx;
      ctx.wall_time = wall_time;
      ctx.walk_offset = walk[k];
      const double phi = shot_phase(seq_b, noise, trigger_phase, s, ctx);
      const double p = apply_readout_error(outcome_probability(seq_b, phi), errors, readout.symmetry);
      RandomStream outcome(s, {~0ULL});
      if (outcome.bernoulli(p)) ++bright;
    }
    (basis == Basis::x ? rec.bright_x : rec.bright_y) = bright;
  }
  return rec;
}

}  // namespace zq
