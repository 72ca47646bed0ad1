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

// Stochastic magnetic-noise channels and their per-shot realisation as a
// qubit detuning signal Delta(t).
//
// Each channel draws from its own random stream keyed by (shot seed, channel
// index), so adding, removing or zeroing one channel never changes the draws
// of the others.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "zq/errors.hpp"
#include "zq/physics.hpp"
#include "zq/random.hpp"

namespace zq {

enum class PhaseMode { triggered, free_running };

// Sinusoidal modulation of the qubit frequency at the mains frequency.
struct AcLineNoise {
  double delta_ac = 0.0;                     // modulation depth, rad/s
  double omega_ac = kTwoPi * 50.0;           // line frequency, rad/s
  PhaseMode phase_mode = PhaseMode::free_running;
  double mains_jitter_sigma = 0.0;           // per-shot line-frequency rms, rad/s

  friend bool operator==(const AcLineNoise&, const AcLineNoise&) = default;

  void validate() const {
    detail::require(delta_ac >= 0.0, "ac_line: delta_ac must be non-negative");
    detail::require(omega_ac > 0.0, "ac_line: line frequency must be positive");
    detail::require(mains_jitter_sigma >= 0.0, "ac_line: mains_jitter must be non-negative");
  }
};

enum class ResamplePolicy {
  per_shot,     // one draw held for the whole shot; cancelled by an echo
  per_segment,  // independent draw for every free-precession interval between pulses
};

struct QuasiStaticGaussianNoise {
  double sigma = 0.0;  // detuning rms, rad/s
  ResamplePolicy policy = ResamplePolicy::per_shot;

  friend bool operator==(const QuasiStaticGaussianNoise&, const QuasiStaticGaussianNoise&) = default;

  void validate() const {
    detail::require(sigma >= 0.0, "quasi_static: sigma must be non-negative");
  }
};

// Zero-mean random walk of the detuning. Within a shot the walk is sampled on
// a grid of `step` and linearly interpolated; with persist_across_shots the
// walk keeps running from shot to shot (shots spaced by shot_interval).
struct RandomWalkDrift {
  double diffusion = 0.0;  // variance growth rate, (rad/s)^2 per second
  bool persist_across_shots = false;
  double step = 1e-3;
  double shot_interval = 0.1;

  friend bool operator==(const RandomWalkDrift&, const RandomWalkDrift&) = default;

  void validate() const {
    detail::require(diffusion >= 0.0, "random_walk: diffusion must be non-negative");
    detail::require(step > 0.0, "random_walk: step must be positive");
    detail::require(shot_interval > 0.0, "random_walk: shot_interval must be positive");
  }
};

// Per-shot ion position offset in a splitting gradient.
struct PositionGradientNoise {
  double gradient = kTwoPi * 8e6;  // rad/s per metre
  double position_sigma = 0.0;     // m

  friend bool operator==(const PositionGradientNoise&, const PositionGradientNoise&) = default;

  void validate() const {
    detail::require(std::isfinite(gradient), "position_gradient: gradient must be finite");
    detail::require(position_sigma >= 0.0,
                    "position_gradient: position_sigma must be non-negative");
  }
};

struct TemperaturePoint {
  double time = 0.0;    // wall time, s
  double kelvin = 0.0;  // temperature change relative to any fixed reference

  friend bool operator==(const TemperaturePoint&, const TemperaturePoint&) = default;
};

// Temperature-driven remanence change of the permanent magnets. The detuning
// is base_splitting * temp_coefficient * (T(t) - T(first point)).
struct ThermalDriftNoise {
  double temp_coefficient = -3e-4;  // fractional field change per kelvin
  std::vector<TemperaturePoint> trajectory;
  double base_splitting = 0.0;  // rad/s

  friend bool operator==(const ThermalDriftNoise&, const ThermalDriftNoise&) = default;

  void validate() const {
    detail::require(!trajectory.empty(), "thermal: temperature trajectory must not be empty");
    for (std::size_t i = 1; i < trajectory.size(); ++i) {
      detail::require(trajectory[i].time > trajectory[i - 1].time,
                      "thermal: trajectory times must be strictly increasing");
    }
    detail::require(std::isfinite(temp_coefficient), "thermal: temp_coefficient must be finite");
    detail::require(base_splitting >= 0.0, "thermal: base_splitting must be non-negative");
  }

  // Piecewise-linear, clamped outside the trajectory.
  double temperature_at(double wall_time) const {
    if (wall_time <= trajectory.front().time) return trajectory.front().kelvin;
    if (wall_time >= trajectory.back().time) return trajectory.back().kelvin;
    auto it = std::upper_bound(trajectory.begin(), trajectory.end(), wall_time,
                               [](double t, const TemperaturePoint& p) { return t < p.time; });
    const auto& b = *it;
    const auto& a = *(it - 1);
    return a.kelvin + (b.kelvin - a.kelvin) * (wall_time - a.time) / (b.time - a.time);
  }

  double detuning_at(double wall_time) const {
    return base_splitting * temp_coefficient *
           (temperature_at(wall_time) - trajectory.front().kelvin);
  }
};

using NoiseChannel = std::variant<AcLineNoise, QuasiStaticGaussianNoise, RandomWalkDrift,
                                  PositionGradientNoise, ThermalDriftNoise>;

// Shielding attenuates ambient-field channels (ac line, quasi-static,
// random walk) but not the magnets' own gradient or thermal drift.
inline bool is_field_derived(const NoiseChannel& ch) {
  return std::holds_alternative<AcLineNoise>(ch) ||
         std::holds_alternative<QuasiStaticGaussianNoise>(ch) ||
         std::holds_alternative<RandomWalkDrift>(ch);
}

struct CompositeNoise {
  std::vector<NoiseChannel> channels;
  double attenuation_db = 0.0;

  friend bool operator==(const CompositeNoise&, const CompositeNoise&) = default;

  void validate() const {
    detail::require(attenuation_db >= 0.0 && std::isfinite(attenuation_db),
                    "noise: attenuation must be >= 0 dB");
    for (const auto& ch : channels) std::visit([](const auto& c) { c.validate(); }, ch);
  }

  double field_scale() const { return std::pow(10.0, -attenuation_db / 20.0); }

  bool has_triggered_ac() const {
    return std::any_of(channels.begin(), channels.end(), [](const NoiseChannel& ch) {
      const auto* ac = std::get_if<AcLineNoise>(&ch);
      return ac && ac->phase_mode == PhaseMode::triggered;
    });
  }

  bool has_persistent_walk() const {
    return std::any_of(channels.begin(), channels.end(), [](const NoiseChannel& ch) {
      const auto* w = std::get_if<RandomWalkDrift>(&ch);
      return w && w->persist_across_shots && w->diffusion > 0.0;
    });
  }
};

// Everything about a shot that is not a random draw.
struct ShotContext {
  double wall_time = 0.0;
  double walk_offset = 0.0;          // persisted random-walk value at shot start, rad/s
  std::vector<double> segment_breaks;  // interior pi-pulse times, for per_segment draws
};

// --- realised components -------------------------------------------------

struct ConstantComponent {
  double value = 0.0;
};

struct SinusoidComponent {
  double amplitude = 0.0;
  double omega = 0.0;
  double chi = 0.0;
};

// values[i] holds on [breaks[i-1], breaks[i]) with implicit outer bounds.
struct PiecewiseConstantComponent {
  std::vector<double> breaks;
  std::vector<double> values;
};

struct PiecewiseLinearComponent {
  std::vector<double> times;
  std::vector<double> values;
};

using DetuningComponent = std::variant<ConstantComponent, SinusoidComponent,
                                       PiecewiseConstantComponent, PiecewiseLinearComponent>;

namespace detail {

inline double component_value(const DetuningComponent& c, double t) {
  return std::visit(
      [t](const auto& x) -> double {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, ConstantComponent>) {
          return x.value;
        } else if constexpr (std::is_same_v<T, SinusoidComponent>) {
          return x.amplitude * std::sin(x.omega * t + x.chi);
        } else if constexpr (std::is_same_v<T, PiecewiseConstantComponent>) {
          const auto idx = std::upper_bound(x.breaks.begin(), x.breaks.end(), t) - x.breaks.begin();
          return x.values[static_cast<std::size_t>(idx)];
        } else {
          if (t <= x.times.front()) return x.values.front();
          if (t >= x.times.back()) return x.values.back();
          const auto it = std::upper_bound(x.times.begin(), x.times.end(), t);
          const auto i = static_cast<std::size_t>(it - x.times.begin());
          const double f = (t - x.times[i - 1]) / (x.times[i] - x.times[i - 1]);
          return x.values[i - 1] + f * (x.values[i] - x.values[i - 1]);
        }
      },
      c);
}

}  // namespace detail

// Detuning signal for one shot, defined on [0, duration]. Holds the realised
// draws; evaluation is pure.
class DetuningTrajectory {
 public:
  DetuningTrajectory() = default;
  DetuningTrajectory(double duration, std::vector<DetuningComponent> components)
      : duration_(duration), components_(std::move(components)) {}

  double duration() const { return duration_; }
  std::span<const DetuningComponent> components() const { return components_; }

  double evaluate(double t) const {
    detail::require(t >= 0.0 && t <= duration_,
                    "evaluate: t outside the shot [0, " + std::to_string(duration_) + "]");
    return value(t);
  }

  // Unchecked evaluation for integrators.
  double value(double t) const {
    double sum = 0.0;
    for (const auto& c : components_) sum += detail::component_value(c, t);
    return sum;
  }

  double component_value(std::size_t i, double t) const {
    return detail::component_value(components_.at(i), t);
  }

  // Sorted interior points where the signal is not smooth.
  std::vector<double> breakpoints() const {
    std::vector<double> out;
    for (const auto& c : components_) {
      if (const auto* pc = std::get_if<PiecewiseConstantComponent>(&c)) {
        out.insert(out.end(), pc->breaks.begin(), pc->breaks.end());
      } else if (const auto* pl = std::get_if<PiecewiseLinearComponent>(&c)) {
        out.insert(out.end(), pl->times.begin(), pl->times.end());
      }
    }
    std::erase_if(out, [this](double t) { return t <= 0.0 || t >= duration_; });
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  // Half periods of every sinusoid. Splitting the quadrature there keeps
  // each piece smooth enough for a single Gauss-Kronrod pass.
  std::vector<double> oscillation_splits() const {
    constexpr double kMaxSplits = 1e5;
    std::vector<double> out;
    for (const auto& c : components_) {
      const auto* s = std::get_if<SinusoidComponent>(&c);
      if (!s || s->omega == 0.0 || s->amplitude == 0.0) continue;
      const double half = std::numbers::pi / std::fabs(s->omega);
      const double n = std::min(kMaxSplits, std::floor(duration_ / half));
      for (double k = 1; k <= n; ++k) out.push_back(k * half);
    }
    std::erase_if(out, [this](double t) { return t >= duration_; });
    std::sort(out.begin(), out.end());
    return out;
  }

  // Realised line phase of the first ac channel, if any.
  std::optional<double> ac_phase() const {
    for (const auto& c : components_) {
      if (const auto* s = std::get_if<SinusoidComponent>(&c)) return s->chi;
    }
    return std::nullopt;
  }

  // Sum of the per-shot constant draws.
  double static_offset() const {
    double sum = 0.0;
    for (const auto& c : components_) {
      if (const auto* k = std::get_if<ConstantComponent>(&c)) sum += k->value;
    }
    return sum;
  }

 private:
  double duration_ = 0.0;
  std::vector<DetuningComponent> components_;
};

namespace detail {

inline DetuningComponent realise(const AcLineNoise& ac, double scale, double,
                                 std::optional<double> trigger_phase, const ShotContext&,
                                 RandomStream& rng) {
  double chi = 0.0;
  if (ac.phase_mode == PhaseMode::triggered) {
    require(trigger_phase.has_value(), "sample_trajectory: triggered ac channel needs a trigger phase");
    chi = *trigger_phase;
  } else {
    chi = rng.uniform(0.0, kTwoPi);
  }
  double omega = ac.omega_ac;
  if (ac.mains_jitter_sigma > 0.0) omega += ac.mains_jitter_sigma * rng.normal();
  return SinusoidComponent{ac.delta_ac * scale, omega, chi};
}

inline DetuningComponent realise(const QuasiStaticGaussianNoise& qs, double scale, double,
                                 std::optional<double>, const ShotContext& ctx,
                                 RandomStream& rng) {
  const double sigma = qs.sigma * scale;
  if (qs.policy == ResamplePolicy::per_shot || ctx.segment_breaks.empty()) {
    return ConstantComponent{sigma * rng.normal()};
  }
  PiecewiseConstantComponent pc;
  pc.breaks = ctx.segment_breaks;
  pc.values.reserve(pc.breaks.size() + 1);
  for (std::size_t i = 0; i <= pc.breaks.size(); ++i) pc.values.push_back(sigma * rng.normal());
  return pc;
}

inline DetuningComponent realise(const RandomWalkDrift& w, double scale, double duration,
                                 std::optional<double>, const ShotContext& ctx,
                                 RandomStream& rng) {
  constexpr std::size_t kMaxKnots = 4096;
  const auto n = std::min<std::size_t>(
      kMaxKnots, std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(duration / w.step - 1e-9))));
  const double dt = duration / static_cast<double>(n);
  const double kick = std::sqrt(w.diffusion * dt);
  PiecewiseLinearComponent pl;
  pl.times.reserve(n + 1);
  pl.values.reserve(n + 1);
  double v = w.persist_across_shots ? ctx.walk_offset : 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    if (i > 0) v += kick * rng.normal();
    pl.times.push_back(static_cast<double>(i) * dt);
    pl.values.push_back(v * scale);
  }
  pl.times.back() = duration;
  return pl;
}

inline DetuningComponent realise(const PositionGradientNoise& g, double, double,
                                 std::optional<double>, const ShotContext&, RandomStream& rng) {
  return ConstantComponent{g.gradient * g.position_sigma * rng.normal()};
}

inline DetuningComponent realise(const ThermalDriftNoise& th, double, double duration,
                                 std::optional<double>, const ShotContext& ctx, RandomStream&) {
  PiecewiseLinearComponent pl;
  const double w0 = ctx.wall_time;
  pl.times.push_back(0.0);
  pl.values.push_back(th.detuning_at(w0));
  for (const auto& p : th.trajectory) {
    if (p.time > w0 && p.time < w0 + duration) {
      pl.times.push_back(p.time - w0);
      pl.values.push_back(th.detuning_at(p.time));
    }
  }
  pl.times.push_back(duration);
  pl.values.push_back(th.detuning_at(w0 + duration));
  return pl;
}

}  // namespace detail

// Draws one shot's detuning trajectory. `trigger_phase` fixes chi_ac for
// triggered ac channels; free-running channels draw chi_ac ~ U[0, 2 pi).
inline DetuningTrajectory sample_trajectory(const CompositeNoise& noise, double duration,
                                            std::optional<double> trigger_phase,
                                            std::uint64_t shot_seed, const ShotContext& ctx = {}) {
  detail::require(duration > 0.0 && std::isfinite(duration),
                  "sample_trajectory: duration must be positive");
  const double field_scale = noise.field_scale();
  std::vector<DetuningComponent> comps;
  comps.reserve(noise.channels.size());
  for (std::size_t i = 0; i < noise.channels.size(); ++i) {
    const auto& ch = noise.channels[i];
    RandomStream rng(shot_seed, {static_cast<std::uint64_t>(i)});
    const double scale = is_field_derived(ch) ? field_scale : 1.0;
    comps.push_back(std::visit(
        [&](const auto& c) {
          return detail::realise(c, scale, duration, trigger_phase, ctx, rng);
        },
        ch));
  }
  return DetuningTrajectory(duration, std::move(comps));
}

// Cross-shot random-walk offsets for `shots` consecutive shots. Only the
// first persistent walk channel contributes; the sequence is drawn from its
// own stream so it does not depend on how shots are scheduled.
inline std::vector<double> persistent_walk_offsets(const CompositeNoise& noise, std::size_t shots,
                                                   std::uint64_t seed) {
  std::vector<double> out(shots, 0.0);
  for (const auto& ch : noise.channels) {
    const auto* w = std::get_if<RandomWalkDrift>(&ch);
    if (!w || !w->persist_across_shots || w->diffusion <= 0.0) continue;
    RandomStream rng(seed);
    const double kick = std::sqrt(w->diffusion * w->shot_interval);
    double v = 0.0;
    for (std::size_t k = 0; k < shots; ++k) {
      out[k] = v;
      v += kick * rng.normal();
    }
    break;
  }
  return out;
}

}  // namespace zq
