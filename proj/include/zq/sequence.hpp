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

// Ideal pulse sequences (Ramsey, spin echo, CPMG-style multi-echo) and the
// sign-weighted phase integral they define.
//
// Readout convention. The first pi/2 pulse has axis phase 0 and turns +z
// into -y. Interior pi pulses default to axis phase pi/2 (along the prepared
// state), so every default sequence maps an accumulated phase phi and
// contrast C onto
//
//     p_up(theta) = (1 - C cos(phi - theta)) / 2,
//
// theta being the analysis phase of the final pi/2 pulse: theta = 0 is the X
// basis and theta = pi/2 the Y basis. outcome_probability() computes the
// rotations explicitly, so non-default pulse axes are handled as well.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "zq/errors.hpp"
#include "zq/noise.hpp"

namespace zq {

inline constexpr double kHalfPi = std::numbers::pi / 2.0;

enum class Basis { x, y };

inline double analysis_phase_of(Basis b) { return b == Basis::x ? 0.0 : kHalfPi; }

struct Pulse {
  double time = 0.0;        // s
  double angle = 0.0;       // rotation angle, rad
  double axis_phase = 0.0;  // rad
};

// +1 before the first interior pi pulse, flipping at each one.
struct SignFunction {
  std::vector<double> flips;

  int operator()(double t) const {
    const auto n = std::upper_bound(flips.begin(), flips.end(), t) - flips.begin();
    return (n % 2 == 0) ? 1 : -1;
  }
};

struct SignedSegment {
  double begin = 0.0;
  double end = 0.0;
  int sign = 1;
};

class PulseSequence {
 public:
  PulseSequence(double wait_time, std::vector<Pulse> pulses, double analysis_phase)
      : wait_time_(wait_time), pulses_(std::move(pulses)), analysis_phase_(analysis_phase) {
    validate();
  }

  double wait_time() const { return wait_time_; }
  double analysis_phase() const { return analysis_phase_; }
  const std::vector<Pulse>& pulses() const { return pulses_; }

  std::vector<double> pi_times() const {
    std::vector<double> out;
    for (std::size_t i = 1; i + 1 < pulses_.size(); ++i) out.push_back(pulses_[i].time);
    return out;
  }

  SignFunction sign_function() const { return SignFunction{pi_times()}; }

  std::vector<SignedSegment> segments() const {
    std::vector<SignedSegment> out;
    int sign = 1;
    double start = 0.0;
    for (double t : pi_times()) {
      out.push_back({start, t, sign});
      start = t;
      sign = -sign;
    }
    out.push_back({start, wait_time_, sign});
    return out;
  }

  // Same pulses, different final analysis phase.
  PulseSequence with_analysis_phase(double phase) const {
    auto p = pulses_;
    p.back().axis_phase = phase;
    return PulseSequence(wait_time_, std::move(p), phase);
  }

  friend bool operator==(const PulseSequence& a, const PulseSequence& b) {
    if (a.wait_time_ != b.wait_time_ || a.analysis_phase_ != b.analysis_phase_ ||
        a.pulses_.size() != b.pulses_.size())
      return false;
    for (std::size_t i = 0; i < a.pulses_.size(); ++i) {
      const auto& x = a.pulses_[i];
      const auto& y = b.pulses_[i];
      if (x.time != y.time || x.angle != y.angle || x.axis_phase != y.axis_phase) return false;
    }
    return true;
  }

 private:
  void validate() const {
    detail::require(wait_time_ > 0.0 && std::isfinite(wait_time_),
                    "pulse sequence: wait time must be positive");
    detail::require(pulses_.size() >= 2, "pulse sequence: needs opening and closing pi/2 pulses");
    detail::require(pulses_.front().time == 0.0 && pulses_.back().time == wait_time_,
                    "pulse sequence: first pulse at 0 and last at the wait time");
    detail::require(pulses_.front().angle == kHalfPi && pulses_.back().angle == kHalfPi,
                    "pulse sequence: opening and closing pulses must be pi/2 rotations");
    for (std::size_t i = 1; i < pulses_.size(); ++i) {
      detail::require(pulses_[i].time > pulses_[i - 1].time,
                      "pulse sequence: pulse times must be strictly increasing");
    }
    for (std::size_t i = 1; i + 1 < pulses_.size(); ++i) {
      detail::require(pulses_[i].angle == std::numbers::pi,
                      "pulse sequence: interior pulses must be pi rotations");
    }
  }

  double wait_time_;
  std::vector<Pulse> pulses_;
  double analysis_phase_;
};

inline PulseSequence multi_echo(double tau, const std::vector<double>& pi_times,
                                double analysis_phase = 0.0) {
  detail::require(tau > 0.0 && std::isfinite(tau), "multi_echo: tau must be positive");
  for (std::size_t i = 0; i < pi_times.size(); ++i) {
    detail::require(pi_times[i] > 0.0 && pi_times[i] < tau,
                    "multi_echo: pi pulse times must lie inside (0, tau)");
    if (i > 0) {
      detail::require(pi_times[i] > pi_times[i - 1],
                      "multi_echo: pi pulse times must be strictly increasing");
    }
  }
  std::vector<Pulse> pulses;
  pulses.push_back({0.0, kHalfPi, 0.0});
  for (double t : pi_times) pulses.push_back({t, std::numbers::pi, kHalfPi});
  pulses.push_back({tau, kHalfPi, analysis_phase});
  return PulseSequence(tau, std::move(pulses), analysis_phase);
}

inline PulseSequence ramsey(double tau, double analysis_phase = 0.0) {
  detail::require(tau > 0.0, "ramsey: tau must be positive");
  return multi_echo(tau, {}, analysis_phase);
}

inline PulseSequence spin_echo(double tau, double analysis_phase = 0.0) {
  detail::require(tau > 0.0, "spin_echo: tau must be positive");
  return multi_echo(tau, {tau / 2.0}, analysis_phase);
}

// n pi pulses at tau (k - 1/2) / n.
inline PulseSequence cpmg(double tau, int n, double analysis_phase = 0.0) {
  detail::require(tau > 0.0, "cpmg: tau must be positive");
  detail::require(n >= 0, "cpmg: pulse count must be non-negative");
  std::vector<double> times;
  for (int k = 1; k <= n; ++k) times.push_back(tau * (k - 0.5) / n);
  return multi_echo(tau, times, analysis_phase);
}

// Declarative sequence type as written in configs and on the command line:
// "ramsey", "echo" or "cpmg:<n>".
struct SequenceSpec {
  enum class Kind { ramsey, echo, cpmg };
  Kind kind = Kind::ramsey;
  int pulses = 0;

  PulseSequence make(double tau, double analysis_phase = 0.0) const {
    switch (kind) {
      case Kind::ramsey: return ramsey(tau, analysis_phase);
      case Kind::echo: return spin_echo(tau, analysis_phase);
      case Kind::cpmg: return cpmg(tau, pulses, analysis_phase);
    }
    return ramsey(tau, analysis_phase);
  }

  int pi_pulse_count() const {
    switch (kind) {
      case Kind::ramsey: return 0;
      case Kind::echo: return 1;
      case Kind::cpmg: return pulses;
    }
    return 0;
  }

  std::string to_string() const {
    switch (kind) {
      case Kind::ramsey: return "ramsey";
      case Kind::echo: return "echo";
      case Kind::cpmg: return "cpmg:" + std::to_string(pulses);
    }
    return "ramsey";
  }

  static SequenceSpec parse(std::string_view s) {
    if (s == "ramsey") return {Kind::ramsey, 0};
    if (s == "echo" || s == "spin_echo" || s == "spin-echo") return {Kind::echo, 1};
    if (s.starts_with("cpmg:")) {
      const auto digits = s.substr(5);
      int n = -1;
      const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
      detail::require(ec == std::errc() && ptr == digits.data() + digits.size() && n >= 1,
                      "sequence: cpmg needs a positive pulse count, e.g. cpmg:4");
      return {Kind::cpmg, n};
    }
    throw ValidationError("sequence: expected ramsey, echo or cpmg:<n>, got '" + std::string(s) +
                          "'");
  }

  friend bool operator==(const SequenceSpec&, const SequenceSpec&) = default;
};

struct QuadratureOptions {
  double tolerance = 1e-12;  // absolute, rad per segment
  unsigned max_depth = 18;
};

namespace detail {

// Bisection driver around Boost's 15-point Gauss-Kronrod rule. Boost's own
// recursion compares the [-1, 1] error estimate (not rescaled to [a, b]) with
// a tolerance that halves per level, so once rounding in the integrand sets
// the error floor it always recurses to full depth.
template <class F>
double adaptive_gk15(const F& f, double a, double b, double abs_tol, unsigned depth) {
  using Rule = boost::math::quadrature::gauss_kronrod<double, 15>;
  double err = 0.0, l1 = 0.0;
  const double r = Rule::integrate(f, a, b, 0, 0.0, &err, &l1);
  err *= 0.5 * (b - a);
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * l1;
  if (depth == 0 || err <= std::max(abs_tol, floor)) return r;
  const double mid = 0.5 * (a + b);
  return adaptive_gk15(f, a, mid, 0.5 * abs_tol, depth - 1) + adaptive_gk15(f, mid, b, 0.5 * abs_tol, depth - 1);
}

}  // namespace detail

// phi = integral_0^tau s(t) Delta(t) dt, integrated segment by segment with
// boundaries at every sign flip, every trajectory kink and every half period
// of a sinusoidal channel.
inline double accumulated_phase(const PulseSequence& seq, const DetuningTrajectory& traj,
                                QuadratureOptions opt = {}) {
  const double tau = seq.wait_time();
  detail::require(traj.duration() >= tau * (1.0 - 1e-12),
                  "accumulated_phase: trajectory is shorter than the sequence");
  std::vector<double> cuts = traj.breakpoints();
  const auto osc = traj.oscillation_splits();
  cuts.insert(cuts.end(), osc.begin(), osc.end());
  std::sort(cuts.begin(), cuts.end());
  std::erase_if(cuts, [tau](double t) { return t >= tau; });

  auto f = [&traj](double t) { return traj.value(t); };
  double phi = 0.0;
  for (const auto& seg : seq.segments()) {
    double a = seg.begin;
    auto it = std::upper_bound(cuts.begin(), cuts.end(), a);
    while (a < seg.end) {
      const double b = (it != cuts.end() && *it < seg.end) ? *it++ : seg.end;
      if (b > a) phi += seg.sign * detail::adaptive_gk15(f, a, b, opt.tolerance, opt.max_depth);
      a = b;
    }
  }
  return phi;
}

namespace detail {

using Vec3 = std::array<double, 3>;

// Rotation by `angle` about the equatorial axis (cos phase, sin phase, 0).
inline Vec3 rotate_equatorial(const Vec3& v, double angle, double phase) {
  const double nx = std::cos(phase), ny = std::sin(phase);
  const double c = std::cos(angle), s = std::sin(angle);
  const double dot = nx * v[0] + ny * v[1];
  const Vec3 cross{ny * v[2], -nx * v[2], nx * v[1] - ny * v[0]};
  return {v[0] * c + cross[0] * s + nx * dot * (1.0 - c),
          v[1] * c + cross[1] * s + ny * dot * (1.0 - c), v[2] * c + cross[2] * s};
}

inline Vec3 rotate_z(const Vec3& v, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {v[0] * c - v[1] * s, v[0] * s + v[1] * c, v[2]};
}

}  // namespace detail

// Probability of the bright |up> outcome after `seq` with sign-weighted phase
// `phi`, for a superposition of contrast C. All free precession is moved in
// front of the closing pulse, which is exact for ideal pi pulses.
inline double outcome_probability(const PulseSequence& seq, double phi, double contrast = 1.0) {
  const auto& p = seq.pulses();
  detail::Vec3 v{0.0, 0.0, 1.0};
  v = detail::rotate_equatorial(v, p.front().angle, p.front().axis_phase);
  for (std::size_t i = 1; i + 1 < p.size(); ++i) {
    v = detail::rotate_equatorial(v, p[i].angle, p[i].axis_phase);
  }
  v = detail::rotate_z(v, phi);
  v = {contrast * v[0], contrast * v[1], v[2]};
  v = detail::rotate_equatorial(v, p.back().angle, p.back().axis_phase);
  return std::clamp(0.5 * (1.0 + v[2]), 0.0, 1.0);
}

// |integral_0^tau s(t) exp(i omega t) dt| / tau.
inline double filter_transfer(const PulseSequence& seq, double omega) {
  detail::require(omega >= 0.0, "filter_transfer: omega must be non-negative");
  std::complex<double> acc = 0.0;
  for (const auto& seg : seq.segments()) {
    std::complex<double> piece;
    if (omega == 0.0) {
      piece = seg.end - seg.begin;
    } else {
      const std::complex<double> i(0.0, 1.0);
      piece = (std::exp(i * omega * seg.end) - std::exp(i * omega * seg.begin)) / (i * omega);
    }
    acc += static_cast<double>(seg.sign) * piece;
  }
  return std::abs(acc) / seq.wait_time();
}

// Closed form of the echo phase for a pure sinusoidal detuning
// delta sin(omega t + chi): -(4 delta / omega) sin^2(omega tau / 4) cos(omega tau / 2 + chi).
inline double echo_phase_sinusoid(double tau, double delta, double omega, double chi) {
  const double s = std::sin(omega * tau / 4.0);
  return -(4.0 * delta / omega) * s * s * std::cos(omega * tau / 2.0 + chi);
}

// Ramsey counterpart: (2 delta / omega) sin(omega tau / 2) sin(omega tau / 2 + chi).
inline double ramsey_phase_sinusoid(double tau, double delta, double omega, double chi) {
  return (2.0 * delta / omega) * std::sin(omega * tau / 2.0) * std::sin(omega * tau / 2.0 + chi);
}

}  // namespace zq
