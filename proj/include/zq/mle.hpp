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

// Maximum-likelihood coherence from X/Y binomial counts.
//
// With balanced populations the bright probabilities are
//   p_x = (1 - C cos phi) / 2,   p_y = (1 - C sin phi) / 2
// (see sequence.hpp), i.e. affine in (u, v) = C (cos phi, sin phi). The
// log-likelihood is concave in (u, v), so the constrained optimum over the
// unit disk is either the empirical inversion u = 1 - 2 k_x / n_x,
// v = 1 - 2 k_y / n_y (when it lies inside) or a point on the C = 1 circle.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <utility>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "zq/errors.hpp"
#include "zq/measurement.hpp"

namespace zq {

struct CoherenceEstimate {
  double contrast = 0.0;    // C = 2 |rho_12|, in [0, 1]
  double phase = 0.0;       // (-pi, pi]
  // Larger distance from C to an end of the 68 % interval; equals the
  // half-width for a symmetric interval and stays honest when C sits on 1.
  double confidence = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double loglik = 0.0;
  bool phase_defined = true;  // false at C = 0
  bool on_boundary = false;   // constrained to C = 1
};

inline double wrap_phase(double phi) {
  double r = std::remainder(phi, 2.0 * std::numbers::pi);
  if (r <= -std::numbers::pi) r += 2.0 * std::numbers::pi;
  return r;
}

namespace detail {

// k log p with 0 log 0 = 0.
inline double xlogp(double k, double p) {
  if (k == 0.0) return 0.0;
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  return k * std::log(p);
}

inline double basis_loglik(long shots, long bright, double expectation) {
  const double p_bright = std::clamp(0.5 * (1.0 - expectation), 0.0, 1.0);
  return xlogp(static_cast<double>(bright), p_bright) +
         xlogp(static_cast<double>(shots - bright), 1.0 - p_bright);
}

}  // namespace detail

// log L(C, phi) without the binomial coefficients.
inline double coherence_loglik(const MeasurementRecord& r, double contrast, double phase) {
  return detail::basis_loglik(r.shots_x, r.bright_x, contrast * std::cos(phase)) +
         detail::basis_loglik(r.shots_y, r.bright_y, contrast * std::sin(phase));
}

struct MleOptions {
  int phase_grid = 256;          // coarse scan before the 1-D refinement on a circle
  double interval_level = 0.5;   // log-likelihood drop; 0.5 gives the 68 % interval
  bool with_interval = true;
};

namespace detail {

// Maximises the likelihood over phi on the circle of radius C.
inline std::pair<double, double> best_phase_on_circle(const MeasurementRecord& r, double contrast,
                                                      int grid) {
  const double step = 2.0 * std::numbers::pi / grid;
  double best_phi = 0.0;
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid; ++i) {
    const double phi = -std::numbers::pi + step * i;
    const double l = coherence_loglik(r, contrast, phi);
    if (l > best) {
      best = l;
      best_phi = phi;
    }
  }
  auto neg = [&](double phi) { return -coherence_loglik(r, contrast, phi); };
  const auto [phi, negl] = boost::math::tools::brent_find_minima(
      neg, best_phi - step, best_phi + step, std::numeric_limits<double>::digits / 2);
  if (-negl >= best) return {wrap_phase(phi), -negl};
  return {best_phi, best};
}

}  // namespace detail

// max_phi log L(C, phi).
inline double profile_loglik(const MeasurementRecord& r, double contrast, int grid = 256) {
  if (contrast == 0.0) return coherence_loglik(r, 0.0, 0.0);
  return detail::best_phase_on_circle(r, contrast, grid).second;
}

inline CoherenceEstimate mle_coherence(const MeasurementRecord& r, MleOptions opt = {}) {
  detail::require(r.shots_x > 0 && r.shots_y > 0, "mle_coherence: record has zero shots");
  r.validate();

  CoherenceEstimate est;
  const double u = 1.0 - 2.0 * static_cast<double>(r.bright_x) / static_cast<double>(r.shots_x);
  const double v = 1.0 - 2.0 * static_cast<double>(r.bright_y) / static_cast<double>(r.shots_y);
  const double radius = std::hypot(u, v);
  if (radius <= 1.0) {
    est.contrast = radius;
    est.phase_defined = radius > 0.0;
    est.phase = est.phase_defined ? wrap_phase(std::atan2(v, u)) : 0.0;
    est.loglik = coherence_loglik(r, est.contrast, est.phase);
  } else {
    const auto [phi, l] = detail::best_phase_on_circle(r, 1.0, opt.phase_grid);
    est.contrast = 1.0;
    est.phase = phi;
    est.loglik = l;
    est.on_boundary = true;
  }

  if (!opt.with_interval) return est;

  // The profile likelihood is quasi-concave in C (radii of a convex
  // superlevel set form an interval), so each side has a single crossing.
  const double target = est.loglik - opt.interval_level;
  auto excess = [&](double c) { return profile_loglik(r, c, opt.phase_grid) - target; };
  auto tol = boost::math::tools::eps_tolerance<double>(40);
  auto solve = [&](double a, double b, double fa, double fb) {
    std::uintmax_t iters = 200;
    const auto [lo, hi] = boost::math::tools::toms748_solve(excess, a, b, fa, fb, tol, iters);
    return 0.5 * (lo + hi);
  };

  const double at_zero = excess(0.0);
  est.ci_low = (at_zero >= 0.0 || est.contrast == 0.0) ? 0.0
                                                       : solve(0.0, est.contrast, at_zero, opt.interval_level);
  const double at_one = excess(1.0);
  est.ci_high = (at_one >= 0.0 || est.contrast == 1.0) ? 1.0
                                                       : solve(est.contrast, 1.0, opt.interval_level, at_one);
  est.confidence = std::max(est.contrast - est.ci_low, est.ci_high - est.contrast);
  return est;
}

}  // namespace zq
