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

// Decay-model fits of contrast versus wait time, and the short-Ramsey
// measurement of the ac-line modulation depth.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "zq/errors.hpp"
#include "zq/mle.hpp"
#include "zq/special_functions.hpp"

namespace zq {

// Echo contrast under a sinusoidal line modulation averaged over a uniformly
// distributed line phase: J0((4 delta / omega) sin^2(omega tau / 4)).
// Signed; a measured contrast corresponds to its modulus.
inline double ac_line_contrast_model(double tau, double delta_ac, double omega_ac) {
  detail::require(delta_ac >= 0.0, "ac_line_contrast_model: delta_ac must be non-negative");
  detail::require(omega_ac > 0.0, "ac_line_contrast_model: omega_ac must be positive");
  const double s = std::sin(0.25 * omega_ac * tau);
  return bessel_j0(4.0 * delta_ac / omega_ac * s * s);
}

inline double gaussian_decay_model(double tau, double tau_d) {
  return std::exp(-tau * tau / (2.0 * tau_d * tau_d));
}

enum class DecayModel { gaussian, ac_line };

inline std::string to_string(DecayModel m) {
  return m == DecayModel::gaussian ? "gaussian" : "ac_line";
}

struct ContrastPoint {
  double tau = 0.0;
  double contrast = 0.0;
  double sigma = 0.0;  // 68 % half-width; 0 means unknown
};

inline std::vector<ContrastPoint> to_points(const std::vector<std::pair<double, CoherenceEstimate>>& xs) {
  std::vector<ContrastPoint> out;
  out.reserve(xs.size());
  for (const auto& [tau, e] : xs) out.push_back({tau, e.contrast, e.confidence});
  return out;
}

struct DecayFit {
  DecayModel model = DecayModel::gaussian;
  double value = 0.0;   // tau_d in s, or delta_ac in rad/s
  double stderr = 0.0;
  double residual_norm = 0.0;  // sqrt(sum w r^2)
  std::size_t n_points = 0;
  bool diverged = false;  // best fit at the edge of the search range (e.g. no decay)
  std::string message;

  // Time after which the contrast stays below 1/sqrt(e), interpolated on the
  // data. Censored when the last point is still above the threshold.
  double threshold_time = 0.0;
  bool threshold_censored = false;
};

namespace detail {

inline std::vector<ContrastPoint> sorted_points(std::vector<ContrastPoint> pts) {
  std::sort(pts.begin(), pts.end(), [](const ContrastPoint& a, const ContrastPoint& b) {
    if (a.tau != b.tau) return a.tau < b.tau;
    if (a.contrast != b.contrast) return a.contrast < b.contrast;
    return a.sigma < b.sigma;
  });
  return pts;
}

// Inverse-variance weights from the point half-widths. Unknown widths give
// equal weights; zero widths among known ones get the smallest known width.
inline std::vector<double> weights_of(const std::vector<ContrastPoint>& pts) {
  double min_sigma = std::numeric_limits<double>::infinity();
  for (const auto& p : pts) {
    if (p.sigma > 0.0) min_sigma = std::min(min_sigma, p.sigma);
  }
  std::vector<double> w(pts.size(), 1.0);
  if (!std::isfinite(min_sigma)) return w;
  min_sigma = std::max(min_sigma, 1e-4);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double s = std::max(pts[i].sigma, min_sigma);
    w[i] = 1.0 / (s * s);
  }
  return w;
}

struct OneParameterResult {
  double value = 0.0;
  double stderr = 0.0;
  double chi2 = 0.0;
  bool at_upper_edge = false;
  bool at_lower_edge = false;
};

// Weighted least squares over a single parameter: scan `grid` (increasing)
// for the best point, then polish on the stationarity condition.
template <class Model, class Derivative>
OneParameterResult fit_one_parameter(const std::vector<ContrastPoint>& pts,
                                     const std::vector<double>& w, const std::vector<double>& grid,
                                     Model model, Derivative dmodel) {
  auto chi2 = [&](double theta) {
    double s = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double r = pts[i].contrast - model(pts[i].tau, theta);
      s += w[i] * r * r;
    }
    return s;
  };
  // d chi2 / d theta, up to a factor -2.
  auto gradient = [&](double theta) {
    double s = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      s += w[i] * (pts[i].contrast - model(pts[i].tau, theta)) * dmodel(pts[i].tau, theta);
    }
    return s;
  };

  std::size_t best = 0;
  double best_chi2 = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double c = chi2(grid[j]);
    if (c < best_chi2) {
      best_chi2 = c;
      best = j;
    }
  }

  OneParameterResult res;
  res.at_upper_edge = best + 1 == grid.size();
  res.at_lower_edge = best == 0;
  res.value = grid[best];
  res.chi2 = best_chi2;
  if (!res.at_upper_edge && !res.at_lower_edge) {
    const double a = grid[best - 1], b = grid[best + 1];
    const double ga = gradient(a), gb = gradient(b);
    double theta = res.value;
    if (ga > 0.0 && gb < 0.0) {
      std::uintmax_t iters = 200;
      const auto [lo, hi] = boost::math::tools::toms748_solve(
          gradient, a, b, ga, gb, boost::math::tools::eps_tolerance<double>(52), iters);
      theta = 0.5 * (lo + hi);
    } else {
      theta = boost::math::tools::brent_find_minima(chi2, a, b,
                                                    std::numeric_limits<double>::digits / 2)
                  .first;
    }
    if (chi2(theta) <= best_chi2) {
      res.value = theta;
      res.chi2 = chi2(theta);
    }
  }

  double info = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d = dmodel(pts[i].tau, res.value);
    info += w[i] * d * d;
  }
  const double dof = pts.size() > 1 ? static_cast<double>(pts.size() - 1) : 1.0;
  res.stderr = info > 0.0 ? std::sqrt(res.chi2 / dof / info) : 0.0;
  return res;
}

inline std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  std::vector<double> g(n);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i) g[i] = std::exp(a + (b - a) * i / (n - 1));
  return g;
}

inline void require_distinct_taus(const std::vector<ContrastPoint>& pts, std::size_t min_count,
                                  const char* who) {
  std::size_t distinct = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    detail::require(std::isfinite(pts[i].tau) && pts[i].tau >= 0.0 &&
                        std::isfinite(pts[i].contrast),
                    std::string(who) + ": points must be finite with tau >= 0");
    if (i == 0 || pts[i].tau != pts[i - 1].tau) ++distinct;
  }
  detail::require(distinct >= min_count, std::string(who) + ": needs at least " +
                                             std::to_string(min_count) + " distinct wait times");
}

}  // namespace detail

inline constexpr double kInvSqrtE = 0.60653065971263342360;

// Last downward crossing of 1/sqrt(e) on sorted data.
inline std::pair<double, bool> threshold_crossing(std::vector<ContrastPoint> pts,
                                                  double threshold = kInvSqrtE) {
  pts = detail::sorted_points(std::move(pts));
  if (pts.empty()) return {0.0, false};
  std::optional<std::size_t> last_above;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].contrast >= threshold) last_above = i;
  }
  if (!last_above) return {pts.front().tau, false};
  const std::size_t j = *last_above;
  if (j + 1 == pts.size()) return {pts.back().tau, true};
  const auto& a = pts[j];
  const auto& b = pts[j + 1];
  const double f = (a.contrast - threshold) / (a.contrast - b.contrast);
  return {a.tau + f * (b.tau - a.tau), false};
}

// Fits exp(-tau^2 / 2 tau_d^2). Data without decay over the search range is
// reported as diverged rather than as an error.
inline DecayFit fit_gaussian_decay(std::vector<ContrastPoint> points) {
  auto pts = detail::sorted_points(std::move(points));
  detail::require_distinct_taus(pts, 3, "fit_gaussian_decay");
  const auto w = detail::weights_of(pts);

  double tau_max = 0.0, tau_min_pos = std::numeric_limits<double>::infinity();
  for (const auto& p : pts) {
    tau_max = std::max(tau_max, p.tau);
    if (p.tau > 0.0) tau_min_pos = std::min(tau_min_pos, p.tau);
  }
  const auto grid = detail::log_grid(tau_min_pos / 50.0, tau_max * 1e4, 600);
  auto model = [](double tau, double td) { return gaussian_decay_model(tau, td); };
  auto dmodel = [](double tau, double td) {
    return gaussian_decay_model(tau, td) * tau * tau / (td * td * td);
  };
  const auto r = detail::fit_one_parameter(pts, w, grid, model, dmodel);

  DecayFit fit;
  fit.model = DecayModel::gaussian;
  fit.n_points = pts.size();
  fit.residual_norm = std::sqrt(r.chi2);
  if (r.at_upper_edge) {
    fit.diverged = true;
    fit.value = std::numeric_limits<double>::infinity();
    fit.stderr = std::numeric_limits<double>::infinity();
    fit.message = "no decay resolved: tau_d exceeds the search range";
  } else {
    fit.value = r.value;
    fit.stderr = r.stderr;
    if (r.at_lower_edge) {
      fit.diverged = true;
      fit.message = "decay faster than the shortest wait time";
    }
  }
  std::tie(fit.threshold_time, fit.threshold_censored) = threshold_crossing(pts);
  return fit;
}

struct AcLineFitOptions {
  double omega_ac = 2.0 * std::numbers::pi * 50.0;
  double delta_max = 2.0 * std::numbers::pi * 5000.0;  // upper end of the search, rad/s
};

// One-parameter fit of |J0((4 delta / omega) sin^2(omega tau / 4))| over delta.
inline DecayFit fit_ac_line_model(std::vector<ContrastPoint> points, AcLineFitOptions opt = {}) {
  auto pts = detail::sorted_points(std::move(points));
  detail::require_distinct_taus(pts, 5, "fit_ac_line_model");
  detail::require(opt.omega_ac > 0.0 && opt.delta_max > 0.0,
                  "fit_ac_line_model: omega_ac and delta_max must be positive");
  const auto w = detail::weights_of(pts);

  const double omega = opt.omega_ac;
  double max_s2 = 0.0;
  for (const auto& p : pts) {
    const double s = std::sin(0.25 * omega * p.tau);
    max_s2 = std::max(max_s2, s * s);
  }
  // On a revival the contrast is 1 whatever delta is.
  detail::require(max_s2 > 1e-6, "fit_ac_line_model: every wait time sits on a revival; delta_ac is not identifiable");
  // J0 oscillates with period ~2 pi in its argument; resolve that in delta.
  const double period = 2.0 * std::numbers::pi * omega / (4.0 * std::max(max_s2, 1e-12));
  const std::size_t n =
      std::clamp<std::size_t>(static_cast<std::size_t>(20.0 * opt.delta_max / period) + 2, 200, 200000);
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) grid[i] = opt.delta_max * static_cast<double>(i) / (n - 1);

  auto arg = [omega](double tau, double delta) {
    const double s = std::sin(0.25 * omega * tau);
    return 4.0 * delta / omega * s * s;
  };
  auto model = [&](double tau, double delta) { return std::fabs(bessel_j0(arg(tau, delta))); };
  auto dmodel = [&](double tau, double delta) {
    const double x = arg(tau, delta);
    const double s = std::sin(0.25 * omega * tau);
    const double dx = 4.0 / omega * s * s;
    const double sign = bessel_j0(x) >= 0.0 ? 1.0 : -1.0;
    return -sign * bessel_j1(x) * dx;
  };
  const auto r = detail::fit_one_parameter(pts, w, grid, model, dmodel);

  DecayFit fit;
  fit.model = DecayModel::ac_line;
  fit.n_points = pts.size();
  fit.value = r.value;
  fit.stderr = r.stderr;
  fit.residual_norm = std::sqrt(r.chi2);
  if (r.at_upper_edge) {
    fit.diverged = true;
    fit.message = "delta_ac at the upper end of the search range; raise delta_max";
  }
  std::tie(fit.threshold_time, fit.threshold_censored) = threshold_crossing(pts);
  return fit;
}

inline DecayFit fit_gaussian_decay(const std::vector<std::pair<double, CoherenceEstimate>>& xs) {
  return fit_gaussian_decay(to_points(xs));
}

inline DecayFit fit_ac_line_model(const std::vector<std::pair<double, CoherenceEstimate>>& xs,
                                  AcLineFitOptions opt = {}) {
  return fit_ac_line_model(to_points(xs), opt);
}

// --- short Ramsey at fixed line phases ------------------------------------

struct LinePhaseRecord {
  double chi = 0.0;  // line phase at sequence start, rad
  MeasurementRecord record;
};

struct DeviationEstimate {
  double delta_ac = 0.0;         // rad/s
  double stderr = 0.0;           // rad/s
  double phase_amplitude = 0.0;  // fitted amplitude of phi(chi), rad
  double phase_shift = 0.0;      // theta in phi = c + a sin(chi + theta)
  double phase_offset = 0.0;     // c
  std::size_t n_points = 0;
};

// For a Ramsey wait tau at line phase chi the accumulated phase is
//   phi(chi) = c + (2 delta / omega) sin(omega tau / 2) sin(chi + omega tau / 2),
// which reduces to delta tau sin(chi) for omega tau << 1. The sinusoid is
// fitted on the circle (maximising |sum w e^{i (phi_k - model_k)}|) because
// the measured phases are only known modulo 2 pi.
inline DeviationEstimate short_ramsey_deviation(const std::vector<LinePhaseRecord>& records,
                                                double omega_ac = 2.0 * std::numbers::pi * 50.0,
                                                double max_amplitude = 3.0 * std::numbers::pi) {
  detail::require(omega_ac > 0.0, "short_ramsey_deviation: omega_ac must be positive");
  detail::require(!records.empty(), "short_ramsey_deviation: no records");
  const double tau = records.front().record.wait_time;
  std::vector<double> chis;
  for (const auto& r : records) {
    detail::require(r.record.wait_time == tau,
                    "short_ramsey_deviation: all records must share one wait time");
    chis.push_back(std::remainder(r.chi, 2.0 * std::numbers::pi));
  }
  std::sort(chis.begin(), chis.end());
  const auto distinct = std::unique(chis.begin(), chis.end()) - chis.begin();
  detail::require(distinct >= 4, "short_ramsey_deviation: needs at least 4 distinct line phases");
  detail::require(omega_ac * tau < 1.0,
                  "short_ramsey_deviation: wait time too long (need omega_ac * tau < 1)");

  const std::size_t n = records.size();
  std::vector<double> phi(n), chi(n), w(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto e = mle_coherence(records[k].record, {.with_interval = false});
    phi[k] = e.phase;
    chi[k] = records[k].chi;
    w[k] = e.contrast;
  }

  auto resultant = [&](double a, double theta) {
    std::complex<double> s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += w[k] * std::polar(1.0, phi[k] - a * std::sin(chi[k] + theta));
    return s;
  };
  auto score = [&](double a, double theta) { return std::abs(resultant(a, theta)); };

  const int na = std::max(2, static_cast<int>(max_amplitude / 0.02));
  constexpr int nt = 180;
  const double da = max_amplitude / na, dt = 2.0 * std::numbers::pi / nt;
  double best_a = 0.0, best_t = 0.0, best = -1.0;
  for (int i = 0; i <= na; ++i) {
    for (int j = 0; j < nt; ++j) {
      const double s = score(i * da, j * dt);
      if (s > best + 1e-12) {
        best = s;
        best_a = i * da;
        best_t = j * dt;
      }
    }
  }
  // Coordinate refinement around the grid optimum.
  double a = best_a, theta = best_t, step_a = da, step_t = dt;
  for (int round = 0; round < 6; ++round) {
    const double lo = std::max(0.0, a - step_a);
    a = boost::math::tools::brent_find_minima([&](double x) { return -score(x, theta); }, lo,
                                              a + step_a, 40)
            .first;
    theta = boost::math::tools::brent_find_minima([&](double t) { return -score(a, t); },
                                                  theta - step_t, theta + step_t, 40)
                .first;
    step_a *= 0.5;
    step_t *= 0.5;
  }
  if (score(a, theta) < best) {
    a = best_a;
    theta = best_t;
  }

  DeviationEstimate out;
  out.n_points = n;
  out.phase_amplitude = a;
  out.phase_shift = wrap_phase(theta);
  out.phase_offset = std::arg(resultant(a, theta));
  const double gain = 2.0 * std::sin(0.5 * omega_ac * tau) / omega_ac;
  out.delta_ac = a / gain;

  double ss = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double r = wrap_phase(phi[k] - out.phase_offset - a * std::sin(chi[k] + theta));
    ss += r * r;
  }
  const double dof = n > 3 ? static_cast<double>(n - 3) : 1.0;
  out.stderr = std::sqrt(ss / dof) * std::sqrt(2.0 / static_cast<double>(n)) / gain;
  return out;
}

}  // namespace zq
