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

#include <cmath>
#include <numbers>
#include <string>

#include "zq/errors.hpp"

namespace zq {

// Regularised confluent hypergeometric limit function
//   0F1~(; b; z) = sum_k z^k / (Gamma(b + k) k!),
// summed by term-ratio recursion in extended precision. For b = 1,
// 0F1~(; 1; -x^2/4) = J0(x). The alternating series cancels badly for large
// |z|; beyond |z| ~ 100 use bessel_j0 / bessel_j1, which switch to the
// asymptotic expansion.
inline double hypergeom_0f1_regularized(double b, double z, int max_terms = 10000) {
  detail::require(b > 0.0 && std::isfinite(b), "hypergeom_0f1_regularized: b must be positive");
  detail::require(std::isfinite(z), "hypergeom_0f1_regularized: z must be finite");
  long double term = 1.0L / std::tgamma(static_cast<long double>(b));
  long double sum = term;
  const long double zz = z;
  for (int k = 0; k < max_terms; ++k) {
    term *= zz / ((static_cast<long double>(b) + k) * (k + 1.0L));
    sum += term;
    // Terms shrink monotonically once (b + k)(k + 1) > |z|.
    if ((b + k) * (k + 1.0) > std::fabs(z) &&
        std::fabs(term) <= 1e-21L * std::fabs(sum) + 1e-300L) {
      return static_cast<double>(sum);
    }
  }
  throw NumericalError("hypergeom_0f1_regularized: series did not converge in " +
                       std::to_string(max_terms) + " terms (b=" + std::to_string(b) +
                       ", z=" + std::to_string(z) + ")");
}

namespace detail {

inline constexpr double kBesselSeriesLimit = 20.0;

// Hankel expansion J_nu(x) ~ sqrt(2 / (pi x)) (P cos w - Q sin w),
// w = x - (nu / 2 + 1 / 4) pi, truncated at its smallest term.
inline double bessel_j_asymptotic(int nu, double x) {
  const double mu = 4.0 * nu * nu;
  double p = 0.0, q = 0.0;
  double a = 1.0;  // a_k(nu) / x^k
  double prev = INFINITY;
  for (int k = 0; k < 200; ++k) {
    if (k > 0) {
      const double odd = 2.0 * k - 1.0;
      a *= (mu - odd * odd) / (k * 8.0 * x);
    }
    const double mag = std::fabs(a);
    if (mag > prev) break;
    prev = mag;
    switch (k % 4) {
      case 0: p += a; break;
      case 1: q += a; break;
      case 2: p -= a; break;
      case 3: q -= a; break;
    }
    if (mag < 1e-17) break;
  }
  const double w = x - (0.5 * nu + 0.25) * std::numbers::pi;
  return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * std::cos(w) - q * std::sin(w));
}

}  // namespace detail

inline double bessel_j0(double x) {
  x = std::fabs(x);
  if (x <= detail::kBesselSeriesLimit) return hypergeom_0f1_regularized(1.0, -0.25 * x * x);
  return detail::bessel_j_asymptotic(0, x);
}

inline double bessel_j1(double x) {
  const double sign = x < 0.0 ? -1.0 : 1.0;
  x = std::fabs(x);
  if (x <= detail::kBesselSeriesLimit) {
    return sign * 0.5 * x * hypergeom_0f1_regularized(2.0, -0.25 * x * x);
  }
  return sign * detail::bessel_j_asymptotic(1, x);
}

}  // namespace zq
