// Copyright 2026 The dcvs Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

// Brute-force verifiers. Nothing here calls into the closed-form operators;
// tests compare the two routes against each other.

#include <dcvs/types.hpp>

#include <cmath>
#include <limits>
#include <utility>

namespace dcvs::oracle {

/// Grid argmin of value_fn(z) + (z - t)^2 / (2 mu) over [t - radius, t + radius].
/// Ties go to the smaller |z|.
template <typename Scalar, typename Fn>
Scalar brute_prox_1d(const Fn& value_fn, Scalar t, Scalar mu,
                     Scalar radius, Scalar step) {
  detail::require(step > 0, "brute_prox_1d: step must be positive");
  detail::require(radius >= step, "brute_prox_1d: radius must be at least one step");
  detail::require(mu > 0, "brute_prox_1d: mu must be positive");
  const long long half = static_cast<long long>(std::floor(radius / step));
  Scalar best_z = t;
  Scalar best = std::numeric_limits<Scalar>::infinity();
  for (long long j = -half; j <= half; ++j) {
    const Scalar z = t + static_cast<Scalar>(j) * step;
    const Scalar v = static_cast<Scalar>(value_fn(z));
    if (!std::isfinite(v)) throw DiagnosticError("brute_prox_1d: non-finite function value");
    const Scalar obj = v + (z - t) * (z - t) / (2 * mu);
    if (obj < best || (obj == best && std::abs(z) < std::abs(best_z))) {
      best = obj;
      best_z = z;
    }
  }
  return best_z;
}

/// Product-grid argmin of value_fn(w) + ||w - z||^2 / (2 mu), dim(z) <= 3.
template <typename Scalar, typename Fn>
Vector<Scalar> brute_prox_nd(const Fn& value_fn, const Vector<Scalar>& z, Scalar mu, Scalar radius, Scalar step) {
  detail::require(z.size() >= 1 && z.size() <= 3, "brute_prox_nd: dimension must be 1..3");
  detail::require(step > 0, "brute_prox_nd: step must be positive");
  detail::require(radius >= step, "brute_prox_nd: radius must be at least one step");
  detail::require(mu > 0, "brute_prox_nd: mu must be positive");
  const long long half = static_cast<long long>(std::floor(radius / step));
  const long long side = 2 * half + 1;
  const Eigen::Index dim = z.size();
  long long total = 1;
  for (Eigen::Index i = 0; i < dim; ++i) total *= side;

  Vector<Scalar> w(dim), best_w = z;
  Scalar best = std::numeric_limits<Scalar>::infinity();
  for (long long flat = 0; flat < total; ++flat) {
    long long rem = flat;
    for (Eigen::Index i = 0; i < dim; ++i) {
      const long long j = rem % side - half;
      rem /= side;
      w(i) = z(i) + static_cast<Scalar>(j) * step;
    }
    const Scalar v = static_cast<Scalar>(value_fn(w));
    if (!std::isfinite(v)) throw DiagnosticError("brute_prox_nd: non-finite function value");
    const Scalar obj = v + (w - z).squaredNorm() / (2 * mu);
    if (obj < best || (obj == best && w.norm() < best_w.norm())) {
      best = obj;
      best_w = w;
    }
  }
  return best_w;
}

/// Central differences (f(x + h e_i) - f(x - h e_i)) / (2h).
template <typename Scalar, typename Fn>
Vector<Scalar> fd_grad(const Fn& scalar_fn, const Vector<Scalar>& x, Scalar h = Scalar(1e-6)) {
  detail::require(h > 0, "fd_grad: h must be positive");
  Vector<Scalar> g(x.size());
  Vector<Scalar> xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const Scalar xi = x(i);
    xp(i) = xi + h;
    const Scalar fp = static_cast<Scalar>(scalar_fn(xp));
    xp(i) = xi - h;
    const Scalar fm = static_cast<Scalar>(scalar_fn(xp));
    xp(i) = xi;
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw DiagnosticError("fd_grad: non-finite function value");
    g(i) = (fp - fm) / (2 * h);
  }
  return g;
}

/// Quadratic upper model check:
/// F(y) <= F(x) + <grad F(x), y - x> + (kappa/2) ||y - x||^2 + 1e-9 (1 + |F(x)|).
template <typename Scalar, typename Fn>
bool check_descent(const Fn& value_grad_fn, const Vector<Scalar>& x, const Vector<Scalar>& y, Scalar kappa) {
  detail::require(kappa > 0, "check_descent: kappa must be positive");
  const auto [fx, gx] = value_grad_fn(x);
  const Scalar fy = value_grad_fn(y).first;
  const Vector<Scalar> d = y - x;
  const Scalar bound = fx + gx.dot(d) + kappa / 2 * d.squaredNorm();
  return fy <= bound + Scalar(1e-9) * (1 + std::abs(fx));
}

}  // namespace dcvs::oracle
