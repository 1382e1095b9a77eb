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

// Proximity operators and Moreau envelopes of the building blocks used by the
// loss catalog. Scalar operators act on a single coordinate; the separable
// losses apply them coordinatewise.

#include <dcvs/types.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <utility>
#include <vector>

namespace dcvs {

/// A univariate function together with its proximity operator.
///
/// `prox(t, mu)` returns argmin_z value(z) + (z - t)^2 / (2 mu). For
/// weakly convex functions (weak_convexity > 0) the minimizer is unique only
/// for mu < 1 / weak_convexity; `apply` enforces mu < 1 / (2 weak_convexity).
template <typename Scalar>
struct ScalarProxFn {
  std::function<Scalar(Scalar)> value;
  std::function<Scalar(Scalar, Scalar)> prox;
  Scalar lipschitz = 1;
  Scalar weak_convexity = 0;

  Scalar apply(Scalar t, Scalar mu) const {
    detail::require(mu > 0, "prox: mu must be positive");
    if (weak_convexity > 0)
      detail::require(2 * weak_convexity * mu < 1,
                      "prox: mu must be below 1 / (2 eta) for a weakly convex function");
    return prox(t, mu);
  }
};

/// argmin_z lambda |z| + (z - t)^2 / (2 mu), i.e. soft thresholding at mu*lambda.
template <typename Scalar>
Scalar prox_scaled_abs(Scalar t, Scalar mu, Scalar lambda) {
  detail::require(mu > 0, "prox_scaled_abs: mu must be positive");
  detail::require(lambda > 0, "prox_scaled_abs: lambda must be positive");
  const Scalar shrunk = std::abs(t) - mu * lambda;
  return shrunk > 0 ? std::copysign(shrunk, t) : Scalar(0);
}

/// Huber-type function: t^2/(2 beta) for |t| <= beta*lambda,
/// lambda |t| - beta lambda^2 / 2 otherwise.
template <typename Scalar>
Scalar huber_value(Scalar t, Scalar lambda, Scalar beta) {
  detail::require(lambda > 0 && beta > 0, "huber_value: lambda and beta must be positive");
  const Scalar a = std::abs(t);
  if (a <= beta * lambda) return t * t / (2 * beta);
  return lambda * a - beta * lambda * lambda / 2;
}

/// Minimax concave penalty: lambda |t| - t^2/(2 beta) for |t| <= beta*lambda,
/// beta lambda^2 / 2 otherwise. Equals lambda |t| - huber_value(t).
template <typename Scalar>
Scalar mcp_value(Scalar t, Scalar lambda, Scalar beta) {
  detail::require(lambda > 0 && beta > 0, "mcp_value: lambda and beta must be positive");
  const Scalar a = std::abs(t);
  if (a <= beta * lambda) return lambda * a - t * t / (2 * beta);
  return beta * lambda * lambda / 2;
}

template <typename Scalar>
Scalar prox_huber(Scalar t, Scalar lambda, Scalar beta, Scalar mu) {
  detail::require(lambda > 0 && beta > 0, "prox_huber: lambda and beta must be positive");
  detail::require(mu > 0, "prox_huber: mu must be positive");
  // Quadratic branch is active iff the scaled point stays inside |z| <= beta*lambda.
  if (std::abs(t) <= lambda * (beta + mu)) return beta * t / (beta + mu);
  return t - std::copysign(mu * lambda, t);
}

/// max(|t| - beta, 0), the concave-part complement of the capped l1 loss.
template <typename Scalar>
Scalar capped_complement_value(Scalar t, Scalar beta) {
  detail::require(beta > 0, "capped_complement_value: beta must be positive");
  return std::max(std::abs(t) - beta, Scalar(0));
}

template <typename Scalar>
Scalar prox_capped_complement(Scalar t, Scalar beta, Scalar mu) {
  detail::require(beta > 0, "prox_capped_complement: beta must be positive");
  detail::require(mu > 0, "prox_capped_complement: mu must be positive");
  const Scalar a = std::abs(t);
  if (a <= beta) return t;
  if (a <= beta + mu) return std::copysign(beta, t);
  return t - std::copysign(mu, t);
}

template <typename Scalar>
ScalarProxFn<Scalar> make_scaled_abs(Scalar lambda) {
  detail::require(lambda > 0, "make_scaled_abs: lambda must be positive");
  return {[lambda](Scalar t) { return lambda * std::abs(t); },
          [lambda](Scalar t, Scalar mu) { return prox_scaled_abs(t, mu, lambda); }, lambda,
          Scalar(0)};
}

template <typename Scalar>
ScalarProxFn<Scalar> make_huber(Scalar lambda, Scalar beta) {
  detail::require(lambda > 0 && beta > 0, "make_huber: lambda and beta must be positive");
  return {[=](Scalar t) { return huber_value(t, lambda, beta); },
          [=](Scalar t, Scalar mu) { return prox_huber(t, lambda, beta, mu); }, lambda,
          Scalar(0)};
}

template <typename Scalar>
ScalarProxFn<Scalar> make_capped_complement(Scalar beta) {
  detail::require(beta > 0, "make_capped_complement: beta must be positive");
  return {[=](Scalar t) { return capped_complement_value(t, beta); },
          [=](Scalar t, Scalar mu) { return prox_capped_complement(t, beta, mu); }, Scalar(1),
          Scalar(0)};
}

/// Sum of the K largest absolute entries of z.
template <typename Derived>
typename Derived::Scalar topk_norm(const Eigen::MatrixBase<Derived>& z, Eigen::Index K) {
  using Scalar = typename Derived::Scalar;
  detail::require(K >= 0 && K <= z.size(), "topk_norm: K out of range");
  if (K == 0) return Scalar(0);
  std::vector<Scalar> a(static_cast<std::size_t>(z.size()));
  for (Eigen::Index i = 0; i < z.size(); ++i) a[static_cast<std::size_t>(i)] = std::abs(z(i));
  std::nth_element(a.begin(), a.begin() + (K - 1), a.end(), std::greater<Scalar>());
  return std::accumulate(a.begin(), a.begin() + K, Scalar(0));
}

namespace detail {

// Euclidean projection of |z| (entrywise magnitudes, nonnegative) onto
// {w : 0 <= w_i <= cap, sum w_i <= budget}. The solution has the form
// w_i = clamp(a_i - theta, 0, cap) with theta >= 0 chosen so the budget binds
// when it is active. sum_i clamp(a_i - theta, 0, cap) is piecewise linear and
// nonincreasing in theta with breakpoints at a_i and a_i - cap, so theta is
// located by bisection over the sorted breakpoints and solved exactly on the
// bracketing segment.
template <typename Scalar>
std::vector<Scalar> project_capped_simplex(const std::vector<Scalar>& a, Scalar cap,
                                           Scalar budget) {
  const std::size_t n = a.size();
  auto clipped_sum = [&](Scalar theta) {
    Scalar s = 0;
    for (Scalar ai : a) s += std::clamp(ai - theta, Scalar(0), cap);
    return s;
  };
  std::vector<Scalar> w(n);
  if (clipped_sum(Scalar(0)) <= budget) {
    for (std::size_t i = 0; i < n; ++i) w[i] = std::min(a[i], cap);
    return w;
  }
  std::vector<Scalar> breaks;
  breaks.reserve(2 * n + 1);
  breaks.push_back(Scalar(0));
  for (Scalar ai : a) {
    if (ai > 0) breaks.push_back(ai);
    if (ai - cap > 0) breaks.push_back(ai - cap);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  // Invariant: clipped_sum(breaks[lo]) > budget >= clipped_sum(breaks[hi]).
  std::size_t lo = 0, hi = breaks.size() - 1;
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (clipped_sum(breaks[mid]) > budget)
      lo = mid;
    else
      hi = mid;
  }
  const Scalar t0 = breaks[lo], t1 = breaks[hi];
  const Scalar s0 = clipped_sum(t0), s1 = clipped_sum(t1);
  // Linear on [t0, t1].
  const Scalar theta = (s0 == s1) ? t1 : t0 + (s0 - budget) * (t1 - t0) / (s0 - s1);
  for (std::size_t i = 0; i < n; ++i) w[i] = std::clamp(a[i] - theta, Scalar(0), cap);
  return w;
}

}  // namespace detail

/// Proximity operator of mu * (sum of the K largest |z_i|).
///
/// Uses the Moreau decomposition: the prox equals z minus the projection of z
/// onto mu * {w : ||w||_inf <= 1, ||w||_1 <= K}, the scaled dual-norm ball.
template <typename Derived>
Vector<typename Derived::Scalar> prox_topk(const Eigen::MatrixBase<Derived>& z, Eigen::Index K,
                                           typename Derived::Scalar mu) {
  using Scalar = typename Derived::Scalar;
  detail::require(K >= 0 && K <= z.size(), "prox_topk: K out of range");
  detail::require(mu > 0, "prox_topk: mu must be positive");
  Vector<Scalar> out = z;
  if (K == 0 || z.size() == 0) return out;
  std::vector<Scalar> a(static_cast<std::size_t>(z.size()));
  for (Eigen::Index i = 0; i < z.size(); ++i) a[static_cast<std::size_t>(i)] = std::abs(z(i));
  const auto w = detail::project_capped_simplex(a, mu, mu * static_cast<Scalar>(K));
  for (Eigen::Index i = 0; i < z.size(); ++i)
    out(i) = std::copysign(a[static_cast<std::size_t>(i)] - w[static_cast<std::size_t>(i)], z(i));
  return out;
}

/// Moreau envelope value and gradient from an already computed prox point:
/// value = psi(p) + ||p - z||^2 / (2 mu), gradient = (z - p) / mu.
template <typename DerivedP, typename DerivedZ>
std::pair<typename DerivedZ::Scalar, Vector<typename DerivedZ::Scalar>> moreau_value_and_grad(
    const Eigen::MatrixBase<DerivedP>& prox_point, const Eigen::MatrixBase<DerivedZ>& z,
    typename DerivedZ::Scalar value_at_prox, typename DerivedZ::Scalar mu) {
  detail::require(mu > 0, "moreau_value_and_grad: mu must be positive");
  detail::require_shape(prox_point.size() == z.size(), "moreau_value_and_grad: size mismatch");
  Vector<typename DerivedZ::Scalar> grad = (z - prox_point) / mu;
  const auto value = value_at_prox + (prox_point - z).squaredNorm() / (2 * mu);
  return {value, std::move(grad)};
}

}  // namespace dcvs
