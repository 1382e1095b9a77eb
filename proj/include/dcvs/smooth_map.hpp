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

// Smooth inner mappings S : R^d -> R^n. Only the Jacobian-transpose-vector
// product is exposed as a derivative; the Jacobian is never materialized.

#include <dcvs/dc_loss.hpp>
#include <dcvs/types.hpp>

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <utility>

namespace dcvs {

template <typename Scalar>
struct SmoothMap {
  using VectorType = Vector<Scalar>;

  Eigen::Index in_dim = 0;
  Eigen::Index out_dim = 0;
  std::function<VectorType(const VectorType&)> eval;
  // (x, v) -> DS(x)^T v
  std::function<VectorType(const VectorType&, const VectorType&)> jt_vec;
  // Lipschitz constant of DS, when known.
  std::optional<Scalar> lip_ds;
};

/// (Ax) .* (Ax) - b
template <typename DerivedA, typename DerivedB, typename DerivedX>
Vector<typename DerivedA::Scalar> rpr_eval(const Eigen::MatrixBase<DerivedA>& A,
                                           const Eigen::MatrixBase<DerivedB>& b,
                                           const Eigen::MatrixBase<DerivedX>& x) {
  detail::require_shape(A.cols() == x.size() && A.rows() == b.size(),
                        "rpr_eval: dimension mismatch");
  Vector<typename DerivedA::Scalar> ax = A * x;
  return ax.cwiseProduct(ax) - b;
}

/// 2 A^T ((Ax) .* v)
template <typename DerivedA, typename DerivedX, typename DerivedV>
Vector<typename DerivedA::Scalar> rpr_jt_vec(const Eigen::MatrixBase<DerivedA>& A,
                                             const Eigen::MatrixBase<DerivedX>& x,
                                             const Eigen::MatrixBase<DerivedV>& v) {
  detail::require_shape(A.cols() == x.size() && A.rows() == v.size(),
                        "rpr_jt_vec: dimension mismatch");
  Vector<typename DerivedA::Scalar> ax = A * x;
  return 2 * (A.transpose() * ax.cwiseProduct(v));
}

/// 2 sqrt(sum_i ||a_i||^4), a Lipschitz constant of x -> DS_RPR(x).
template <typename DerivedA>
typename DerivedA::Scalar rpr_lip_ds(const Eigen::MatrixBase<DerivedA>& A) {
  return 2 * std::sqrt(A.rowwise().squaredNorm().array().square().sum());
}

/// Phase-retrieval residual map sharing ownership of A and b.
template <typename Scalar>
SmoothMap<Scalar> make_rpr_map(std::shared_ptr<const Matrix<Scalar>> A,
                               std::shared_ptr<const Vector<Scalar>> b) {
  detail::require(A && b, "make_rpr_map: null operand");
  detail::require_shape(A->rows() == b->size(), "make_rpr_map: A and b disagree");
  SmoothMap<Scalar> map;
  map.in_dim = A->cols();
  map.out_dim = A->rows();
  map.eval = [A, b](const Vector<Scalar>& x) { return rpr_eval(*A, *b, x); };
  map.jt_vec = [A](const Vector<Scalar>& x, const Vector<Scalar>& v) {
    return rpr_jt_vec(*A, x, v);
  };
  map.lip_ds = rpr_lip_ds(*A);
  return map;
}

template <typename Scalar>
SmoothMap<Scalar> make_rpr_map(const Matrix<Scalar>& A, const Vector<Scalar>& b) {
  return make_rpr_map(std::make_shared<const Matrix<Scalar>>(A),
                      std::make_shared<const Vector<Scalar>>(b));
}

/// Rewrites h(x) + (f - g)(S(x)) as (f_hat - g_hat)(S_hat(x)) with
/// S_hat(x) = [S(x); h(x)], f_hat([z; t]) = f(z) + t and g_hat([z; t]) = g(z).
template <typename Scalar>
std::pair<DcLoss<Scalar>, SmoothMap<Scalar>> compose_with_smooth_term(
    std::function<Scalar(const Vector<Scalar>&)> h_value,
    std::function<Vector<Scalar>(const Vector<Scalar>&)> h_grad, const DcLoss<Scalar>& loss,
    const SmoothMap<Scalar>& map) {
  using V = Vector<Scalar>;
  detail::require(static_cast<bool>(h_value) && static_cast<bool>(h_grad),
                  "compose_with_smooth_term: h and its gradient are required");
  detail::require_shape(loss.dim == map.out_dim, "compose_with_smooth_term: loss/map mismatch");
  const Eigen::Index n = map.out_dim;

  DcLoss<Scalar> lifted;
  lifted.kind = LossKind::Custom;
  lifted.params = loss.params;
  lifted.dim = n + 1;
  lifted.eta = loss.eta;
  lifted.eta_f = loss.eta_f;
  lifted.eta_g = loss.eta_g;
  lifted.lipschitz_f = std::sqrt(loss.lipschitz_f * loss.lipschitz_f + 1);
  lifted.lipschitz_g = loss.lipschitz_g;
  lifted.f_value = [f = loss.f_value, n](const V& u) { return f(u.head(n)) + u(n); };
  lifted.g_value = [g = loss.g_value, n](const V& u) { return g(u.head(n)); };
  lifted.f_prox = [fp = loss.f_prox, n](const V& u, Scalar mu) -> V {
    V out(n + 1);
    out.head(n) = fp(u.head(n), mu);
    out(n) = u(n) - mu;
    return out;
  };
  lifted.g_prox = [gp = loss.g_prox, n](const V& u, Scalar mu) -> V {
    V out(n + 1);
    out.head(n) = gp(u.head(n), mu);
    out(n) = u(n);
    return out;
  };

  SmoothMap<Scalar> lifted_map;
  lifted_map.in_dim = map.in_dim;
  lifted_map.out_dim = n + 1;
  lifted_map.eval = [eval = map.eval, h_value, n](const V& x) -> V {
    V out(n + 1);
    out.head(n) = eval(x);
    out(n) = h_value(x);
    return out;
  };
  lifted_map.jt_vec = [jt = map.jt_vec, h_grad, n](const V& x, const V& v) -> V {
    detail::require_shape(v.size() == n + 1, "lifted jt_vec: size mismatch");
    return jt(x, v.head(n)) + h_grad(x) * v(n);
  };
  return {std::move(lifted), std::move(lifted_map)};
}

}  // namespace dcvs
