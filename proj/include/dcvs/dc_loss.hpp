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

// Catalog of difference-of-convex losses phi = f - g acting on a residual
// vector z, and the smoothed surrogate f^mu - g^mu built from their Moreau
// envelopes.

#include <dcvs/prox.hpp>
#include <dcvs/types.hpp>

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace dcvs {

enum class LossKind { L1, MCP, CappedL1, TrimmedL1, Custom };

inline std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::L1: return "l1";
    case LossKind::MCP: return "mcp";
    case LossKind::CappedL1: return "capped_l1";
    case LossKind::TrimmedL1: return "trimmed_l1";
    case LossKind::Custom: return "custom";
  }
  return "unknown";
}

inline std::optional<LossKind> parse_loss_kind(std::string_view name) {
  if (name == "l1") return LossKind::L1;
  if (name == "mcp") return LossKind::MCP;
  if (name == "capped_l1" || name == "capped") return LossKind::CappedL1;
  if (name == "trimmed_l1" || name == "trimmed") return LossKind::TrimmedL1;
  return std::nullopt;
}

template <typename Scalar>
struct LossParams {
  Scalar lambda = 1;  // MCP slope
  Scalar beta = 1;    // MCP curvature / capped-l1 cap
  Eigen::Index K = 0; // trimmed-l1: number of ignored residuals
};

/// phi = f - g with both parts prox-friendly and Lipschitz.
///
/// `eta` is the smoothing cap: surrogates are only evaluated for
/// 0 < mu <= 1 / (2 eta). All catalog parts are convex (eta_f = eta_g = 0),
/// so eta is a configuration value rather than a property of f and g.
template <typename Scalar>
struct DcLoss {
  using VectorType = Vector<Scalar>;

  LossKind kind = LossKind::Custom;
  LossParams<Scalar> params;
  Eigen::Index dim = 0;

  std::function<Scalar(const VectorType&)> f_value;
  std::function<Scalar(const VectorType&)> g_value;
  std::function<VectorType(const VectorType&, Scalar)> f_prox;
  std::function<VectorType(const VectorType&, Scalar)> g_prox;

  Scalar lipschitz_f = 0;
  Scalar lipschitz_g = 0;
  Scalar eta_f = 0;
  Scalar eta_g = 0;
  Scalar eta = Scalar(0.5);

  Scalar value(const VectorType& z) const { return f_value(z) - g_value(z); }
  Scalar mu_max() const { return 1 / (2 * eta); }
};

template <typename Scalar>
DcLoss<Scalar> make_loss(LossKind kind, const LossParams<Scalar>& params, Eigen::Index n,
                         Scalar eta = Scalar(0.5)) {
  using V = Vector<Scalar>;
  detail::require(n >= 1, "make_loss: dimension must be positive");
  detail::require(eta > 0, "make_loss: eta must be positive");
  DcLoss<Scalar> loss;
  loss.kind = kind;
  loss.params = params;
  loss.dim = n;
  loss.eta = eta;
  const Scalar sqrt_n = std::sqrt(static_cast<Scalar>(n));

  auto l1_value = [](const V& z) { return z.template lpNorm<1>(); };
  auto l1_prox = [](const V& z, Scalar mu) -> V {
    return z.unaryExpr([mu](Scalar t) { return prox_scaled_abs(t, mu, Scalar(1)); });
  };
  auto zero_value = [](const V&) { return Scalar(0); };
  auto identity_prox = [](const V& z, Scalar) -> V { return z; };

  switch (kind) {
    case LossKind::L1:
      loss.f_value = l1_value;
      loss.f_prox = l1_prox;
      loss.g_value = zero_value;
      loss.g_prox = identity_prox;
      loss.lipschitz_f = sqrt_n;
      loss.lipschitz_g = 0;
      break;
    case LossKind::MCP: {
      const Scalar lambda = params.lambda, beta = params.beta;
      detail::require(lambda > 0 && beta > 0, "make_loss: MCP needs lambda > 0 and beta > 0");
      loss.f_value = [lambda](const V& z) { return lambda * z.template lpNorm<1>(); };
      loss.f_prox = [lambda](const V& z, Scalar mu) -> V {
        return z.unaryExpr([=](Scalar t) { return prox_scaled_abs(t, mu, lambda); });
      };
      loss.g_value = [=](const V& z) {
        return z.unaryExpr([=](Scalar t) { return huber_value(t, lambda, beta); }).sum();
      };
      loss.g_prox = [=](const V& z, Scalar mu) -> V {
        return z.unaryExpr([=](Scalar t) { return prox_huber(t, lambda, beta, mu); });
      };
      loss.lipschitz_f = lambda * sqrt_n;
      loss.lipschitz_g = lambda * sqrt_n;
      break;
    }
    case LossKind::CappedL1: {
      const Scalar beta = params.beta;
      detail::require(beta > 0, "make_loss: capped l1 needs beta > 0");
      loss.f_value = l1_value;
      loss.f_prox = l1_prox;
      loss.g_value = [beta](const V& z) {
        return (z.array().abs() - beta).max(Scalar(0)).sum();
      };
      loss.g_prox = [beta](const V& z, Scalar mu) -> V {
        return z.unaryExpr([=](Scalar t) { return prox_capped_complement(t, beta, mu); });
      };
      loss.lipschitz_f = sqrt_n;
      loss.lipschitz_g = sqrt_n;
      break;
    }
    case LossKind::TrimmedL1: {
      const Eigen::Index K = params.K;
      detail::require(K >= 0 && K < n, "make_loss: trimmed l1 needs 0 <= K < n");
      loss.f_value = l1_value;
      loss.f_prox = l1_prox;
      if (K == 0) {
        loss.g_value = zero_value;
        loss.g_prox = identity_prox;
      } else {
        loss.g_value = [K](const V& z) { return topk_norm(z, K); };
        loss.g_prox = [K](const V& z, Scalar mu) -> V { return prox_topk(z, K, mu); };
      }
      loss.lipschitz_f = sqrt_n;
      loss.lipschitz_g = std::sqrt(static_cast<Scalar>(K));
      break;
    }
    case LossKind::Custom:
      throw ParameterError("make_loss: custom losses are assembled directly");
  }
  return loss;
}

/// f^mu(z) - g^mu(z) and its gradient grad f^mu(z) - grad g^mu(z).
template <typename Scalar>
std::pair<Scalar, Vector<Scalar>> surrogate_at_residual(const DcLoss<Scalar>& loss,
                                                        const Vector<Scalar>& z, Scalar mu) {
  detail::require(mu > 0 && mu <= loss.mu_max(),
                  "surrogate_at_residual: mu must lie in (0, 1/(2 eta)]");
  detail::require_shape(z.size() == loss.dim, "surrogate_at_residual: residual size mismatch");
  const Vector<Scalar> pf = loss.f_prox(z, mu);
  const Vector<Scalar> pg = loss.g_prox(z, mu);
  auto [fv, fg] = moreau_value_and_grad(pf, z, loss.f_value(pf), mu);
  auto [gv, gg] = moreau_value_and_grad(pg, z, loss.g_value(pg), mu);
  return {fv - gv, fg - gg};
}

/// Loss description as it appears in configuration files. K is given relative
/// to the residual dimension and resolved with `resolve_loss`.
struct LossSpec {
  LossKind kind = LossKind::L1;
  double lambda = 1;
  double beta = 1;
  double K_over_n = 0;

  /// File-name safe identifier, e.g. "trimmed_l1_Kn0.4".
  std::string label() const;
  /// Parameter summary for tables, e.g. "K_over_n=0.4".
  std::string params_string() const;
};

/// Number of trimmed residuals for a given dimension: round(K_over_n * n).
Eigen::Index trimmed_count(double K_over_n, Eigen::Index n);

DcLoss<double> resolve_loss(const LossSpec& spec, Eigen::Index n, double eta = 0.5);

}  // namespace dcvs
