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
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <dcvs/dc_loss.hpp>
#include <dcvs/oracle.hpp>

#include "test_util.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

using namespace dcvs;
using dcvs::testing::random_vector;
using dcvs::testing::uniform_in;

namespace {

// Direct closed forms of phi, independent of the f/g decomposition.
double phi_l1(const VectorXd& z) { return z.cwiseAbs().sum(); }

double phi_mcp(const VectorXd& z, double lambda, double beta) {
  double s = 0;
  for (double t : z) s += std::abs(t) <= beta * lambda ? lambda * std::abs(t) - t * t / (2 * beta)
                                                       : beta * lambda * lambda / 2;
  return s;
}

double phi_capped(const VectorXd& z, double beta) {
  double s = 0;
  for (double t : z) s += std::min(std::abs(t), beta);
  return s;
}

double phi_trimmed(const VectorXd& z, Eigen::Index K) {
  std::vector<double> a(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) a[i] = std::abs(z(i));
  std::sort(a.begin(), a.end(), std::greater<>());
  return std::accumulate(a.begin() + K, a.end(), 0.0);
}

struct Case {
  DcLoss<double> loss;
  std::function<double(const VectorXd&)> phi;
};

std::vector<Case> catalog(Eigen::Index n) {
  std::vector<Case> out;
  out.push_back({make_loss<double>(LossKind::L1, {}, n), phi_l1});
  out.push_back({make_loss<double>(LossKind::MCP, {1.5, 0.8, 0}, n),
                 [](const VectorXd& z) { return phi_mcp(z, 1.5, 0.8); }});
  out.push_back({make_loss<double>(LossKind::CappedL1, {1, 0.7, 0}, n),
                 [](const VectorXd& z) { return phi_capped(z, 0.7); }});
  const Eigen::Index K = n / 3;
  out.push_back({make_loss<double>(LossKind::TrimmedL1, {1, 1, K}, n),
                 [K](const VectorXd& z) { return phi_trimmed(z, K); }});
  return out;
}

}  // namespace

TEST_CASE("make_loss examples") {
  VectorXd z(3);
  z << 3, -1, 2;
  CHECK(make_loss<double>(LossKind::TrimmedL1, {1, 1, 1}, 3).value(z) == doctest::Approx(3.0));
  VectorXd w(2);
  w << 0.5, 10;
  CHECK(make_loss<double>(LossKind::CappedL1, {1, 1, 0}, 2).value(w) == doctest::Approx(1.5));
  VectorXd u(2);
  u << 3, -4;
  CHECK(make_loss<double>(LossKind::TrimmedL1, {1, 1, 0}, 2).value(u) == doctest::Approx(7.0));
}

TEST_CASE("make_loss rejects invalid parameters") {
  CHECK_THROWS_AS(make_loss<double>(LossKind::MCP, {0, 1, 0}, 3), ParameterError);
  CHECK_THROWS_AS(make_loss<double>(LossKind::MCP, {1, -1, 0}, 3), ParameterError);
  CHECK_THROWS_AS(make_loss<double>(LossKind::CappedL1, {1, 0, 0}, 3), ParameterError);
  CHECK_THROWS_AS(make_loss<double>(LossKind::TrimmedL1, {1, 1, 3}, 3), ParameterError);
  CHECK_THROWS_AS(make_loss<double>(LossKind::TrimmedL1, {1, 1, -1}, 3), ParameterError);
  CHECK_THROWS_AS(make_loss<double>(LossKind::L1, {}, 0), ParameterError);
  CHECK_THROWS_AS(make_loss<double>(LossKind::Custom, {}, 3), ParameterError);
}

TEST_CASE("catalog constants") {
  const Eigen::Index n = 9;
  const double rn = 3.0;
  auto mcp = make_loss<double>(LossKind::MCP, {2, 1, 0}, n);
  CHECK(mcp.lipschitz_f == doctest::Approx(2 * rn));
  CHECK(mcp.lipschitz_g == doctest::Approx(2 * rn));
  auto capped = make_loss<double>(LossKind::CappedL1, {1, 5, 0}, n);
  CHECK(capped.lipschitz_f == doctest::Approx(rn));
  CHECK(capped.lipschitz_g == doctest::Approx(rn));
  auto trimmed = make_loss<double>(LossKind::TrimmedL1, {1, 1, 4}, n);
  CHECK(trimmed.lipschitz_g == doctest::Approx(2.0));
  auto l1 = make_loss<double>(LossKind::L1, {}, n);
  CHECK(l1.lipschitz_g == 0.0);
  for (const auto& c : catalog(n)) {
    CHECK(c.loss.eta == 0.5);
    CHECK(c.loss.eta >= std::max(c.loss.eta_f, c.loss.eta_g));
    CHECK(c.loss.mu_max() == 1.0);
  }
}

TEST_CASE("phi matches the closed forms and is nonnegative") {
  Rng rng(3);
  const Eigen::Index n = 12;
  for (const auto& c : catalog(n)) {
    for (int i = 0; i < 200; ++i) {
      const VectorXd z = random_vector(rng, n, uniform_in(rng, 0.1, 4));
      CHECK(c.loss.value(z) == doctest::Approx(c.phi(z)).epsilon(1e-12));
      CHECK(c.loss.g_value(z) >= 0);
      CHECK(c.loss.value(z) >= -1e-12);
    }
  }
}

TEST_CASE("f and g are Lipschitz with the catalog constants") {
  Rng rng(4);
  const Eigen::Index n = 10;
  for (const auto& c : catalog(n)) {
    for (int i = 0; i < 200; ++i) {
      const VectorXd a = random_vector(rng, n, 3), b = random_vector(rng, n, 3);
      const double dist = (a - b).norm();
      CHECK(std::abs(c.loss.f_value(a) - c.loss.f_value(b)) <= c.loss.lipschitz_f * dist + 1e-12);
      CHECK(std::abs(c.loss.g_value(a) - c.loss.g_value(b)) <= c.loss.lipschitz_g * dist + 1e-12);
    }
  }
}

TEST_CASE("surrogate_at_residual examples") {
  auto l1 = make_loss<double>(LossKind::L1, {}, 3);
  auto [v0, g0] = surrogate_at_residual(l1, VectorXd(VectorXd::Zero(3)), 0.37);
  CHECK(v0 == 0.0);
  CHECK(g0.isZero());

  Rng rng(9);
  auto t0 = make_loss<double>(LossKind::TrimmedL1, {1, 1, 0}, 5);
  auto l15 = make_loss<double>(LossKind::L1, {}, 5);
  for (int i = 0; i < 20; ++i) {
    const VectorXd z = random_vector(rng, 5, 2);
    const double mu = uniform_in(rng, 0.01, 1);
    auto [va, ga] = surrogate_at_residual(t0, z, mu);
    auto [vb, gb] = surrogate_at_residual(l15, z, mu);
    CHECK(va == vb);
    CHECK(ga == gb);
  }

  // Oracle first: the Huber envelope of |.| at 2 with mu = 0.5 via the grid.
  auto abs_fn = [](double t) { return std::abs(t); };
  const double p = oracle::brute_prox_1d(abs_fn, 2.0, 0.5, 5.0, 1e-5);
  const double env_grid = std::abs(p) + (p - 2) * (p - 2) / (2 * 0.5);
  CHECK(env_grid == doctest::Approx(1.75).epsilon(1e-4));
  auto l11 = make_loss<double>(LossKind::L1, {}, 1);
  VectorXd z(1);
  z << 2;
  auto [v, g] = surrogate_at_residual(l11, z, 0.5);
  CHECK(v == doctest::Approx(1.75));
  CHECK(g(0) == doctest::Approx(1.0));
}

TEST_CASE("surrogate_at_residual validates mu") {
  auto l1 = make_loss<double>(LossKind::L1, {}, 2);
  const VectorXd z = VectorXd::Ones(2);
  CHECK_THROWS_AS(surrogate_at_residual(l1, z, 0.0), ParameterError);
  CHECK_THROWS_AS(surrogate_at_residual(l1, z, 1.01), ParameterError);
  CHECK_NOTHROW(surrogate_at_residual(l1, z, 1.0));
  CHECK_THROWS_AS(surrogate_at_residual(l1, VectorXd(VectorXd::Ones(3)), 0.5), ShapeError);
}

TEST_CASE("surrogate stays within the smoothing gap of phi") {
  Rng rng(12);
  const Eigen::Index n = 8;
  for (const auto& c : catalog(n)) {
    for (int i = 0; i < 200; ++i) {
      const VectorXd z = random_vector(rng, n, uniform_in(rng, 0.1, 3));
      const double mu = uniform_in(rng, 1e-4, 1);
      const double phi = c.loss.value(z);
      const double sur = surrogate_at_residual(c.loss, z, mu).first;
      const double Lf = c.loss.lipschitz_f, Lg = c.loss.lipschitz_g;
      CHECK(phi - mu * Lf * Lf <= sur + 1e-12);
      CHECK(sur <= phi + mu * Lg * Lg + 1e-12);
    }
    // Gap shrinks with mu.
    const VectorXd z = random_vector(rng, n, 2);
    const double bound = std::max(c.loss.lipschitz_f, c.loss.lipschitz_g);
    for (double mu : {1e-1, 1e-3, 1e-5})
      CHECK(std::abs(surrogate_at_residual(c.loss, z, mu).first - c.loss.value(z)) <=
            mu * bound * bound + 1e-12);
  }
}

TEST_CASE("surrogate gradient is permutation equivariant") {
  Rng rng(14);
  const Eigen::Index n = 9;
  for (const auto& c : catalog(n)) {
    for (int i = 0; i < 30; ++i) {
      const VectorXd z = random_vector(rng, n, 2);
      Eigen::PermutationMatrix<Eigen::Dynamic> perm(n);
      perm.setIdentity();
      for (Eigen::Index j = n - 1; j > 0; --j)
        std::swap(perm.indices()(j),
                  perm.indices()(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(j + 1)))));
      const double mu = uniform_in(rng, 0.05, 1);
      auto [v, g] = surrogate_at_residual(c.loss, z, mu);
      auto [vp, gp] = surrogate_at_residual(c.loss, VectorXd(perm * z), mu);
      CHECK(vp == doctest::Approx(v).epsilon(1e-12));
      CHECK((gp - perm * g).norm() <= 1e-12 * (1 + g.norm()));
    }
  }
}

TEST_CASE("surrogate gradient matches finite differences away from kinks") {
  Rng rng(15);
  const Eigen::Index n = 6;
  for (const auto& c : catalog(n)) {
    for (int i = 0; i < 100; ++i) {
      const double mu = uniform_in(rng, 0.05, 1);
      const VectorXd z = random_vector(rng, n, 2);
      auto fn = [&](const VectorXd& w) { return surrogate_at_residual(c.loss, w, mu).first; };
      const VectorXd g = surrogate_at_residual(c.loss, z, mu).second;
      const VectorXd fd = oracle::fd_grad(fn, z, 1e-6);
      // Envelopes are C^1 with 1/mu-Lipschitz gradients, so central differences
      // are accurate to O(h / mu) even across prox breakpoints.
      CHECK((fd - g).norm() <= 1e-5 * (1 + g.norm()));
    }
  }
}

TEST_CASE("loss specs resolve against the residual dimension") {
  CHECK(trimmed_count(0.4, 1000) == 400);
  CHECK(trimmed_count(0.0, 10) == 0);
  CHECK_THROWS_AS(trimmed_count(1.0, 10), ParameterError);
  LossSpec spec{LossKind::TrimmedL1, 1, 1, 0.3};
  const auto loss = resolve_loss(spec, 10);
  CHECK(loss.params.K == 3);
  CHECK(spec.label() == "trimmed_l1_Kn0.3");
  CHECK(spec.params_string() == "K_over_n=0.3");
  CHECK(LossSpec{LossKind::CappedL1, 1, 200, 0}.label() == "capped_l1_beta200");
  CHECK(parse_loss_kind("mcp") == LossKind::MCP);
  CHECK_FALSE(parse_loss_kind("huber").has_value());
}
