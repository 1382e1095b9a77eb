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

#include <dcvs/oracle.hpp>
#include <dcvs/smooth_map.hpp>
#include <dcvs/solver.hpp>

#include "test_util.hpp"

#include <cmath>

using namespace dcvs;
using dcvs::testing::random_vector;
using dcvs::testing::uniform_in;

namespace {

MatrixXd random_matrix(Rng& rng, Eigen::Index n, Eigen::Index d) {
  MatrixXd A(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) A(i, j) = rng.normal();
  return A;
}

// Explicit Jacobian of (Ax).^2 - b, used only as a test oracle.
MatrixXd rpr_jacobian(const MatrixXd& A, const VectorXd& x) {
  const VectorXd ax = A * x;
  return 2 * ax.asDiagonal() * A;
}

double op_norm_power(const MatrixXd& M, Rng& rng) {
  VectorXd v = random_vector(rng, M.cols());
  v.normalize();
  double sigma = 0;
  for (int i = 0; i < 500; ++i) {
    const VectorXd w = M.transpose() * (M * v);
    const double nw = w.norm();
    if (nw == 0) return 0;
    v = w / nw;
    sigma = std::sqrt(nw);
  }
  return sigma;
}

}  // namespace

TEST_CASE("rpr_eval examples") {
  MatrixXd A(1, 1);
  A << 1;
  VectorXd b(1), x(1);
  b << 1;
  x << 2;
  CHECK(rpr_eval(A, b, x)(0) == 3.0);

  const MatrixXd I = MatrixXd::Identity(2, 2);
  VectorXd x2(2);
  x2 << 1, 2;
  const VectorXd r = rpr_eval(I, VectorXd(VectorXd::Zero(2)), x2);
  CHECK(r(0) == 1.0);
  CHECK(r(1) == 4.0);

  Rng rng(1);
  const MatrixXd R = random_matrix(rng, 7, 3);
  const VectorXd xr = random_vector(rng, 3);
  const VectorXd exact = (R * xr).cwiseAbs2();
  CHECK(rpr_eval(R, exact, xr).isZero());

  CHECK_THROWS_AS(rpr_eval(R, exact, VectorXd(VectorXd::Zero(4))), ShapeError);
  CHECK_THROWS_AS(rpr_eval(R, VectorXd(VectorXd::Zero(6)), xr), ShapeError);
}

TEST_CASE("rpr_jt_vec examples") {
  const MatrixXd I = MatrixXd::Identity(2, 2);
  VectorXd x(2);
  x << 1, 2;
  CHECK(rpr_jt_vec(I, x, VectorXd(VectorXd::Zero(2))).isZero());
  const VectorXd ones = VectorXd::Ones(2);
  // Oracle: finite differences of x -> <v, S(x)>.
  auto inner = [&](const VectorXd& y) { return ones.dot(rpr_eval(I, VectorXd(VectorXd::Zero(2)), y)); };
  const VectorXd fd = oracle::fd_grad(inner, x);
  CHECK(std::abs(fd(0) - 2) <= 1e-6);
  CHECK(std::abs(fd(1) - 4) <= 1e-6);
  const VectorXd jt = rpr_jt_vec(I, x, ones);
  CHECK(jt(0) == doctest::Approx(2));
  CHECK(jt(1) == doctest::Approx(4));

  MatrixXd A(1, 2);
  A << 1, 1;
  VectorXd x1 = VectorXd::Ones(2), v(1);
  v << 1;
  auto inner2 = [&](const VectorXd& y) { return rpr_eval(A, VectorXd(VectorXd::Zero(1)), y)(0); };
  const VectorXd fd2 = oracle::fd_grad(inner2, x1);
  CHECK((fd2 - VectorXd::Constant(2, 4.0)).norm() <= 1e-6);
  CHECK((rpr_jt_vec(A, x1, v) - VectorXd::Constant(2, 4.0)).norm() <= 1e-12);

  CHECK_THROWS_AS(rpr_jt_vec(A, x1, VectorXd(VectorXd::Ones(2))), ShapeError);
}

TEST_CASE("rpr_lip_ds examples") {
  MatrixXd A(1, 2);
  A << 1, 1;
  CHECK(rpr_lip_ds(A) == doctest::Approx(4.0));
  CHECK(rpr_lip_ds(MatrixXd(MatrixXd::Identity(2, 2))) == doctest::Approx(2 * std::sqrt(2.0)));
  MatrixXd U = MatrixXd::Zero(3, 4);
  U(1, 2) = 1;
  CHECK(rpr_lip_ds(U) == doctest::Approx(2.0));
}

TEST_CASE("jt_vec is linear and consistent with directional derivatives") {
  Rng rng(2);
  const MatrixXd A = random_matrix(rng, 30, 6);
  const VectorXd b = random_vector(rng, 30);
  const auto map = make_rpr_map(A, b);
  CHECK(map.in_dim == 6);
  CHECK(map.out_dim == 30);
  for (int i = 0; i < 50; ++i) {
    const VectorXd x = random_vector(rng, 6);
    const VectorXd v = random_vector(rng, 30), w = random_vector(rng, 30);
    const double a = uniform_in(rng, -2, 2), c = uniform_in(rng, -2, 2);
    const VectorXd lhs = map.jt_vec(x, a * v + c * w);
    const VectorXd rhs = a * map.jt_vec(x, v) + c * map.jt_vec(x, w);
    CHECK((lhs - rhs).norm() <= 1e-10 * (1 + lhs.norm()));

    const VectorXd u = random_vector(rng, 6);
    const double h = 1e-6;
    const double dir = v.dot((map.eval(x + h * u) - map.eval(x - h * u)) / (2 * h));
    const double adj = map.jt_vec(x, v).dot(u);
    CHECK(std::abs(dir - adj) <= 1e-5 * (1 + std::abs(adj)));
  }
}

TEST_CASE("DS Lipschitz estimate stays below rpr_lip_ds") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const MatrixXd A = random_matrix(rng, 25, 5);
    const double L = rpr_lip_ds(A);
    const VectorXd x = random_vector(rng, 5, 3), y = random_vector(rng, 5, 3);
    const double est = op_norm_power(rpr_jacobian(A, x) - rpr_jacobian(A, y), rng);
    CHECK(est <= L * (x - y).norm() * (1 + 1e-6));
  }
}

TEST_CASE("chain-rule gradient matches finite differences for every loss") {
  Rng rng(4);
  const auto inst = dcvs::testing::random_instance(77, 6, 40, 0.2);
  const auto map = make_rpr_map(inst);
  const std::vector<LossSpec> specs = {{LossKind::L1, 1, 1, 0},
                                       {LossKind::MCP, 2, 10, 0},
                                       {LossKind::CappedL1, 1, 30, 0},
                                       {LossKind::TrimmedL1, 1, 1, 0.25}};
  for (const auto& spec : specs) {
    const auto loss = resolve_loss(spec, inst.n());
    for (int i = 0; i < 10; ++i) {
      const VectorXd x = random_vector(rng, inst.d());
      const double mu = uniform_in(rng, 0.1, 1.0);
      const VectorXd z = map.eval(x);
      const VectorXd g = map.jt_vec(x, surrogate_at_residual(loss, z, mu).second);
      auto fn = [&](const VectorXd& y) { return surrogate_at_residual(loss, map.eval(y), mu).first; };
      const VectorXd fd = oracle::fd_grad(fn, x);
      CHECK((fd - g).norm() <= 1e-5 * (1 + g.norm()));
    }
  }
}

TEST_CASE("compose_with_smooth_term") {
  Rng rng(5);
  const auto inst = dcvs::testing::random_instance(3, 4, 20, 0.1);
  const auto map = make_rpr_map(inst);
  const auto loss = resolve_loss({LossKind::CappedL1, 1, 25, 0}, inst.n());

  SUBCASE("h = 0 keeps the composite value") {
    auto h0 = [](const VectorXd&) { return 0.0; };
    auto g0 = [](const VectorXd& x) { return VectorXd(VectorXd::Zero(x.size())); };
    auto [lifted, lmap] = compose_with_smooth_term<double>(h0, g0, loss, map);
    CHECK(lmap.out_dim == inst.n() + 1);
    CHECK(lifted.dim == inst.n() + 1);
    for (int i = 0; i < 20; ++i) {
      const VectorXd x = random_vector(rng, inst.d());
      CHECK(lifted.value(lmap.eval(x)) == doctest::Approx(loss.value(map.eval(x))).epsilon(1e-14));
    }
  }

  SUBCASE("random quadratic h") {
    MatrixXd Q = MatrixXd::Random(4, 4);
    Q = Q.transpose() * Q;
    const VectorXd q = random_vector(rng, 4);
    auto h = [&](const VectorXd& x) { return 0.5 * x.dot(Q * x) + q.dot(x); };
    auto hg = [&](const VectorXd& x) { return VectorXd(Q * x + q); };
    auto [lifted, lmap] = compose_with_smooth_term<double>(h, hg, loss, map);
    for (int i = 0; i < 100; ++i) {
      const VectorXd x = random_vector(rng, inst.d());
      const double lhs = lifted.value(lmap.eval(x));
      const double rhs = h(x) + loss.value(map.eval(x));
      CHECK(std::abs(lhs - rhs) <= 1e-12 * (1 + std::abs(rhs)));
    }
    // The lifted surrogate gradient equals grad h + the original surrogate gradient.
    for (int i = 0; i < 10; ++i) {
      const VectorXd x = random_vector(rng, inst.d());
      const double mu = uniform_in(rng, 0.1, 1);
      const auto [lv, lg] = surrogate_oracle(lifted, lmap, x, mu);
      const auto [v, g] = surrogate_oracle(loss, map, x, mu);
      CHECK(lv == doctest::Approx(v + h(x) - mu / 2));
      CHECK((lg - (g + hg(x))).norm() <= 1e-9 * (1 + lg.norm()));
      auto fn = [&](const VectorXd& y) { return surrogate_value(lifted, lmap, y, mu); };
      CHECK((oracle::fd_grad(fn, x) - lg).norm() <= 1e-5 * (1 + lg.norm()));
    }
  }
}
