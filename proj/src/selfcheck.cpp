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
#include <dcvs/selfcheck.hpp>

#include <dcvs/dc_loss.hpp>
#include <dcvs/oracle.hpp>
#include <dcvs/phase_retrieval.hpp>
#include <dcvs/prox.hpp>
#include <dcvs/rng.hpp>
#include <dcvs/solver.hpp>

#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace dcvs {

namespace {

struct Check {
  std::string name;
  std::function<bool(Rng&)> run;
};

double uniform_in(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

// Closed-form prox objective never exceeds the grid minimum.
bool scalar_prox_check(Rng& rng, const std::function<ScalarProxFn<double>(Rng&)>& make,
                       int cases) {
  for (int i = 0; i < cases; ++i) {
    const auto fn = make(rng);
    const double mu = uniform_in(rng, 0.05, 1.0);
    const double t = uniform_in(rng, -4.0, 4.0);
    const double radius = 10 * mu * fn.lipschitz;
    const double step = 1e-4;
    const double z = fn.apply(t, mu);
    const double zb = oracle::brute_prox_1d(fn.value, t, mu, radius, step);
    auto obj = [&](double w) { return fn.value(w) + (w - t) * (w - t) / (2 * mu); };
    if (obj(z) > obj(zb) + 1e-8) return false;
  }
  return true;
}

std::vector<LossSpec> catalog() {
  return {{LossKind::L1, 1, 1, 0},
          {LossKind::MCP, 2, 5, 0},
          {LossKind::CappedL1, 1, 20, 0},
          {LossKind::TrimmedL1, 1, 1, 0.2}};
}

Instance small_instance(Rng& rng, double p_fail) {
  GenParams gen;
  gen.d = 10;
  gen.n = 50;
  gen.p_fail = p_fail;
  gen.seed = rng.next_u64();
  return generate_instance(gen);
}

}  // namespace

int run_selfcheck(std::ostream& out, std::uint64_t seed) {
  std::vector<Check> checks;
  checks.push_back({"prox scaled abs vs grid", [](Rng& rng) {
                      return scalar_prox_check(
                          rng, [](Rng& r) { return make_scaled_abs(uniform_in(r, 0.1, 2.0)); },
                          50);
                    }});
  checks.push_back({"prox huber vs grid", [](Rng& rng) {
                      return scalar_prox_check(
                          rng,
                          [](Rng& r) {
                            return make_huber(uniform_in(r, 0.1, 2.0), uniform_in(r, 0.1, 3.0));
                          },
                          50);
                    }});
  checks.push_back({"prox capped complement vs grid", [](Rng& rng) {
                      return scalar_prox_check(
                          rng,
                          [](Rng& r) { return make_capped_complement(uniform_in(r, 0.1, 3.0)); },
                          50);
                    }});
  checks.push_back({"prox top-K vs grid", [](Rng& rng) {
                      for (int i = 0; i < 10; ++i) {
                        VectorXd z(2);
                        z << uniform_in(rng, -2, 2), uniform_in(rng, -2, 2);
                        const Eigen::Index K = static_cast<Eigen::Index>(rng.below(3));
                        const double mu = uniform_in(rng, 0.1, 1.0);
                        auto g = [K](const VectorXd& w) { return topk_norm(w, K); };
                        const VectorXd p = prox_topk(z, K, mu);
                        const VectorXd pb = oracle::brute_prox_nd(g, z, mu, 1.5 * mu, 2e-3);
                        auto obj = [&](const VectorXd& w) {
                          return g(w) + (w - z).squaredNorm() / (2 * mu);
                        };
                        if (obj(p) > obj(pb) + 1e-6) return false;
                      }
                      return true;
                    }});
  checks.push_back({"surrogate gradient vs finite differences", [](Rng& rng) {
                      for (const auto& spec : catalog()) {
                        const Instance inst = small_instance(rng, 0.2);
                        const auto map = make_rpr_map(inst);
                        const auto loss = resolve_loss(spec, inst.n());
                        VectorXd x(inst.d());
                        for (Eigen::Index j = 0; j < x.size(); ++j) x(j) = rng.normal();
                        const double mu = uniform_in(rng, 0.2, 1.0);
                        const auto [v, g] = surrogate_oracle(loss, map, x, mu);
                        auto fn = [&](const VectorXd& y) {
                          return surrogate_value(loss, map, y, mu);
                        };
                        const VectorXd fd = oracle::fd_grad(fn, x, 1e-6);
                        if ((fd - g).norm() > 1e-4 * (1 + g.norm())) return false;
                      }
                      return true;
                    }});
  checks.push_back({"descent inequality with kappa_mu_certified", [](Rng& rng) {
                      for (const auto& spec : catalog()) {
                        const Instance inst = small_instance(rng, 0.2);
                        const auto map = make_rpr_map(inst);
                        const auto loss = resolve_loss(spec, inst.n());
                        const double lambda = spec.kind == LossKind::MCP ? spec.lambda : 1.0;
                        for (int i = 0; i < 50; ++i) {
                          const double mu = uniform_in(rng, 0.01, 1.0);
                          VectorXd x(inst.d()), y(inst.d());
                          for (Eigen::Index j = 0; j < x.size(); ++j) {
                            x(j) = rng.normal();
                            y(j) = x(j) + 0.5 * rng.normal();
                          }
                          const double kappa =
                              kappa_mu_certified(inst.A, inst.b, lambda, loss.lipschitz_g, mu);
                          auto vg = [&](const VectorXd& p) {
                            return surrogate_oracle(loss, map, p, mu);
                          };
                          if (!oracle::check_descent(vg, x, y, kappa)) return false;
                        }
                      }
                      return true;
                    }});

  Rng rng(seed);
  int failed = 0;
  for (const auto& c : checks) {
    bool ok = false;
    std::string note;
    try {
      ok = c.run(rng);
    } catch (const std::exception& e) {
      note = std::string(" (") + e.what() + ")";
    }
    out << (ok ? "PASS  " : "FAIL  ") << c.name << note << '\n';
    if (!ok) ++failed;
  }
  return failed;
}

}  // namespace dcvs
