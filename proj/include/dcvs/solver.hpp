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

// Variable smoothing gradient descent. Iteration k takes one gradient step on
// the surrogate F_k = (f^{mu_k} - g^{mu_k}) o S with mu_k decreasing to zero;
// the stepsize comes from Armijo backtracking.

#include <dcvs/dc_loss.hpp>
#include <dcvs/smooth_map.hpp>
#include <dcvs/types.hpp>

#include <chrono>
#include <cmath>
#include <cstddef>
#include <ctime>
#include <functional>
#include <iomanip>
#include <limits>
#include <locale>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dcvs {

enum class GammaInitRule {
  PreviousStep,           // gamma_init_k = gamma_{k-1}
  Constant,               // gamma_init_k = gamma_init_constant
  TwoOneMinusCOverKappa,  // gamma_init_k = 2 (1 - c) / kappa(mu_k)
};

enum class Gamma0Policy {
  MaxOneOverGradNorm,  // gamma_0 = max(1, 1 / ||grad F_1(x_1)||)
  Fixed,               // gamma_0 = gamma0
};

enum class Termination { RelTol, MaxIters, TimeCap };

inline std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::RelTol: return "rel_tol";
    case Termination::MaxIters: return "max_iters";
    case Termination::TimeCap: return "time_cap";
  }
  return "unknown";
}

template <typename Scalar>
struct SolverConfig {
  Scalar alpha = 3;  // mu_k = (2 eta)^{-1} k^{-1/alpha}
  Scalar eta = Scalar(0.5);
  Scalar rho = Scalar(0.8);
  Scalar c = Scalar(1e-4);
  GammaInitRule gamma_init_rule = GammaInitRule::PreviousStep;
  Scalar gamma_init_constant = 1;
  Gamma0Policy gamma0_policy = Gamma0Policy::MaxOneOverGradNorm;
  Scalar gamma0 = 1;
  // mu -> kappa_mu; only consulted by TwoOneMinusCOverKappa.
  std::function<Scalar(Scalar)> kappa;
  Scalar rel_tol = Scalar(1e-7);
  std::size_t max_iters = 10000;
  // Measured in CPU time of the calling thread.
  std::optional<double> time_cap_seconds = 30.0;
  bool store_trajectory = false;

  void validate() const {
    detail::require(rho > 0 && rho < 1, "SolverConfig: rho must lie in (0, 1)");
    detail::require(c > 0 && c < 1, "SolverConfig: c must lie in (0, 1)");
    detail::require(alpha >= 1, "SolverConfig: alpha must be at least 1");
    detail::require(eta > 0, "SolverConfig: eta must be positive");
    detail::require(rel_tol >= 0, "SolverConfig: rel_tol must be nonnegative");
    detail::require(max_iters >= 1, "SolverConfig: max_iters must be positive");
    detail::require(gamma_init_rule != GammaInitRule::Constant || gamma_init_constant > 0,
                    "SolverConfig: constant initial stepsize must be positive");
    detail::require(gamma0_policy != Gamma0Policy::Fixed || gamma0 > 0,
                    "SolverConfig: gamma0 must be positive");
    detail::require(gamma_init_rule != GammaInitRule::TwoOneMinusCOverKappa ||
                        static_cast<bool>(kappa),
                    "SolverConfig: kappa-based initial stepsize needs a kappa function");
    detail::require(!time_cap_seconds || *time_cap_seconds > 0,
                    "SolverConfig: time cap must be positive");
  }
};

template <typename Scalar>
struct IterationRecord {
  std::size_t k = 0;
  Scalar mu = 0;
  Scalar surrogate_value = 0;       // F_k(x_k)
  Scalar grad_norm = 0;             // ||grad F_k(x_k)||
  Scalar gamma_init = 0;
  Scalar gamma = 0;                 // gamma_init * rho^backtracks
  int backtracks = 0;
  Scalar surrogate_after_step = 0;  // F_k(x_{k+1})
  Scalar true_cost = 0;             // phi(S(x_k))
};

template <typename Scalar>
struct RunRecord {
  Vector<Scalar> x_final;
  // Iterate with the smallest recorded surrogate gradient norm.
  Vector<Scalar> x_best_grad;
  std::size_t best_grad_iteration = 0;
  std::vector<IterationRecord<Scalar>> iterations;
  // x_1, ..., x_{N+1} when requested.
  std::vector<Vector<Scalar>> trajectory;
  Termination termination = Termination::MaxIters;
  Scalar final_true_cost = 0;
  double wall_seconds = 0;
  double cpu_seconds = 0;

  std::size_t iteration_count() const { return iterations.size(); }
};

template <typename Scalar>
Scalar mu_schedule(std::size_t k, Scalar eta, Scalar alpha) {
  detail::require(k >= 1, "mu_schedule: k must be at least 1");
  detail::require(eta > 0, "mu_schedule: eta must be positive");
  detail::require(alpha >= 1, "mu_schedule: alpha must be at least 1");
  const Scalar cap = 1 / (2 * eta);
  if (k == 1) return cap;
  return cap * std::pow(static_cast<Scalar>(k), -1 / alpha);
}

/// Value and gradient of x -> (f^mu - g^mu)(S(x)).
template <typename Scalar>
std::pair<Scalar, Vector<Scalar>> surrogate_oracle(const DcLoss<Scalar>& loss,
                                                   const SmoothMap<Scalar>& map,
                                                   const Vector<Scalar>& x, Scalar mu) {
  detail::require_shape(x.size() == map.in_dim, "surrogate_oracle: x has the wrong size");
  detail::require_shape(loss.dim == map.out_dim, "surrogate_oracle: loss/map mismatch");
  const Vector<Scalar> z = map.eval(x);
  auto [value, grad_z] = surrogate_at_residual(loss, z, mu);
  return {value, map.jt_vec(x, grad_z)};
}

/// Surrogate value only (no Jacobian product).
template <typename Scalar>
Scalar surrogate_value(const DcLoss<Scalar>& loss, const SmoothMap<Scalar>& map,
                       const Vector<Scalar>& x, Scalar mu) {
  return surrogate_at_residual(loss, map.eval(x), mu).first;
}

template <typename Scalar>
struct BacktrackResult {
  Scalar gamma = 0;
  int backtracks = 0;
  Scalar value_at_step = 0;  // F(x - gamma * grad)
  bool stationary = false;   // grad was zero; no search performed
};

inline constexpr int kMaxBacktracks = 200;

/// Largest gamma in {gamma_init rho^j} with
/// F(x - gamma grad) <= F(x) - c gamma ||grad||^2.
template <typename Scalar, typename EvalFn>
BacktrackResult<Scalar> backtrack(const EvalFn& eval_Fk, const Vector<Scalar>& x, Scalar Fk_x,
                                  const Vector<Scalar>& grad, Scalar gamma_init, Scalar rho,
                                  Scalar c) {
  detail::require(gamma_init > 0, "backtrack: gamma_init must be positive");
  detail::require(rho > 0 && rho < 1, "backtrack: rho must lie in (0, 1)");
  detail::require(c > 0 && c < 1, "backtrack: c must lie in (0, 1)");
  const Scalar sq = grad.squaredNorm();
  if (sq == 0) return {gamma_init, 0, Fk_x, true};
  Scalar gamma = gamma_init;
  for (int j = 0; j <= kMaxBacktracks; ++j) {
    const Vector<Scalar> trial = x - gamma * grad;
    const Scalar value = static_cast<Scalar>(eval_Fk(trial));
    // NaN/inf at the trial point counts as a failed test.
    if (value <= Fk_x - c * gamma * sq) return {gamma, j, value, false};
    gamma *= rho;
  }
  throw DiagnosticError("backtrack: Armijo condition not met after " +
                        std::to_string(kMaxBacktracks) + " reductions");
}

namespace detail {

inline double thread_cpu_seconds() {
  timespec ts{};
  clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
  return static_cast<double>(ts.tv_sec) + 1e-9 * static_cast<double>(ts.tv_nsec);
}

}  // namespace detail

/// Runs the variable smoothing iteration from x1.
///
/// Stops when the relative change of the true cost phi(S(x)) between
/// consecutive iterates drops below rel_tol, after max_iters iterations, or
/// when the CPU time cap is exceeded. A zero surrogate gradient also stops the
/// run (reported as RelTol).
template <typename Scalar>
RunRecord<Scalar> solve(const DcLoss<Scalar>& loss, const SmoothMap<Scalar>& map,
                        const Vector<Scalar>& x1, const SolverConfig<Scalar>& config) {
  config.validate();
  detail::require_shape(x1.size() == map.in_dim, "solve: x1 has the wrong size");
  detail::require_shape(loss.dim == map.out_dim, "solve: loss/map mismatch");
  detail::require(x1.allFinite(), "solve: x1 must be finite");
  detail::require(config.eta >= loss.eta,
                  "solve: schedule cap 1/(2 eta) exceeds the loss smoothing range");

  const auto wall_start = std::chrono::steady_clock::now();
  const double cpu_start = detail::thread_cpu_seconds();

  RunRecord<Scalar> run;
  Vector<Scalar> x = x1;
  if (config.store_trajectory) run.trajectory.push_back(x);

  auto true_cost = [&](const Vector<Scalar>& v) { return loss.value(map.eval(v)); };

  Scalar phi_x = true_cost(x);
  Scalar gamma_prev = 0;
  Scalar best_grad = std::numeric_limits<Scalar>::infinity();

  for (std::size_t k = 1;; ++k) {
    const Scalar mu = mu_schedule(k, config.eta, config.alpha);
    auto [Fk, grad] = surrogate_oracle(loss, map, x, mu);
    if (!std::isfinite(Fk) || !grad.allFinite())
      throw DiagnosticError("solve: non-finite surrogate value or gradient at iteration " +
                                std::to_string(k),
                            k);
    const Scalar grad_norm = grad.norm();

    if (k == 1) {
      if (config.gamma0_policy == Gamma0Policy::Fixed)
        gamma_prev = config.gamma0;
      else
        gamma_prev = grad_norm > 0 ? std::max(Scalar(1), 1 / grad_norm) : Scalar(1);
    }
    if (grad_norm < best_grad) {
      best_grad = grad_norm;
      run.x_best_grad = x;
      run.best_grad_iteration = k;
    }

    Scalar gamma_init = 0;
    switch (config.gamma_init_rule) {
      case GammaInitRule::PreviousStep: gamma_init = gamma_prev; break;
      case GammaInitRule::Constant: gamma_init = config.gamma_init_constant; break;
      case GammaInitRule::TwoOneMinusCOverKappa:
        gamma_init = 2 * (1 - config.c) / config.kappa(mu);
        break;
    }

    auto eval_Fk = [&](const Vector<Scalar>& v) { return surrogate_value(loss, map, v, mu); };
    BacktrackResult<Scalar> step;
    try {
      step = backtrack(eval_Fk, x, Fk, grad, gamma_init, config.rho, config.c);
    } catch (const DiagnosticError& e) {
      throw DiagnosticError(std::string(e.what()) + " at iteration " + std::to_string(k), k);
    }

    IterationRecord<Scalar> rec;
    rec.k = k;
    rec.mu = mu;
    rec.surrogate_value = Fk;
    rec.grad_norm = grad_norm;
    rec.gamma_init = gamma_init;
    rec.gamma = step.gamma;
    rec.backtracks = step.backtracks;
    rec.surrogate_after_step = step.value_at_step;
    rec.true_cost = phi_x;
    run.iterations.push_back(rec);

    if (step.stationary) {
      run.termination = Termination::RelTol;
      break;
    }

    x -= step.gamma * grad;
    gamma_prev = step.gamma;
    if (config.store_trajectory) run.trajectory.push_back(x);

    const Scalar phi_next = true_cost(x);
    if (!std::isfinite(phi_next))
      throw DiagnosticError("solve: non-finite cost at iteration " + std::to_string(k), k);
    const Scalar denom = std::abs(phi_x);
    const Scalar change = std::abs(phi_next - phi_x);
    const Scalar rel = denom < Scalar(1e-300) ? change : change / denom;
    phi_x = phi_next;

    if (rel < config.rel_tol) {
      run.termination = Termination::RelTol;
      break;
    }
    if (k >= config.max_iters) {
      run.termination = Termination::MaxIters;
      break;
    }
    if (config.time_cap_seconds &&
        detail::thread_cpu_seconds() - cpu_start > *config.time_cap_seconds) {
      run.termination = Termination::TimeCap;
      break;
    }
  }

  run.x_final = x;
  run.final_true_cost = phi_x;
  run.cpu_seconds = detail::thread_cpu_seconds() - cpu_start;
  run.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return run;
}

inline constexpr std::string_view kTraceCsvHeader =
    "k,mu,F_k,grad_norm,gamma,backtracks,true_cost";

/// One row per iteration; true_cost is phi(S(x_k)) at the start of iteration k.
template <typename Scalar>
void write_trace_csv(const RunRecord<Scalar>& run, std::ostream& os) {
  os.imbue(std::locale::classic());
  os << kTraceCsvHeader << '\n';
  os << std::setprecision(17);
  for (const auto& it : run.iterations) {
    os << it.k << ',' << it.mu << ',' << it.surrogate_value << ',' << it.grad_norm << ','
       << it.gamma << ',' << it.backtracks << ',' << it.true_cost << '\n';
  }
}

}  // namespace dcvs
