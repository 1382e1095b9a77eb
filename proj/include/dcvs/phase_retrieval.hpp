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

// Synthetic robust phase retrieval: b_i = <a_i, x*>^2 + eps_i for inliers and
// b_i = xi_i for a fixed-size random outlier set.

#include <dcvs/smooth_map.hpp>
#include <dcvs/types.hpp>

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <optional>
#include <vector>

namespace dcvs {

enum class OutlierKind : std::uint8_t {
  Cauchy = 0,   // xi = s M tan(pi u / 2)
  Uniform = 1,  // xi = s M u
};

std::string_view to_string(OutlierKind kind);
std::optional<OutlierKind> parse_outlier_kind(std::string_view name);

struct GenParams {
  Eigen::Index d = 0;
  Eigen::Index n = 0;
  double p_fail = 0;
  double s = 1;
  OutlierKind outlier_kind = OutlierKind::Cauchy;
  double noise_variance = 1e-6;
  std::uint64_t seed = 0;
};

struct Instance {
  MatrixXd A;                              // n x d, rows a_i
  VectorXd b;                              // corrupted measurements
  VectorXd x_star;                         // ground truth, entries +-1
  std::vector<Eigen::Index> outlier_set;   // sorted ascending
  GenParams gen;

  Eigen::Index d() const { return A.cols(); }
  Eigen::Index n() const { return A.rows(); }
};

/// Number of outliers for a given failure probability: round(p_fail * n).
Eigen::Index outlier_count(double p_fail, Eigen::Index n);

/// Deterministic in `params.seed`. Draw order: x*, A (row-major), noise,
/// outlier indices (partial Fisher-Yates), outlier magnitudes.
Instance generate_instance(const GenParams& params);

/// Median-truncated spectral initializer.
///
/// Keeps T = {i : 0 <= b_i <= 9 median(|b|)}, takes the leading eigenvector v
/// of (1/n) sum_{i in T} b_i a_i a_i^T by 100 power iterations from a seeded
/// start, and returns sqrt(median_{i in T} b_i) v. Degenerate input (T empty
/// or no positive signal) yields a seeded unit direction scaled by
/// sqrt(max(median(|b|), 1e-12)).
VectorXd spectral_init(const MatrixXd& A, const VectorXd& b, std::uint64_t seed);

struct SuccessResult {
  double rel_error = 0;
  bool ok = false;
};

/// min(||x* - x||, ||x* + x||) / ||x*|| against `threshold`.
SuccessResult success(const VectorXd& x, const VectorXd& x_star, double threshold = 1e-3);

/// Descent constant of the phase retrieval surrogate:
/// 2 L_g sqrt(sum ||a_i||^4) + 6 lambda max ||a_i||^2 + 4 max(||a_i||^2 |b_i|) / mu.
/// lambda is the MCP slope, 1 for the other losses.
double kappa_mu(const MatrixXd& A, const VectorXd& b, double lambda, double lipschitz_g,
                double mu);

/// Same structure with the row maxima replaced by row sums:
/// 2 L_g sqrt(sum ||a_i||^4) + 6 lambda sum ||a_i||^2 + 4 sum(||a_i||^2 |b_i|) / mu.
/// Each row term r(<a_i, x>^2 - b_i) has a (6 lambda + 4 |b_i| / mu) ||a_i||^2
/// Lipschitz gradient and the constants of a sum add, so this one bounds the
/// curvature of the surrogate for every n. kappa_mu can fall below the actual
/// curvature once n > 1 (see the solver tests).
double kappa_mu_certified(const MatrixXd& A, const VectorXd& b, double lambda,
                          double lipschitz_g, double mu);

/// Residual map x -> (Ax).^2 - b for an instance.
SmoothMap<double> make_rpr_map(const Instance& instance);

// Instance container (binary, little-endian host order):
//   char[8]  magic "DCVSINS1"
//   u64 d, u64 n, f64 p_fail, f64 s, u8 outlier_kind, f64 noise_variance, u64 seed
//   f64[n*d] A row-major, f64[n] b, f64[d] x_star
//   u64 outlier count, u64[count] outlier indices
void save_instance(const Instance& instance, const std::filesystem::path& path);
Instance load_instance(const std::filesystem::path& path);

}  // namespace dcvs
