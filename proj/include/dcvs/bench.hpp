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

// Seeded success-rate sweeps over (n/d, p_fail, s, loss) and their CSV output.

#include <dcvs/dc_loss.hpp>
#include <dcvs/phase_retrieval.hpp>
#include <dcvs/solver.hpp>

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dcvs {

struct SweepConfig {
  Eigen::Index d = 100;
  std::vector<int> n_over_d = {5, 10, 15, 20};
  std::vector<double> p_fail = {0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6};
  std::vector<double> s = {1.0};
  std::vector<LossSpec> losses;
  int trials = 50;
  std::uint64_t base_seed = 0;
  OutlierKind outlier_kind = OutlierKind::Cauchy;
  double noise_variance = 1e-6;
  double success_threshold = 1e-3;
  SolverConfig<double> solver;
  std::filesystem::path output_dir = "sweep_out";
  // 0 selects the hardware concurrency.
  std::size_t workers = 0;

  void validate() const;
};

/// Parses the JSON config schema; missing fields keep the defaults above.
SweepConfig sweep_config_from_json(const nlohmann::json& j);
SweepConfig load_sweep_config(const std::filesystem::path& path);

LossSpec loss_spec_from_json(const nlohmann::json& j);

struct TrialRow {
  int n_over_d = 0;
  Eigen::Index n = 0;
  double p_fail = 0;
  double s = 0;
  std::size_t loss_index = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  double rel_error = 0;
  bool success = false;
  std::size_t iterations = 0;
  std::string termination;  // rel_tol | max_iters | time_cap | error
  double final_cost = 0;
  double seconds = 0;  // wall clock; only aggregated into timing.csv
  std::string error;
};

struct CellSummary {
  Eigen::Index d = 0;
  Eigen::Index n = 0;
  int n_over_d = 0;
  double p_fail = 0;
  double s = 0;
  std::size_t loss_index = 0;
  int trials = 0;
  int successes = 0;
  double success_rate = 0;
  double mean_rel_err = 0;
  double median_rel_err = 0;
  double mean_seconds = 0;
  double mean_iters = 0;
  double median_iters = 0;
};

struct SweepResult {
  Eigen::Index d = 0;
  std::vector<int> n_over_d;
  std::vector<double> p_fail;
  std::vector<double> s;
  std::vector<LossSpec> losses;
  std::vector<CellSummary> cells;  // ordered by (n_over_d, p_fail, s, loss)
  std::vector<TrialRow> trials;    // ordered by (n_over_d, p_fail, s, trial, loss)
};

/// Seed of trial t: base_seed + t, independent of the grid cell, so every cell
/// of one trial index reuses the same draws (A, x*, noise).
std::uint64_t trial_seed(std::uint64_t base_seed, int trial);

/// Worker count: DCVS_WORKERS if set, otherwise `configured`, otherwise the
/// hardware concurrency.
std::size_t resolve_workers(std::size_t configured);

/// Runs every (cell, trial) work item on a pool of `workers` threads. The result
/// does not depend on the worker count.
SweepResult run_sweep(const SweepConfig& config, std::optional<std::size_t> workers = {});

/// Rebuilds the per-cell aggregates from the per-trial rows.
std::vector<CellSummary> summarize(const SweepResult& result);

/// Writes summary.csv, trials.csv, heatmap_<loss>.csv (one per loss and s) and
/// timing.csv into `dir`. Everything except timing.csv is a deterministic
/// function of the configuration.
void emit_outputs(const SweepResult& result, const std::filesystem::path& dir);

inline constexpr const char* kSummaryHeader =
    "d,n,n_over_d,p_fail,s,loss,params,trials,successes,success_rate,mean_rel_err,"
    "median_rel_err,mean_iters,median_iters";
inline constexpr const char* kTrialsHeader =
    "d,n,n_over_d,p_fail,s,loss,trial,seed,rel_error,success,iterations,termination,"
    "final_cost,error";
inline constexpr const char* kTimingHeader =
    "d,n,n_over_d,p_fail,s,loss,mean_seconds,mean_iters,median_iters";

/// Shortest round-trip decimal representation ('.' separator).
std::string format_double(double v);

}  // namespace dcvs
