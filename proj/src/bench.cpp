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
#include <dcvs/bench.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>
#include <tuple>
#include <limits>
#include <locale>

namespace dcvs {

using nlohmann::json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void SweepConfig::validate() const {
  detail::require(d >= 1, "sweep: d must be positive");
  detail::require(!n_over_d.empty() && !p_fail.empty() && !s.empty() && !losses.empty(),
                  "sweep: every grid must be nonempty");
  detail::require(trials >= 1, "sweep: trials must be positive");
  for (int r : n_over_d) detail::require(r >= 1, "sweep: n_over_d entries must be >= 1");
  for (double p : p_fail) {
    detail::require(p >= 0 && p < 1, "sweep: p_fail entries must lie in [0, 1)");
    for (int r : n_over_d)
      detail::require(outlier_count(p, r * d) < r * d, "sweep: p_fail leaves no inliers");
  }
  for (double v : s) detail::require(v > 0, "sweep: s entries must be positive");
  // Every loss must be constructible for every n in the grid.
  for (const auto& spec : losses)
    for (int r : n_over_d) (void)resolve_loss(spec, r * d, solver.eta);
  solver.validate();
}

LossSpec loss_spec_from_json(const json& j) {
  LossSpec spec;
  const auto name = j.at("name").get<std::string>();
  const auto kind = parse_loss_kind(name);
  if (!kind) throw ParameterError("unknown loss name: " + name);
  spec.kind = *kind;
  spec.lambda = j.value("lambda", spec.lambda);
  spec.beta = j.value("beta", spec.beta);
  spec.K_over_n = j.value("K_over_n", spec.K_over_n);
  return spec;
}

namespace {

SolverConfig<double> solver_from_json(const json& j) {
  SolverConfig<double> cfg;
  cfg.alpha = j.value("alpha", cfg.alpha);
  cfg.eta = j.value("eta", cfg.eta);
  cfg.rho = j.value("rho", cfg.rho);
  cfg.c = j.value("c", cfg.c);
  cfg.rel_tol = j.value("rel_tol", cfg.rel_tol);
  cfg.max_iters = j.value("max_iters", cfg.max_iters);
  if (j.contains("time_cap_seconds")) {
    if (j["time_cap_seconds"].is_null())
      cfg.time_cap_seconds.reset();
    else
      cfg.time_cap_seconds = j["time_cap_seconds"].get<double>();
  }
  const auto rule = j.value("gamma_init_rule", std::string("previous_step"));
  if (rule == "previous_step") {
    cfg.gamma_init_rule = GammaInitRule::PreviousStep;
  } else if (rule == "constant") {
    cfg.gamma_init_rule = GammaInitRule::Constant;
    cfg.gamma_init_constant = j.value("gamma_init", cfg.gamma_init_constant);
  } else if (rule == "kappa") {
    cfg.gamma_init_rule = GammaInitRule::TwoOneMinusCOverKappa;
  } else {
    throw ParameterError("unknown gamma_init_rule: " + rule);
  }
  if (j.contains("gamma0")) {
    cfg.gamma0_policy = Gamma0Policy::Fixed;
    cfg.gamma0 = j["gamma0"].get<double>();
  }
  return cfg;
}

}  // namespace

SweepConfig sweep_config_from_json(const json& j) {
  SweepConfig cfg;
  cfg.d = j.value("d", cfg.d);
  cfg.n_over_d = j.value("n_over_d", cfg.n_over_d);
  cfg.p_fail = j.value("p_fail", cfg.p_fail);
  cfg.s = j.value("s", cfg.s);
  cfg.trials = j.value("trials", cfg.trials);
  cfg.base_seed = j.value("base_seed", cfg.base_seed);
  cfg.noise_variance = j.value("noise_variance", cfg.noise_variance);
  cfg.success_threshold = j.value("success_threshold", cfg.success_threshold);
  cfg.workers = j.value("workers", cfg.workers);
  if (j.contains("outlier_kind")) {
    const auto name = j["outlier_kind"].get<std::string>();
    const auto kind = parse_outlier_kind(name);
    if (!kind) throw ParameterError("unknown outlier_kind: " + name);
    cfg.outlier_kind = *kind;
  }
  if (j.contains("losses")) {
    for (const auto& l : j["losses"]) cfg.losses.push_back(loss_spec_from_json(l));
  } else {
    for (double beta : {100.0, 1000.0, 10000.0})
      cfg.losses.push_back({LossKind::CappedL1, 1.0, beta, 0.0});
    for (double kn : {0.2, 0.3, 0.4}) cfg.losses.push_back({LossKind::TrimmedL1, 1.0, 1.0, kn});
  }
  if (j.contains("solver")) cfg.solver = solver_from_json(j["solver"]);
  if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();
  return cfg;
}

SweepConfig load_sweep_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config: " + path.string());
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw ParameterError("malformed config " + path.string() + ": " + e.what());
  }
  return sweep_config_from_json(j);
}

std::uint64_t trial_seed(std::uint64_t base_seed, int trial) {
  return base_seed + static_cast<std::uint64_t>(trial);
}

std::size_t resolve_workers(std::size_t configured) {
  if (const char* env = std::getenv("DCVS_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  if (configured > 0) return configured;
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

struct WorkItem {
  std::size_t r_idx, p_idx, s_idx;
  int trial;
};

// Runs every loss on one generated instance from a shared initial point.
std::vector<TrialRow> run_work_item(const SweepConfig& cfg, const WorkItem& item) {
  const int ratio = cfg.n_over_d[item.r_idx];
  GenParams gen;
  gen.d = cfg.d;
  gen.n = static_cast<Eigen::Index>(ratio) * cfg.d;
  gen.p_fail = cfg.p_fail[item.p_idx];
  gen.s = cfg.s[item.s_idx];
  gen.outlier_kind = cfg.outlier_kind;
  gen.noise_variance = cfg.noise_variance;
  gen.seed = trial_seed(cfg.base_seed, item.trial);

  const Instance inst = generate_instance(gen);
  const VectorXd x1 = spectral_init(inst.A, inst.b, gen.seed);
  const SmoothMap<double> map = make_rpr_map(inst);

  std::vector<TrialRow> rows;
  for (std::size_t li = 0; li < cfg.losses.size(); ++li) {
    TrialRow row;
    row.n_over_d = ratio;
    row.n = gen.n;
    row.p_fail = gen.p_fail;
    row.s = gen.s;
    row.loss_index = li;
    row.trial = item.trial;
    row.seed = gen.seed;
    const DcLoss<double> loss = resolve_loss(cfg.losses[li], gen.n, cfg.solver.eta);
    SolverConfig<double> solver = cfg.solver;
    if (solver.gamma_init_rule == GammaInitRule::TwoOneMinusCOverKappa) {
      const double lambda = loss.kind == LossKind::MCP ? loss.params.lambda : 1.0;
      solver.kappa = [&inst, lambda, lg = loss.lipschitz_g](double mu) {
        return kappa_mu_certified(inst.A, inst.b, lambda, lg, mu);
      };
    }
    try {
      const auto run = solve(loss, map, x1, solver);
      const auto ok = success(run.x_final, inst.x_star, cfg.success_threshold);
      row.rel_error = ok.rel_error;
      row.success = ok.ok;
      row.iterations = run.iteration_count();
      row.termination = std::string(to_string(run.termination));
      row.final_cost = run.final_true_cost;
      row.seconds = run.wall_seconds;
    } catch (const DiagnosticError& e) {
      row.rel_error = std::numeric_limits<double>::quiet_NaN();
      row.success = false;
      row.iterations = e.iteration();
      row.termination = "error";
      row.final_cost = std::numeric_limits<double>::quiet_NaN();
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

SweepResult run_sweep(const SweepConfig& config, std::optional<std::size_t> workers) {
  config.validate();
  std::vector<WorkItem> items;
  for (std::size_t r = 0; r < config.n_over_d.size(); ++r)
    for (std::size_t p = 0; p < config.p_fail.size(); ++p)
      for (std::size_t si = 0; si < config.s.size(); ++si)
        for (int t = 0; t < config.trials; ++t) items.push_back({r, p, si, t});

  std::vector<std::vector<TrialRow>> slots(items.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= items.size()) return;
      try {
        slots[i] = run_work_item(config, items[i]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(items.size());
        return;
      }
    }
  };
  const std::size_t count =
      std::min(workers.value_or(resolve_workers(config.workers)), std::max<std::size_t>(items.size(), 1));
  if (count <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(count);
    for (std::size_t w = 0; w < count; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  SweepResult result;
  result.d = config.d;
  result.n_over_d = config.n_over_d;
  result.p_fail = config.p_fail;
  result.s = config.s;
  result.losses = config.losses;
  for (auto& slot : slots)
    for (auto& row : slot) result.trials.push_back(std::move(row));
  result.cells = summarize(result);
  return result;
}

std::vector<CellSummary> summarize(const SweepResult& result) {
  struct Acc {
    std::vector<double> errs, iters, secs;
    int trials = 0, successes = 0;
  };
  // Key: (n_over_d index, p_fail index, s index, loss).
  using Key = std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>;
  auto index_of = [](const auto& grid, const auto& v) {
    return static_cast<std::size_t>(std::find(grid.begin(), grid.end(), v) - grid.begin());
  };
  std::map<Key, Acc> acc;
  for (const auto& row : result.trials) {
    const Key key{index_of(result.n_over_d, row.n_over_d), index_of(result.p_fail, row.p_fail),
                  index_of(result.s, row.s), row.loss_index};
    auto& a = acc[key];
    ++a.trials;
    if (row.success) ++a.successes;
    if (row.termination != "error") {
      a.errs.push_back(row.rel_error);
      a.iters.push_back(static_cast<double>(row.iterations));
      a.secs.push_back(row.seconds);
    }
  }
  std::vector<CellSummary> cells;
  for (std::size_t r = 0; r < result.n_over_d.size(); ++r)
    for (std::size_t p = 0; p < result.p_fail.size(); ++p)
      for (std::size_t si = 0; si < result.s.size(); ++si)
        for (std::size_t li = 0; li < result.losses.size(); ++li) {
          CellSummary c;
          c.d = result.d;
          c.n_over_d = result.n_over_d[r];
          c.n = static_cast<Eigen::Index>(c.n_over_d) * result.d;
          c.p_fail = result.p_fail[p];
          c.s = result.s[si];
          c.loss_index = li;
          const auto it = acc.find({r, p, si, li});
          if (it != acc.end()) {
            const Acc& a = it->second;
            c.trials = a.trials;
            c.successes = a.successes;
            c.success_rate = static_cast<double>(a.successes) / static_cast<double>(a.trials);
            c.mean_rel_err = mean(a.errs);
            c.median_rel_err = median(a.errs);
            c.mean_seconds = mean(a.secs);
            c.mean_iters = mean(a.iters);
            c.median_iters = median(a.iters);
          }
          cells.push_back(c);
        }
  return cells;
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  os.imbue(std::locale::classic());
  return os;
}

void close_csv(std::ofstream& os, const std::filesystem::path& path) {
  os.flush();
  if (!os) throw IoError("write failed: " + path.string());
}

}  // namespace

void emit_outputs(const SweepResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  const auto& losses = result.losses;

  {
    const auto path = dir / "summary.csv";
    auto os = open_csv(path);
    os << kSummaryHeader << '\n';
    for (const auto& c : result.cells) {
      if (c.trials == 0) continue;
      const auto& spec = losses.at(c.loss_index);
      os << c.d << ',' << c.n << ',' << c.n_over_d << ',' << format_double(c.p_fail) << ','
         << format_double(c.s) << ',' << spec.label() << ',' << spec.params_string() << ','
         << c.trials << ',' << c.successes << ',' << format_double(c.success_rate) << ','
         << format_double(c.mean_rel_err) << ',' << format_double(c.median_rel_err) << ','
         << format_double(c.mean_iters) << ',' << format_double(c.median_iters) << '\n';
    }
    close_csv(os, path);
  }
  {
    const auto path = dir / "trials.csv";
    auto os = open_csv(path);
    os << kTrialsHeader << '\n';
    for (const auto& t : result.trials) {
      std::string err = t.error;
      std::replace(err.begin(), err.end(), ',', ';');
      std::replace(err.begin(), err.end(), '\n', ' ');
      os << result.d << ',' << t.n << ',' << t.n_over_d << ',' << format_double(t.p_fail) << ','
         << format_double(t.s) << ',' << losses.at(t.loss_index).label() << ',' << t.trial << ','
         << t.seed << ',' << format_double(t.rel_error) << ',' << (t.success ? 1 : 0) << ','
         << t.iterations << ',' << t.termination << ',' << format_double(t.final_cost) << ','
         << err << '\n';
    }
    close_csv(os, path);
  }
  {
    const auto path = dir / "timing.csv";
    auto os = open_csv(path);
    os << kTimingHeader << '\n';
    for (const auto& c : result.cells) {
      if (c.trials == 0) continue;
      os << c.d << ',' << c.n << ',' << c.n_over_d << ',' << format_double(c.p_fail) << ','
         << format_double(c.s) << ',' << losses.at(c.loss_index).label() << ','
         << format_double(c.mean_seconds) << ',' << format_double(c.mean_iters) << ','
         << format_double(c.median_iters) << '\n';
    }
    close_csv(os, path);
  }
  // Heatmaps: rows p_fail, columns n_over_d.
  for (std::size_t li = 0; li < losses.size(); ++li) {
    for (std::size_t si = 0; si < result.s.size(); ++si) {
      std::string name = "heatmap_" + losses[li].label();
      if (result.s.size() > 1) name += "_s" + format_double(result.s[si]);
      const auto path = dir / (name + ".csv");
      auto os = open_csv(path);
      os << "p_fail\\n_over_d";
      for (int r : result.n_over_d) os << ',' << r;
      os << '\n';
      for (std::size_t p = 0; p < result.p_fail.size(); ++p) {
        os << format_double(result.p_fail[p]);
        for (std::size_t r = 0; r < result.n_over_d.size(); ++r) {
          const auto it = std::find_if(result.cells.begin(), result.cells.end(), [&](const auto& c) {
            return c.n_over_d == result.n_over_d[r] && c.p_fail == result.p_fail[p] &&
                   c.s == result.s[si] && c.loss_index == li;
          });
          os << ',';
          if (it != result.cells.end() && it->trials > 0) os << format_double(it->success_rate);
        }
        os << '\n';
      }
      close_csv(os, path);
    }
  }
}

}  // namespace dcvs
