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
// dcvs: command-line driver for instance generation, single solves, sweeps
// and self-checks.

#include <dcvs/bench.hpp>
#include <dcvs/phase_retrieval.hpp>
#include <dcvs/selfcheck.hpp>
#include <dcvs/solver.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

namespace {

dcvs::LossSpec parse_loss_arg(const std::string& text) {
  // Accept a bare name ("l1") or a JSON object.
  if (!text.empty() && text.front() == '{')
    return dcvs::loss_spec_from_json(nlohmann::json::parse(text));
  return dcvs::loss_spec_from_json(nlohmann::json{{"name", text}});
}

int cmd_gen(long long d, long long n, double p_fail, double s, std::uint64_t seed,
            const std::string& kind, double noise, const std::string& out) {
  dcvs::GenParams gen;
  gen.d = d;
  gen.n = n;
  gen.p_fail = p_fail;
  gen.s = s;
  gen.seed = seed;
  gen.noise_variance = noise;
  const auto k = dcvs::parse_outlier_kind(kind);
  if (!k) throw dcvs::ParameterError("unknown outlier kind: " + kind);
  gen.outlier_kind = *k;
  const auto inst = dcvs::generate_instance(gen);
  dcvs::save_instance(inst, out);
  std::cout << "wrote " << out << " (d=" << d << ", n=" << n
            << ", outliers=" << inst.outlier_set.size() << ")\n";
  return 0;
}

int cmd_solve(const std::string& instance_path, const std::string& loss_text,
              const std::string& trace_path, const std::string& config_path) {
  const auto inst = dcvs::load_instance(instance_path);
  const auto spec = parse_loss_arg(loss_text);
  dcvs::SolverConfig<double> solver;
  if (!config_path.empty()) solver = dcvs::load_sweep_config(config_path).solver;
  const auto loss = dcvs::resolve_loss(spec, inst.n(), solver.eta);
  const auto map = dcvs::make_rpr_map(inst);
  const auto x1 = dcvs::spectral_init(inst.A, inst.b, inst.gen.seed);
  const auto run = dcvs::solve(loss, map, x1, solver);
  const auto ok = dcvs::success(run.x_final, inst.x_star);
  if (!trace_path.empty()) {
    std::ofstream os(trace_path);
    if (!os) throw dcvs::IoError("cannot open for writing: " + trace_path);
    dcvs::write_trace_csv(run, os);
  }
  std::cout << "loss=" << spec.label() << " iterations=" << run.iteration_count()
            << " termination=" << dcvs::to_string(run.termination)
            << " rel_error=" << dcvs::format_double(ok.rel_error)
            << " success=" << (ok.ok ? "yes" : "no")
            << " seconds=" << dcvs::format_double(run.wall_seconds) << '\n';
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_override) {
  auto cfg = dcvs::load_sweep_config(config_path);
  if (!out_override.empty()) cfg.output_dir = out_override;
  const auto result = dcvs::run_sweep(cfg);
  dcvs::emit_outputs(result, cfg.output_dir);
  for (const auto& c : result.cells) {
    std::cout << "n/d=" << c.n_over_d << " p_fail=" << dcvs::format_double(c.p_fail)
              << " s=" << dcvs::format_double(c.s)
              << " loss=" << result.losses[c.loss_index].label()
              << " success_rate=" << dcvs::format_double(c.success_rate) << '\n';
  }
  std::cout << "outputs in " << cfg.output_dir.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variable smoothing for robust phase retrieval with DC losses"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen", "Generate a synthetic instance file");
  long long d = 100, n = 1000;
  double p_fail = 0.0, s = 1.0, noise = 1e-6;
  std::uint64_t seed = 0;
  std::string kind = "cauchy", out;
  gen->add_option("--d", d, "Signal dimension")->required();
  gen->add_option("--n", n, "Number of measurements")->required();
  gen->add_option("--p-fail", p_fail, "Fraction of outliers");
  gen->add_option("--s", s, "Outlier scale");
  gen->add_option("--seed", seed, "Random seed");
  gen->add_option("--outlier-kind", kind, "cauchy | uniform");
  gen->add_option("--noise-variance", noise, "Inlier noise variance");
  gen->add_option("--out", out, "Output instance file")->required();

  auto* solve = app.add_subcommand("solve", "Run the solver on one instance");
  std::string instance_path, loss_text = "l1", trace_path, solve_config;
  solve->add_option("--instance", instance_path, "Instance file")->required();
  solve->add_option("--loss", loss_text, "Loss name or JSON spec");
  solve->add_option("--trace", trace_path, "Per-iteration trace CSV");
  solve->add_option("--config", solve_config, "Config file whose solver block is used");

  auto* sweep = app.add_subcommand("sweep", "Run a success-rate sweep");
  std::string config_path, sweep_out;
  sweep->add_option("--config", config_path, "Sweep configuration (JSON)")->required();
  sweep->add_option("--out", sweep_out, "Override output directory");

  auto* selfcheck = app.add_subcommand("selfcheck", "Cross-check operators against oracles");
  std::uint64_t check_seed = 1;
  selfcheck->add_option("--seed", check_seed, "Random seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return cmd_gen(d, n, p_fail, s, seed, kind, noise, out);
    if (*solve) return cmd_solve(instance_path, loss_text, trace_path, solve_config);
    if (*sweep) return cmd_sweep(config_path, sweep_out);
    if (*selfcheck) return dcvs::run_selfcheck(std::cout, check_seed) == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
