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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Result {
  int status = -1;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string("\"") + DCVS_CLI_PATH + "\" " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t got = 0;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

fs::path workdir() {
  const fs::path dir = fs::temp_directory_path() / "dcvs_test_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("gen then solve with a trace") {
  const auto dir = workdir();
  const auto inst = dir / "inst.bin";
  auto r = run("gen --d 10 --n 100 --p-fail 0.1 --seed 3 --out \"" + inst.string() + "\"");
  CHECK(r.status == 0);
  CHECK(fs::exists(inst));

  const auto trace = dir / "trace.csv";
  r = run("solve --instance \"" + inst.string() + "\" --loss trimmed_l1 --trace \"" +
          trace.string() + "\"");
  CHECK(r.status == 0);
  CHECK(r.out.find("termination=") != std::string::npos);
  const auto text = slurp(trace);
  CHECK(text.rfind("k,mu,F_k,grad_norm,gamma,backtracks,true_cost\n", 0) == 0);
  CHECK(text.find("\n1,1,") != std::string::npos);

  r = run("solve --instance \"" + inst.string() +
          "\" --loss '{\"name\":\"capped_l1\",\"beta\":20}'");
  CHECK(r.status == 0);
  CHECK(r.out.find("loss=capped_l1_beta20") != std::string::npos);
}

TEST_CASE("sweep writes its outputs") {
  const auto dir = workdir();
  const auto cfg = dir / "cfg.json";
  std::ofstream(cfg) << R"({"d": 6, "n_over_d": [8], "p_fail": [0.1], "trials": 2,
                         "losses": [{"name": "l1"}], "workers": 1})";
  const auto out = dir / "out";
  const auto r = run("sweep --config \"" + cfg.string() + "\" --out \"" + out.string() + "\"");
  CHECK(r.status == 0);
  for (const char* f : {"summary.csv", "trials.csv", "timing.csv", "heatmap_l1.csv"})
    CHECK(fs::exists(out / f));
}

TEST_CASE("selfcheck passes") {
  const auto r = run("selfcheck --seed 2");
  CHECK(r.status == 0);
  CHECK(r.out.find("FAIL") == std::string::npos);
}

TEST_CASE("errors exit nonzero") {
  const auto dir = workdir();
  CHECK(run("").status != 0);
  CHECK(run("solve --instance \"" + (dir / "none.bin").string() + "\"").status == 2);
  CHECK(run("gen --d 5 --n 3 --out \"" + (dir / "x.bin").string() + "\"").status == 2);
  CHECK(run("solve --instance x --loss bogus").status != 0);
}
