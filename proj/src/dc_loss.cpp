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
#include <dcvs/dc_loss.hpp>

#include <locale>
#include <sstream>

namespace dcvs {

namespace {

std::string fmt_number(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << v;
  return os.str();
}

}  // namespace

std::string LossSpec::label() const {
  std::string out(to_string(kind));
  switch (kind) {
    case LossKind::MCP: out += "_lambda" + fmt_number(lambda) + "_beta" + fmt_number(beta); break;
    case LossKind::CappedL1: out += "_beta" + fmt_number(beta); break;
    case LossKind::TrimmedL1: out += "_Kn" + fmt_number(K_over_n); break;
    default: break;
  }
  return out;
}

std::string LossSpec::params_string() const {
  switch (kind) {
    case LossKind::MCP: return "lambda=" + fmt_number(lambda) + ";beta=" + fmt_number(beta);
    case LossKind::CappedL1: return "beta=" + fmt_number(beta);
    case LossKind::TrimmedL1: return "K_over_n=" + fmt_number(K_over_n);
    default: return "";
  }
}

Eigen::Index trimmed_count(double K_over_n, Eigen::Index n) {
  detail::require(K_over_n >= 0 && K_over_n < 1, "trimmed_count: K_over_n must lie in [0, 1)");
  return static_cast<Eigen::Index>(std::llround(K_over_n * static_cast<double>(n)));
}

DcLoss<double> resolve_loss(const LossSpec& spec, Eigen::Index n, double eta) {
  LossParams<double> params;
  params.lambda = spec.lambda;
  params.beta = spec.beta;
  if (spec.kind == LossKind::TrimmedL1) params.K = trimmed_count(spec.K_over_n, n);
  return make_loss(spec.kind, params, n, eta);
}

}  // namespace dcvs
