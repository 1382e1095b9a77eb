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
#include <dcvs/phase_retrieval.hpp>
#include <dcvs/rng.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <numeric>

namespace dcvs {

static_assert(std::endian::native == std::endian::little,
              "instance container assumes a little-endian host");

std::string_view to_string(OutlierKind kind) {
  return kind == OutlierKind::Cauchy ? "cauchy" : "uniform";
}

std::optional<OutlierKind> parse_outlier_kind(std::string_view name) {
  if (name == "cauchy") return OutlierKind::Cauchy;
  if (name == "uniform") return OutlierKind::Uniform;
  return std::nullopt;
}

Eigen::Index outlier_count(double p_fail, Eigen::Index n) {
  return static_cast<Eigen::Index>(std::llround(p_fail * static_cast<double>(n)));
}

Instance generate_instance(const GenParams& params) {
  detail::require(params.d >= 1 && params.n >= params.d, "generate_instance: need n >= d >= 1");
  detail::require(params.p_fail >= 0 && params.p_fail < 1,
                  "generate_instance: p_fail must lie in [0, 1)");
  detail::require(params.s > 0, "generate_instance: s must be positive");
  detail::require(params.noise_variance >= 0,
                  "generate_instance: noise variance must be nonnegative");
  const Eigen::Index n = params.n, d = params.d;
  const Eigen::Index m = outlier_count(params.p_fail, n);
  detail::require(m < n, "generate_instance: every measurement would be an outlier");

  Rng rng(params.seed);
  Instance inst;
  inst.gen = params;

  inst.x_star.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) inst.x_star(j) = rng.uniform() < 0.5 ? 1.0 : -1.0;

  inst.A.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) inst.A(i, j) = rng.normal();

  const VectorXd ax = inst.A * inst.x_star;
  const VectorXd clean = ax.cwiseProduct(ax);
  const double noise_std = std::sqrt(params.noise_variance);
  inst.b.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) inst.b(i) = clean(i) + noise_std * rng.normal();

  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto j = i + static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  inst.outlier_set.assign(perm.begin(), perm.begin() + m);
  std::sort(inst.outlier_set.begin(), inst.outlier_set.end());

  const double big_m = clean.maxCoeff();
  for (Eigen::Index i : inst.outlier_set) {
    const double u = rng.uniform();
    inst.b(i) = params.outlier_kind == OutlierKind::Cauchy
                    ? params.s * big_m * std::tan(0.5 * std::numbers::pi * u)
                    : params.s * big_m * u;
  }
  return inst;
}

namespace {

double median_of(std::vector<double> v) {
  const std::size_t n = v.size();
  const std::size_t mid = n / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

VectorXd random_unit(Rng& rng, Eigen::Index d) {
  VectorXd v(d);
  for (Eigen::Index j = 0; j < d; ++j) v(j) = rng.normal();
  const double nv = v.norm();
  if (nv == 0) {
    v.setZero();
    v(0) = 1;
    return v;
  }
  return v / nv;
}

constexpr int kPowerIterations = 100;
constexpr double kTruncation = 9.0;

}  // namespace

VectorXd spectral_init(const MatrixXd& A, const VectorXd& b, std::uint64_t seed) {
  detail::require(A.rows() >= 1, "spectral_init: need at least one measurement");
  detail::require_shape(A.rows() == b.size(), "spectral_init: A and b disagree");
  const Eigen::Index n = A.rows(), d = A.cols();
  Rng rng(mix_seed(seed, 0x5eed));
  const VectorXd start = random_unit(rng, d);

  std::vector<double> abs_b(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) abs_b[static_cast<std::size_t>(i)] = std::abs(b(i));
  const double med = median_of(abs_b);
  auto fallback = [&] { return VectorXd(start * std::sqrt(std::max(med, 1e-12))); };

  std::vector<Eigen::Index> kept;
  std::vector<double> kept_b;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (b(i) >= 0 && b(i) <= kTruncation * med) {
      kept.push_back(i);
      kept_b.push_back(b(i));
    }
  }
  if (kept.empty()) return fallback();
  const double radius_sq = median_of(kept_b);
  if (!(radius_sq > 0)) return fallback();

  MatrixXd weighted(static_cast<Eigen::Index>(kept.size()), d);
  for (std::size_t r = 0; r < kept.size(); ++r)
    weighted.row(static_cast<Eigen::Index>(r)) = std::sqrt(kept_b[r]) * A.row(kept[r]);
  const Eigen::MatrixXd Y = (weighted.transpose() * weighted) / static_cast<double>(n);

  VectorXd v = start;
  for (int it = 0; it < kPowerIterations; ++it) {
    VectorXd w = Y * v;
    const double nw = w.norm();
    if (!(nw > 0)) return fallback();
    v = w / nw;
  }
  return std::sqrt(radius_sq) * v;
}

SuccessResult success(const VectorXd& x, const VectorXd& x_star, double threshold) {
  detail::require_shape(x.size() == x_star.size(), "success: size mismatch");
  const double ns = x_star.norm();
  detail::require(ns > 0, "success: x_star must be nonzero");
  const double err = std::min((x_star - x).norm(), (x_star + x).norm()) / ns;
  return {err, err < threshold};
}

double kappa_mu(const MatrixXd& A, const VectorXd& b, double lambda, double lipschitz_g,
                double mu) {
  detail::require(mu > 0, "kappa_mu: mu must be positive");
  detail::require(lambda > 0, "kappa_mu: lambda must be positive");
  detail::require(lipschitz_g >= 0, "kappa_mu: L_g must be nonnegative");
  detail::require_shape(A.rows() == b.size(), "kappa_mu: A and b disagree");
  const VectorXd row_sq = A.rowwise().squaredNorm();
  const double quartic = std::sqrt(row_sq.array().square().sum());
  const double max_row = row_sq.maxCoeff();
  const double max_weighted = (row_sq.array() * b.array().abs()).maxCoeff();
  return 2 * lipschitz_g * quartic + 6 * lambda * max_row + 4 * max_weighted / mu;
}

double kappa_mu_certified(const MatrixXd& A, const VectorXd& b, double lambda,
                          double lipschitz_g, double mu) {
  detail::require(mu > 0, "kappa_mu_certified: mu must be positive");
  detail::require(lambda > 0, "kappa_mu_certified: lambda must be positive");
  detail::require(lipschitz_g >= 0, "kappa_mu_certified: L_g must be nonnegative");
  detail::require_shape(A.rows() == b.size(), "kappa_mu_certified: A and b disagree");
  const VectorXd row_sq = A.rowwise().squaredNorm();
  const double quartic = std::sqrt(row_sq.array().square().sum());
  const double sum_row = row_sq.sum();
  const double sum_weighted = (row_sq.array() * b.array().abs()).sum();
  return 2 * lipschitz_g * quartic + 6 * lambda * sum_row + 4 * sum_weighted / mu;
}

SmoothMap<double> make_rpr_map(const Instance& instance) {
  return make_rpr_map(std::make_shared<const MatrixXd>(instance.A),
                      std::make_shared<const VectorXd>(instance.b));
}

namespace {

constexpr char kMagic[8] = {'D', 'C', 'V', 'S', 'I', 'N', 'S', '1'};

template <typename T>
void put(std::ofstream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& is, const std::filesystem::path& path) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T)))
    throw IoError("truncated instance file: " + path.string());
  return v;
}

void get_doubles(std::ifstream& is, double* dst, std::size_t count,
                 const std::filesystem::path& path) {
  if (!is.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(count * sizeof(double))))
    throw IoError("truncated instance file: " + path.string());
}

}  // namespace

void save_instance(const Instance& instance, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  const auto& g = instance.gen;
  os.write(kMagic, sizeof(kMagic));
  put(os, static_cast<std::uint64_t>(instance.d()));
  put(os, static_cast<std::uint64_t>(instance.n()));
  put(os, g.p_fail);
  put(os, g.s);
  put(os, static_cast<std::uint8_t>(g.outlier_kind));
  put(os, g.noise_variance);
  put(os, g.seed);
  os.write(reinterpret_cast<const char*>(instance.A.data()),
           static_cast<std::streamsize>(instance.A.size() * sizeof(double)));
  os.write(reinterpret_cast<const char*>(instance.b.data()),
           static_cast<std::streamsize>(instance.b.size() * sizeof(double)));
  os.write(reinterpret_cast<const char*>(instance.x_star.data()),
           static_cast<std::streamsize>(instance.x_star.size() * sizeof(double)));
  put(os, static_cast<std::uint64_t>(instance.outlier_set.size()));
  for (Eigen::Index i : instance.outlier_set) put(os, static_cast<std::uint64_t>(i));
  if (!os) throw IoError("write failed: " + path.string());
}

Instance load_instance(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open for reading: " + path.string());
  char magic[8];
  if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw IoError("not an instance file: " + path.string());
  Instance inst;
  const auto d = get<std::uint64_t>(is, path);
  const auto n = get<std::uint64_t>(is, path);
  if (d == 0 || n == 0 || d > (1u << 24) || n > (1u << 28))
    throw IoError("implausible instance dimensions in " + path.string());
  inst.gen.d = static_cast<Eigen::Index>(d);
  inst.gen.n = static_cast<Eigen::Index>(n);
  inst.gen.p_fail = get<double>(is, path);
  inst.gen.s = get<double>(is, path);
  const auto kind = get<std::uint8_t>(is, path);
  if (kind > 1) throw IoError("unknown outlier kind in " + path.string());
  inst.gen.outlier_kind = static_cast<OutlierKind>(kind);
  inst.gen.noise_variance = get<double>(is, path);
  inst.gen.seed = get<std::uint64_t>(is, path);
  inst.A.resize(inst.gen.n, inst.gen.d);
  inst.b.resize(inst.gen.n);
  inst.x_star.resize(inst.gen.d);
  get_doubles(is, inst.A.data(), static_cast<std::size_t>(inst.A.size()), path);
  get_doubles(is, inst.b.data(), static_cast<std::size_t>(n), path);
  get_doubles(is, inst.x_star.data(), static_cast<std::size_t>(d), path);
  const auto count = get<std::uint64_t>(is, path);
  if (count >= n) throw IoError("outlier count exceeds measurements in " + path.string());
  inst.outlier_set.resize(count);
  for (auto& idx : inst.outlier_set) {
    const auto v = get<std::uint64_t>(is, path);
    if (v >= n) throw IoError("outlier index out of range in " + path.string());
    idx = static_cast<Eigen::Index>(v);
  }
  return inst;
}

}  // namespace dcvs
