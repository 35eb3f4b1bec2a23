// Copyright 2026 The sgdbound Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sgdbound/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sgdbound/csv.hpp"
#include "sgdbound/error.hpp"

namespace sgdbound {
namespace {

// Eigenvalues below this fraction of the largest one count as zero.
constexpr double kSingularRelTol = 1e-10;
constexpr double kLogisticTargetGrad = 1e-12;
constexpr double kLogisticRequiredGrad = 1e-10;
constexpr std::size_t kLogisticMaxIters = 2'000'000;

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument(what);
}

// log(1 + exp(u)) without overflow.
double softplus(double u) {
  return u > 0.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u));
}

double logistic_sigmoid(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

Vector gaussian_vector(std::size_t n, CounterRng& rng) {
  Vector v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
  return v;
}

void check_rows(const Matrix& rows) {
  require(rows.rows() >= 1, "finite-sum problems need at least one data row");
  require(rows.cols() >= 1, "data rows must have at least one feature");
  require(rows.allFinite(), "data rows must be finite");
}

}  // namespace

std::string_view to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::noisy_quadratic: return "noisy_quadratic";
    case ProblemKind::least_squares: return "least_squares";
    case ProblemKind::logistic: return "logistic";
  }
  return "unknown";
}

std::optional<ProblemKind> parse_problem_kind(std::string_view name) {
  for (auto k : {ProblemKind::noisy_quadratic, ProblemKind::least_squares,
                 ProblemKind::logistic}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

double ProblemOracle::value(const Vector& x) const {
  switch (kind_) {
    case ProblemKind::noisy_quadratic: {
      const Vector e = x - x_star_;
      return 0.5 * e.dot(spectrum_.cwiseProduct(e));
    }
    case ProblemKind::least_squares: {
      const Vector res = rows_ * x - targets_;
      return 0.5 * res.squaredNorm() / static_cast<double>(rows_.rows());
    }
    case ProblemKind::logistic: {
      const Vector margins = targets_.cwiseProduct(rows_ * x);
      double loss = 0.0;
      for (Eigen::Index i = 0; i < margins.size(); ++i) loss += softplus(-margins[i]);
      return loss / static_cast<double>(rows_.rows()) + 0.5 * l2_ * x.squaredNorm();
    }
  }
  return 0.0;
}

Vector ProblemOracle::gradient(const Vector& x) const {
  switch (kind_) {
    case ProblemKind::noisy_quadratic:
      return spectrum_.cwiseProduct(x - x_star_);
    case ProblemKind::least_squares:
      return rows_.transpose() * (rows_ * x - targets_) / static_cast<double>(rows_.rows());
    case ProblemKind::logistic: {
      const Vector margins = targets_.cwiseProduct(rows_ * x);
      Vector coef(margins.size());
      for (Eigen::Index i = 0; i < margins.size(); ++i) {
        coef[i] = -targets_[i] * logistic_sigmoid(-margins[i]);
      }
      return rows_.transpose() * coef / static_cast<double>(rows_.rows()) + l2_ * x;
    }
  }
  return {};
}

Vector ProblemOracle::component_gradient(std::size_t i, const Vector& x) const {
  require(kind_ != ProblemKind::noisy_quadratic, "quadratic instances have no summands");
  require(i < components(), "summand index out of range");
  const auto row = rows_.row(static_cast<Eigen::Index>(i));
  const double z = row.dot(x);
  if (kind_ == ProblemKind::least_squares) {
    return row.transpose() * (z - targets_[static_cast<Eigen::Index>(i)]);
  }
  const double y = targets_[static_cast<Eigen::Index>(i)];
  return row.transpose() * (-y * logistic_sigmoid(-y * z)) + l2_ * x;
}

void ProblemOracle::stochastic_gradient(const Vector& x, CounterRng& rng, Vector& g) const {
  switch (kind_) {
    case ProblemKind::noisy_quadratic:
      g = spectrum_.cwiseProduct(x - x_star_);
      if (noise_std_ > 0.0) {
        for (Eigen::Index i = 0; i < g.size(); ++i) g[i] += noise_std_ * rng.normal();
      }
      return;
    case ProblemKind::least_squares:
    case ProblemKind::logistic: {
      const auto i = static_cast<Eigen::Index>(rng.below(components()));
      const auto row = rows_.row(i);
      const double z = row.dot(x);
      if (kind_ == ProblemKind::least_squares) {
        g = row.transpose() * (z - targets_[i]);
      } else {
        const double y = targets_[i];
        g = row.transpose() * (-y * logistic_sigmoid(-y * z)) + l2_ * x;
      }
      return;
    }
  }
}

GradientSample ProblemOracle::sample_gradient(const Vector& x, CounterRng& rng) const {
  GradientSample out;
  stochastic_gradient(x, rng, out.g);
  out.fx = value(x);
  return out;
}

ProblemOracle make_noisy_quadratic(std::span<const double> spectrum, const Vector& x_star,
                                   double sigma2, std::uint64_t master_seed) {
  require(!spectrum.empty(), "spectrum must be non-empty");
  require(static_cast<std::size_t>(x_star.size()) == spectrum.size(),
          "x_star must have one entry per eigenvalue");
  for (double v : spectrum) {
    require(std::isfinite(v), "eigenvalues must be finite");
    if (v < 0.0) throw InvalidArgument("negative eigenvalue " + format_double(v));
  }
  require(std::isfinite(sigma2) && sigma2 >= 0.0, "sigma2 must be finite and >= 0");
  require(x_star.allFinite(), "x_star must be finite");

  ProblemOracle o;
  o.kind_ = ProblemKind::noisy_quadratic;
  o.spectrum_ = Eigen::Map<const Vector>(spectrum.data(), static_cast<Eigen::Index>(spectrum.size()));
  o.mu_ = o.spectrum_.minCoeff();
  o.L_ = o.spectrum_.maxCoeff();
  require(o.L_ > 0.0, "spectrum must contain a positive eigenvalue");
  o.sigma2_ = sigma2;
  o.noise_std_ = std::sqrt(sigma2 / static_cast<double>(spectrum.size()));
  o.x_star_ = x_star;
  o.f_star_ = 0.0;
  o.seed_ = master_seed;
  return o;
}

ProblemOracle make_finite_sum_least_squares(const Matrix& data_rows, const Vector& targets,
                                            bool interpolating, std::uint64_t master_seed,
                                            bool require_strong_convexity) {
  check_rows(data_rows);
  const auto m = data_rows.rows();
  const auto n = data_rows.cols();

  ProblemOracle o;
  o.kind_ = ProblemKind::least_squares;
  o.rows_ = data_rows;
  o.seed_ = master_seed;
  o.interpolating_ = interpolating;

  Vector planted;
  if (interpolating) {
    require(targets.size() == 0, "interpolating instances generate their own targets");
    CounterRng rng(master_seed, 0);
    planted = gaussian_vector(static_cast<std::size_t>(n), rng);
    o.targets_ = data_rows * planted;
  } else {
    require(targets.size() == m, "need one target per data row");
    require(targets.allFinite(), "targets must be finite");
    o.targets_ = targets;
  }

  const Matrix H = data_rows.transpose() * data_rows / static_cast<double>(m);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(H, Eigen::EigenvaluesOnly);
  const double lmax = eig.eigenvalues().maxCoeff();
  const double lmin = eig.eigenvalues().minCoeff();
  const bool singular = !(lmin > kSingularRelTol * lmax);
  o.mu_ = singular ? 0.0 : lmin;
  if (require_strong_convexity && singular) {
    throw InvalidArgument(
        "least-squares system is rank deficient: mu = 0, strong convexity unavailable");
  }

  if (interpolating && !singular) {
    o.x_star_ = planted;
  } else {
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(data_rows);
    cod.setThreshold(kSingularRelTol);
    o.x_star_ = cod.solve(o.targets_);
  }

  double max_row_sq = 0.0;
  double grad_sq_sum = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double row_sq = data_rows.row(i).squaredNorm();
    max_row_sq = std::max(max_row_sq, row_sq);
    const double res = data_rows.row(i).dot(o.x_star_) - o.targets_[i];
    grad_sq_sum += row_sq * res * res;
  }
  require(max_row_sq > 0.0, "all data rows are zero");
  o.L_ = 2.0 * max_row_sq;
  if (interpolating) {
    o.sigma2_ = 0.0;
    o.f_star_ = 0.0;
  } else {
    o.sigma2_ = 2.0 * grad_sq_sum / static_cast<double>(m);
    o.f_star_ = o.value(o.x_star_);
  }
  return o;
}

ProblemOracle make_logistic_regression(const Matrix& data_rows, const Vector& labels,
                                       double l2_penalty, std::uint64_t master_seed) {
  check_rows(data_rows);
  require(std::isfinite(l2_penalty) && l2_penalty > 0.0, "l2 penalty must be > 0");
  require(labels.size() == data_rows.rows(), "need one label per data row");
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    require(labels[i] == 1.0 || labels[i] == -1.0, "labels must be +1 or -1");
  }
  const auto m = data_rows.rows();

  ProblemOracle o;
  o.kind_ = ProblemKind::logistic;
  o.rows_ = data_rows;
  o.targets_ = labels;
  o.l2_ = l2_penalty;
  o.seed_ = master_seed;
  o.mu_ = l2_penalty;

  double max_row_sq = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    max_row_sq = std::max(max_row_sq, data_rows.row(i).squaredNorm());
  }
  o.L_ = 2.0 * (l2_penalty + max_row_sq / 4.0);

  // Full-gradient descent with step 1/L_f, L_f the smoothness of f itself.
  const Matrix H = data_rows.transpose() * data_rows / static_cast<double>(m);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(H, Eigen::EigenvaluesOnly);
  const double step = 1.0 / (l2_penalty + eig.eigenvalues().maxCoeff() / 4.0);
  Vector x = Vector::Zero(data_rows.cols());
  o.x_star_ = x;
  Vector g = o.gradient(x);
  std::size_t it = 0;
  for (; it < kLogisticMaxIters && g.norm() > kLogisticTargetGrad; ++it) {
    x -= step * g;
    g = o.gradient(x);
  }
  if (!(g.norm() <= kLogisticRequiredGrad)) {
    throw NumericFailure("logistic regression inner solve stalled at gradient norm " +
                         format_double(g.norm()) + " after " + std::to_string(it) +
                         " iterations");
  }
  o.x_star_ = x;
  o.f_star_ = o.value(x);

  double grad_sq_sum = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    grad_sq_sum += o.component_gradient(static_cast<std::size_t>(i), x).squaredNorm();
  }
  o.sigma2_ = 2.0 * grad_sq_sum / static_cast<double>(m);
  return o;
}

Matrix gaussian_design(std::size_t m, std::size_t n, std::uint64_t seed) {
  CounterRng rng(seed, 0);
  Matrix A(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) A(i, j) = scale * rng.normal();
  }
  return A;
}

Matrix orthogonal_design(std::size_t m, std::size_t n, std::uint64_t seed) {
  Matrix A(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  const auto nn = static_cast<Eigen::Index>(n);
  for (Eigen::Index start = 0, block = 0; start < A.rows(); start += nn, ++block) {
    const Matrix G = gaussian_design(n, n, derive_seed(seed, static_cast<std::uint64_t>(block)));
    Eigen::HouseholderQR<Matrix> qr(G);
    const Matrix Q = qr.householderQ() * Matrix::Identity(nn, nn);
    const Eigen::Index count = std::min(nn, A.rows() - start);
    A.middleRows(start, count) = Q.topRows(count);
  }
  return A;
}

Matrix low_rank_design(std::size_t m, std::size_t n, std::size_t rank, std::uint64_t seed) {
  require(rank >= 1 && rank <= std::min(m, n), "rank must lie in [1, min(m, n)]");
  const Matrix B = gaussian_design(m, rank, derive_seed(seed, 0));
  const Matrix C = gaussian_design(rank, n, derive_seed(seed, 1));
  return B * C;
}

Vector planted_targets(const Matrix& rows, double noise_std, std::uint64_t seed) {
  CounterRng rng(seed, 0);
  const Vector planted = gaussian_vector(static_cast<std::size_t>(rows.cols()), rng);
  Vector b = rows * planted;
  CounterRng noise(seed, 1);
  for (Eigen::Index i = 0; i < b.size(); ++i) b[i] += noise_std * noise.normal();
  return b;
}

Vector planted_labels(const Matrix& rows, std::uint64_t seed) {
  CounterRng rng(seed, 0);
  const Vector w = gaussian_vector(static_cast<std::size_t>(rows.cols()), rng);
  CounterRng noise(seed, 1);
  Vector y(rows.rows());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    y[i] = rows.row(i).dot(w) + 0.5 * noise.normal() >= 0.0 ? 1.0 : -1.0;
  }
  return y;
}

Vector point_at_distance(const ProblemOracle& oracle, double radius, std::uint64_t seed) {
  CounterRng rng(seed, 0);
  Vector dir = gaussian_vector(oracle.dim(), rng);
  dir /= dir.norm();
  return oracle.x_star() + radius * dir;
}

std::vector<NamedOracle> standard_instances(std::uint64_t seed) {
  std::vector<NamedOracle> out;
  auto child = [&](std::uint64_t k) { return derive_seed(seed, k); };

  const double gd_spectrum[] = {0.1, 0.325, 0.55, 0.775, 1.0};
  out.push_back({"quadratic_deterministic",
                 make_noisy_quadratic(gd_spectrum, Vector::Zero(5), 0.0, child(0))});
  const std::vector<double> ones(10, 1.0);
  out.push_back({"quadratic_noisy", make_noisy_quadratic(ones, Vector::Zero(10), 1.0, child(1))});
  const double flat_spectrum[] = {0.0, 0.5, 1.0};
  out.push_back({"quadratic_mu0",
                 make_noisy_quadratic(flat_spectrum, Vector::Zero(3), 0.5, child(2))});
  out.push_back({"least_squares_interpolating",
                 make_finite_sum_least_squares(orthogonal_design(50, 10, child(3)), Vector(),
                                               true, child(4))});
  const Matrix noisy = gaussian_design(50, 10, child(5));
  out.push_back({"least_squares_noisy",
                 make_finite_sum_least_squares(noisy, planted_targets(noisy, 0.5, child(6)),
                                               false, child(6))});
  const Matrix singular = low_rank_design(50, 10, 5, child(7));
  out.push_back({"least_squares_singular",
                 make_finite_sum_least_squares(singular, planted_targets(singular, 0.0, child(8)),
                                               false, child(8))});
  const Matrix features = gaussian_design(50, 10, child(9));
  out.push_back({"logistic", make_logistic_regression(features, planted_labels(features, child(10)),
                                                      0.1, child(10))});
  return out;
}

SmoothnessReport check_smoothness_assumption(const ProblemOracle& oracle, const Vector& x,
                                             std::size_t n_samples, CounterRng& rng) {
  require(n_samples >= 1000, "smoothness check needs at least 1000 samples");
  Vector g;
  double mean = 0.0, m2 = 0.0;
  for (std::size_t k = 0; k < n_samples; ++k) {
    oracle.stochastic_gradient(x, rng, g);
    const double v = g.squaredNorm();
    const double delta = v - mean;
    mean += delta / static_cast<double>(k + 1);
    m2 += delta * (v - mean);
  }
  const double sd = std::sqrt(m2 / static_cast<double>(n_samples - 1));

  SmoothnessReport r;
  r.lhs_estimate = mean;
  r.rhs = 2.0 * oracle.L() * (oracle.value(x) - oracle.f_star()) + oracle.sigma2();
  r.slack = r.rhs - r.lhs_estimate;
  r.ci_halfwidth = 3.0 * sd / std::sqrt(static_cast<double>(n_samples));
  // Rounding allowance; quadratics meet the bound with equality.
  const double rounding = 1e-12 * std::max(1.0, std::abs(r.rhs));
  r.violated = r.lhs_estimate - r.ci_halfwidth > r.rhs + rounding;
  return r;
}

double check_mu_convexity(const ProblemOracle& oracle, const Vector& x) {
  const Vector e = x - oracle.x_star();
  return oracle.gradient(x).dot(e) - 0.5 * oracle.mu() * e.squaredNorm() -
         (oracle.value(x) - oracle.f_star());
}

void write_dataset_csv(const ProblemOracle& oracle, std::ostream& out) {
  if (oracle.kind() == ProblemKind::noisy_quadratic) {
    throw InvalidArgument("quadratic instances have no dataset to dump");
  }
  CsvWriter csv(out);
  for (std::size_t j = 0; j < oracle.dim(); ++j) csv.field("x" + std::to_string(j));
  csv.field("target");
  csv.end_row();
  const Matrix& A = oracle.rows();
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) csv.field(A(i, j));
    csv.field(oracle.targets()[i]);
    csv.end_row();
  }
}

}  // namespace sgdbound
