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

#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sgdbound/rng.hpp"

namespace sgdbound {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class ProblemKind { noisy_quadratic, least_squares, logistic };

std::string_view to_string(ProblemKind kind);
std::optional<ProblemKind> parse_problem_kind(std::string_view name);

struct GradientSample {
  Vector g;
  double fx = 0.0;  // exact f at the query point
};

/// A problem instance f with an unbiased stochastic gradient oracle and the
/// constants it certifies:
///
///   E||g||^2 <= 2 L (f(x) - f*) + sigma2,
///   (mu/2)||x - x*||^2 + f(x) - f* <= <grad f(x), x - x*>.
///
/// Immutable after construction. Sampling is thread-safe as long as each
/// caller owns its CounterRng.
class ProblemOracle {
 public:
  ProblemKind kind() const { return kind_; }
  std::size_t dim() const { return static_cast<std::size_t>(x_star_.size()); }
  double mu() const { return mu_; }
  double L() const { return L_; }
  double sigma2() const { return sigma2_; }
  const Vector& x_star() const { return x_star_; }
  double f_star() const { return f_star_; }
  std::uint64_t seed() const { return seed_; }
  /// Every gradient sample equals the full gradient.
  bool deterministic() const { return kind_ == ProblemKind::noisy_quadratic && sigma2_ == 0.0; }
  /// Finite sum whose component gradients all vanish at x*.
  bool interpolating() const { return interpolating_; }

  /// Number of summands (0 for quadratics).
  std::size_t components() const { return static_cast<std::size_t>(rows_.rows()); }
  const Matrix& rows() const { return rows_; }
  /// Regression targets or classification labels.
  const Vector& targets() const { return targets_; }
  /// Eigenvalues of the diagonal quadratic (empty otherwise).
  const Vector& spectrum() const { return spectrum_; }

  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;
  /// Gradient of summand i (finite sums only).
  Vector component_gradient(std::size_t i, const Vector& x) const;

  /// Writes one stochastic gradient into `g` (resized as needed).
  void stochastic_gradient(const Vector& x, CounterRng& rng, Vector& g) const;
  GradientSample sample_gradient(const Vector& x, CounterRng& rng) const;

 private:
  friend ProblemOracle make_noisy_quadratic(std::span<const double>, const Vector&, double,
                                            std::uint64_t);
  friend ProblemOracle make_finite_sum_least_squares(const Matrix&, const Vector&, bool,
                                                     std::uint64_t, bool);
  friend ProblemOracle make_logistic_regression(const Matrix&, const Vector&, double,
                                                std::uint64_t);
  ProblemOracle() = default;

  ProblemKind kind_ = ProblemKind::noisy_quadratic;
  double mu_ = 0.0;
  double L_ = 0.0;
  double sigma2_ = 0.0;
  Vector x_star_;
  double f_star_ = 0.0;
  std::uint64_t seed_ = 0;
  bool interpolating_ = false;

  Vector spectrum_;
  double noise_std_ = 0.0;  // per coordinate
  Matrix rows_;
  Vector targets_;
  double l2_ = 0.0;
};

/// f(x) = 1/2 sum_i lambda_i (x_i - x*_i)^2 with gradient noise
/// N(0, sigma2/n I), so E||xi||^2 = sigma2. mu = min lambda, L = max lambda.
ProblemOracle make_noisy_quadratic(std::span<const double> spectrum, const Vector& x_star,
                                   double sigma2, std::uint64_t master_seed);

/// f(x) = (1/m) sum_i 1/2 (a_i^T x - b_i)^2, one uniformly sampled summand per
/// query. L = 2 max ||a_i||^2, sigma2 = (2/m) sum ||grad f_i(x*)||^2,
/// mu = lambda_min(A^T A / m) (0 when numerically singular), x* the
/// minimum-norm minimizer.
///
/// With `interpolating`, `targets` must be empty and is replaced by A x_p for
/// a planted x_p ~ N(0, I) drawn from `master_seed`; sigma2 is then exactly 0.
/// `require_strong_convexity` turns mu = 0 into an error.
ProblemOracle make_finite_sum_least_squares(const Matrix& data_rows, const Vector& targets,
                                            bool interpolating, std::uint64_t master_seed,
                                            bool require_strong_convexity = false);

/// f_i(x) = log(1 + exp(-y_i a_i^T x)) + (lambda/2)||x||^2, labels in {-1, +1}.
/// mu = lambda, L = 2 max_i (lambda + ||a_i||^2 / 4). x* is found by full
/// gradient descent to ||grad f|| <= 1e-10; failure throws NumericFailure.
ProblemOracle make_logistic_regression(const Matrix& data_rows, const Vector& labels,
                                       double l2_penalty, std::uint64_t master_seed);

// Synthetic data ------------------------------------------------------------

/// m x n rows with i.i.d. N(0, 1/n) entries.
Matrix gaussian_design(std::size_t m, std::size_t n, std::uint64_t seed);
/// Unit-norm rows taken from stacked random orthogonal n x n blocks; when n
/// divides m, A^T A / m = I / n exactly (up to rounding).
Matrix orthogonal_design(std::size_t m, std::size_t n, std::uint64_t seed);
/// Rank-`rank` rows B C with Gaussian factors.
Matrix low_rank_design(std::size_t m, std::size_t n, std::size_t rank, std::uint64_t seed);
/// b = A x_p + noise_std * N(0, 1) with planted x_p ~ N(0, I).
Vector planted_targets(const Matrix& rows, double noise_std, std::uint64_t seed);
/// Labels sign(a_i^T w + 0.5 N(0,1)) for a planted w ~ N(0, I).
Vector planted_labels(const Matrix& rows, std::uint64_t seed);

/// A point at distance `radius` from x* in a seeded random direction.
Vector point_at_distance(const ProblemOracle& oracle, double radius, std::uint64_t seed);

struct NamedOracle {
  std::string name;
  ProblemOracle oracle;
};

/// The reference grid of instances every assumption check runs over:
/// deterministic and noisy quadratics (including a mu = 0 spectrum),
/// interpolating, noisy and rank-deficient least squares, and logistic
/// regression.
std::vector<NamedOracle> standard_instances(std::uint64_t seed);

// Assumption validators -----------------------------------------------------

struct SmoothnessReport {
  double lhs_estimate = 0.0;  // Monte-Carlo mean of ||g||^2
  double rhs = 0.0;           // 2 L (f(x) - f*) + sigma2
  double slack = 0.0;         // rhs - lhs_estimate
  double ci_halfwidth = 0.0;  // 3 standard errors
  bool violated = false;      // lhs_estimate - ci_halfwidth > rhs
};

/// Needs n_samples >= 1000.
SmoothnessReport check_smoothness_assumption(const ProblemOracle& oracle, const Vector& x,
                                             std::size_t n_samples, CounterRng& rng);

/// <grad f(x), x - x*> - (mu/2)||x - x*||^2 - (f(x) - f*).
double check_mu_convexity(const ProblemOracle& oracle, const Vector& x);

/// One row per summand: x0..x{n-1}, target. Quadratics have no dataset.
void write_dataset_csv(const ProblemOracle& oracle, std::ostream& out);

}  // namespace sgdbound
