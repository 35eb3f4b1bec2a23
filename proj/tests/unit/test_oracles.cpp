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

#include "doctest.h"

#include <cmath>
#include <set>
#include <sstream>

#include "sgdbound/error.hpp"
#include "sgdbound/oracles.hpp"

using namespace sgdbound;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

Vector random_point(const ProblemOracle& o, CounterRng& rng, double scale) {
  Vector x(o.x_star().size());
  for (auto& v : x) v = scale * rng.normal();
  return o.x_star() + x;
}

// Central finite differences of f.
Vector numeric_gradient(const ProblemOracle& o, const Vector& x) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(x(i)));
    Vector p = x, m = x;
    p(i) += h;
    m(i) -= h;
    g(i) = (o.value(p) - o.value(m)) / (2 * h);
  }
  return g;
}

}  // namespace

TEST_CASE("noisy quadratic examples") {
  const std::vector<double> one{1.0};
  SUBCASE("1-D identity") {
    const auto o = make_noisy_quadratic(one, Vector::Zero(1), 0.0, 1);
    CounterRng rng(1);
    const auto s = o.sample_gradient(vec({1.0}), rng);
    CHECK(s.g(0) == 1.0);
    CHECK(s.fx - o.f_star() == 0.5);
    CHECK(o.deterministic());
  }
  SUBCASE("constants from the spectrum") {
    const std::vector<double> spec{0.1, 1.0};
    const auto o = make_noisy_quadratic(spec, Vector::Zero(2), 0.0, 1);
    CHECK(o.mu() == 0.1);
    CHECK(o.L() == 1.0);
    CHECK(o.L() / o.mu() == doctest::Approx(10.0));
  }
  SUBCASE("noise second moment") {
    const auto o = make_noisy_quadratic(one, Vector::Zero(1), 4.0, 3);
    CounterRng rng(5);
    Vector g;
    long double sum = 0;
    const std::size_t N = 1'000'000;
    for (std::size_t k = 0; k < N; ++k) {
      o.stochastic_gradient(Vector::Zero(1), rng, g);
      sum += g.squaredNorm();
    }
    CHECK(std::fabs(static_cast<double>(sum / N) - 4.0) <= 3.0 * std::sqrt(2.0 * 16.0 / N));
  }
  SUBCASE("errors") {
    const std::vector<double> bad{-0.1, 1.0};
    CHECK_THROWS_AS(make_noisy_quadratic(bad, Vector::Zero(2), 0.0, 1), InvalidArgument);
    CHECK_THROWS_AS(make_noisy_quadratic(one, Vector::Zero(1), -1.0, 1), InvalidArgument);
  }
}

TEST_CASE("least squares examples") {
  SUBCASE("hand-solved m = 2") {
    Matrix A(2, 1);
    A << 1, 1;
    const auto o = make_finite_sum_least_squares(A, vec({1.0, -1.0}), false, 1);
    CHECK(std::abs(o.x_star()(0)) <= 1e-15);
    CHECK(o.f_star() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(o.sigma2() == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(o.L() == 2.0);
    CHECK(o.mu() == 1.0);
  }
  SUBCASE("interpolation reports sigma2 exactly 0") {
    const auto o = make_finite_sum_least_squares(orthogonal_design(50, 10, 3), Vector(), true, 4);
    CHECK(o.sigma2() == 0.0);
    CHECK(o.f_star() == 0.0);
    CHECK(o.interpolating());
    CHECK(o.mu() == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(o.L() == doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("x* agrees with an independent normal-equation solve") {
    const Matrix A = gaussian_design(40, 6, 8);
    const Vector b = planted_targets(A, 0.3, 9);
    const auto o = make_finite_sum_least_squares(A, b, false, 1);
    const Vector ref = (A.transpose() * A).ldlt().solve(A.transpose() * b);
    CHECK((o.x_star() - ref).norm() <= 1e-10 * std::max(1.0, ref.norm()));
    CHECK(o.value(o.x_star()) == doctest::Approx(o.f_star()).epsilon(1e-12));
  }
  SUBCASE("rank deficiency") {
    const Matrix A = low_rank_design(30, 8, 3, 2);
    const Vector b = planted_targets(A, 0.5, 3);
    const auto o = make_finite_sum_least_squares(A, b, false, 1);
    CHECK(o.mu() == 0.0);
    CHECK(o.gradient(o.x_star()).norm() <= 1e-8);
    CHECK_THROWS_AS(make_finite_sum_least_squares(A, b, false, 1, true), InvalidArgument);
  }
  SUBCASE("errors") {
    Matrix A(2, 1);
    A << 1, 1;
    CHECK_THROWS_AS(make_finite_sum_least_squares(A, vec({1.0}), false, 1), InvalidArgument);
    CHECK_THROWS_AS(make_finite_sum_least_squares(A, vec({1.0, 2.0}), true, 1),
                    InvalidArgument);
    CHECK_THROWS_AS(make_finite_sum_least_squares(Matrix(0, 3), Vector(), false, 1),
                    InvalidArgument);
  }
}

TEST_CASE("logistic regression examples") {
  SUBCASE("single zero sample") {
    const auto o = make_logistic_regression(Matrix::Zero(1, 3), vec({1.0}), 0.5, 1);
    CHECK(o.x_star().norm() == 0.0);
    CHECK(o.f_star() == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  }
  SUBCASE("inner solve reaches a stationary point") {
    const Matrix A = gaussian_design(60, 8, 21);
    const auto o = make_logistic_regression(A, planted_labels(A, 22), 0.05, 1);
    // Independent gradient evaluation.
    Vector g = 0.05 * o.x_star();
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
      const double y = o.targets()(i);
      const double z = y * A.row(i).dot(o.x_star());
      g -= (y / (1.0 + std::exp(z)) / A.rows()) * A.row(i).transpose();
    }
    CHECK(g.norm() <= 1e-8);
    CHECK(o.mu() == 0.05);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(make_logistic_regression(Matrix::Zero(1, 3), vec({1.0}), 0.0, 1),
                    InvalidArgument);
    CHECK_THROWS_AS(make_logistic_regression(Matrix::Zero(1, 3), vec({0.5}), 0.1, 1),
                    InvalidArgument);
  }
}

TEST_CASE("standard instances satisfy their own invariants") {
  const auto instances = standard_instances(99);
  CHECK(instances.size() == 7);
  CounterRng rng(3);
  for (const auto& [name, o] : instances) {
    INFO(name);
    CHECK(o.mu() <= o.L());
    CHECK(std::abs(o.value(o.x_star()) - o.f_star()) <= 1e-10);
    CHECK(o.gradient(o.x_star()).norm() <= 1e-8);
    const Vector x = random_point(o, rng, 1.0);
    CHECK((o.gradient(x) - numeric_gradient(o, x)).norm() <= 1e-6 * (1 + o.gradient(x).norm()));
  }
}

TEST_CASE("smoothness check examples") {
  const std::vector<double> one{1.0};
  const auto o = make_noisy_quadratic(one, Vector::Zero(1), 0.0, 1);
  CounterRng rng(1);
  const auto at_opt = check_smoothness_assumption(o, Vector::Zero(1), 1000, rng);
  CHECK(at_opt.lhs_estimate == 0.0);
  CHECK(at_opt.rhs == 0.0);
  CHECK_FALSE(at_opt.violated);

  const auto tight = check_smoothness_assumption(o, vec({2.0}), 1000, rng);
  CHECK(tight.lhs_estimate == 4.0);
  CHECK(tight.rhs == 4.0);
  CHECK_FALSE(tight.violated);

  CHECK_THROWS_AS(check_smoothness_assumption(o, vec({2.0}), 999, rng), InvalidArgument);
}

TEST_CASE("property: the smoothness assumption is never flagged on the standard grid") {
  CounterRng rng(17);
  for (const auto& [name, o] : standard_instances(5)) {
    for (int k = 0; k < 20; ++k) {
      const Vector x = random_point(o, rng, k < 10 ? 0.3 : 3.0);
      const auto r = check_smoothness_assumption(o, x, 2000, rng);
      INFO(name, " point ", k, " lhs=", r.lhs_estimate, " rhs=", r.rhs);
      REQUIRE_FALSE(r.violated);
    }
  }
}

TEST_CASE("property: mu-convexity margins are non-negative") {
  CHECK(check_mu_convexity(standard_instances(1)[0].oracle, standard_instances(1)[0].oracle.x_star()) ==
        0.0);
  CounterRng rng(23);
  for (const auto& [name, o] : standard_instances(8)) {
    for (int k = 0; k < 100; ++k) {
      const Vector x = random_point(o, rng, 2.0);
      INFO(name);
      REQUIRE(check_mu_convexity(o, x) >= -1e-10);
    }
  }
}

TEST_CASE("property: stochastic gradients are unbiased") {
  CounterRng pts(31);
  const std::size_t N = 100'000;
  for (const auto& [name, o] : standard_instances(12)) {
    for (int k = 0; k < 5; ++k) {
      const Vector x = random_point(o, pts, 1.0);
      const Vector full = o.gradient(x);
      CounterRng rng(derive_seed(77, static_cast<std::uint64_t>(k)));
      const auto n = x.size();
      Vector mean = Vector::Zero(n), m2 = Vector::Zero(n), g;
      for (std::size_t s = 0; s < N; ++s) {
        o.stochastic_gradient(x, rng, g);
        const Vector delta = g - mean;
        mean += delta / static_cast<double>(s + 1);
        m2 += delta.cwiseProduct(g - mean);
      }
      for (Eigen::Index i = 0; i < n; ++i) {
        const double sd = std::sqrt(m2(i) / (N - 1));
        INFO(name, " coordinate ", i);
        REQUIRE(std::abs(mean(i) - full(i)) <= 4.0 * sd / std::sqrt(double(N)) + 1e-12);
      }
    }
  }
}

TEST_CASE("finite-sum samples are component gradients") {
  const Matrix A = gaussian_design(5, 3, 4);
  const auto o = make_finite_sum_least_squares(A, planted_targets(A, 1.0, 5), false, 6);
  const Vector x = vec({0.3, -1.2, 2.0});
  CounterRng rng(8);
  std::set<std::size_t> hit;
  for (int k = 0; k < 200; ++k) {
    const Vector g = o.sample_gradient(x, rng).g;
    bool found = false;
    for (std::size_t i = 0; i < o.components(); ++i) {
      if (g == o.component_gradient(i, x)) {
        hit.insert(i);
        found = true;
      }
    }
    REQUIRE(found);
  }
  CHECK(hit.size() == o.components());
}

TEST_CASE("gradient streams are reproducible") {
  for (const auto& [name, o] : standard_instances(4)) {
    CounterRng a(10), b(10);
    const Vector x = o.x_star() + Vector::Ones(o.x_star().size());
    for (int k = 0; k < 50; ++k) {
      INFO(name);
      REQUIRE(o.sample_gradient(x, a).g == o.sample_gradient(x, b).g);
    }
  }
  // Same construction seed, same instance.
  const auto x = standard_instances(4);
  const auto y = standard_instances(4);
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(x[i].oracle.x_star() == y[i].oracle.x_star());
    CHECK(x[i].oracle.sigma2() == y[i].oracle.sigma2());
  }
}

TEST_CASE("dataset CSV") {
  Matrix A(2, 1);
  A << 1, 1;
  const auto o = make_finite_sum_least_squares(A, vec({1.0, -1.0}), false, 1);
  std::ostringstream out;
  write_dataset_csv(o, out);
  CHECK(out.str() == "x0,target\n1,1\n1,-1\n");
  const std::vector<double> one{1.0};
  std::ostringstream q;
  CHECK_THROWS_AS(write_dataset_csv(make_noisy_quadratic(one, Vector::Zero(1), 0, 1), q),
                  InvalidArgument);
}
