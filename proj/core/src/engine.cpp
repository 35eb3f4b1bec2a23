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

#include "sgdbound/engine.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "sgdbound/csv.hpp"
#include "sgdbound/error.hpp"
#include "sgdbound/online_weights.hpp"
#include "sgdbound/parallel.hpp"
#include "sgdbound/stats.hpp"

namespace sgdbound {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

RunResult run_sgd(const ProblemOracle& oracle, const Vector& x0, const RunConfig& cfg) {
  const auto& schedule = cfg.schedule;
  if (schedule.horizon() != cfg.horizon) {
    throw InvalidArgument("schedule horizon " + std::to_string(schedule.horizon()) +
                          " differs from run horizon " + std::to_string(cfg.horizon));
  }
  if (static_cast<std::size_t>(x0.size()) != oracle.dim()) {
    throw InvalidArgument("x0 has dimension " + std::to_string(x0.size()) +
                          ", oracle expects " + std::to_string(oracle.dim()));
  }
  if (cfg.descent_check && !oracle.deterministic()) {
    throw InvalidArgument(
        "descent check needs a deterministic oracle; the inequality holds only in "
        "expectation for stochastic gradients");
  }
  const double cap = 1.0 / (2.0 * oracle.L());
  if (schedule.cap() > cap) {
    for (std::size_t t = 0; t <= cfg.horizon; ++t) {
      if (schedule.gamma(t) > cap) {
        throw InvalidArgument("stepsize gamma_" + std::to_string(t) + " = " +
                              format_double(schedule.gamma(t)) + " exceeds 1/(2L) = " +
                              format_double(cap));
      }
    }
  }

  const auto started = std::chrono::steady_clock::now();
  RunResult out;
  CounterRng rng(cfg.replicate_seed, 0);
  Vector x = x0;
  Vector next(x0.size());
  Vector g(x0.size());
  Vector avg = Vector::Zero(x0.size());
  OnlineWeights norm;
  if (cfg.record_trajectory) out.trajectory.reserve(cfg.horizon + 2);
  if (cfg.descent_check) out.descent_margins.reserve(cfg.horizon + 1);

  for (std::size_t t = 0; t <= cfg.horizon; ++t) {
    const double rho = norm.push(schedule.log_weight(t));
    if (rho > 0.0) avg += rho * (x - avg);
    if (cfg.record_trajectory) out.trajectory.push_back(x);

    const double gamma = schedule.gamma(t);
    oracle.stochastic_gradient(x, rng, g);
    next = x - gamma * g;
    if (cfg.descent_check) {
      out.descent_margins.push_back(descent_step_margin(oracle, x, next, gamma));
    }
    x.swap(next);
  }
  if (cfg.record_trajectory) out.trajectory.push_back(x);

  out.x_avg = std::move(avg);
  out.x_last = std::move(x);
  out.f_gap_avg = oracle.value(out.x_avg) - oracle.f_star();
  out.dist_sq_last = (out.x_last - oracle.x_star()).squaredNorm();
  out.composite = out.f_gap_avg + oracle.mu() * out.dist_sq_last;
  out.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  if (!std::isfinite(out.composite)) {
    throw NumericFailure("SGD run produced a non-finite composite metric");
  }
  return out;
}

double descent_step_margin(const ProblemOracle& oracle, const Vector& x_t,
                           const Vector& x_next, double gamma) {
  if (!oracle.deterministic()) {
    throw InvalidArgument("descent margins are pathwise only for deterministic oracles");
  }
  const double dist_t = (x_t - oracle.x_star()).squaredNorm();
  const double dist_next = (x_next - oracle.x_star()).squaredNorm();
  return (1.0 - oracle.mu() * gamma) * dist_t -
         gamma * (oracle.value(x_t) - oracle.f_star()) + gamma * gamma * oracle.sigma2() -
         dist_next;
}

BoundReport theorem_bound(double mu, double L, double R, double sigma2, std::size_t T,
                          std::optional<double> distance_gamma) {
  if (T == 0) throw InvalidArgument("theorem bound needs T >= 1");
  if (!(mu >= 0.0) || !(L > 0.0) || !(R >= 0.0) || !(sigma2 >= 0.0)) {
    throw InvalidArgument("theorem bound needs mu >= 0, L > 0, R >= 0, sigma2 >= 0");
  }
  const double Td = static_cast<double>(T);
  const double R2 = R * R;
  const double sigma = std::sqrt(sigma2);

  BoundReport b;
  b.branch_sub = 2.0 * L * R2 / Td + 2.0 * sigma * R / std::sqrt(Td);
  if (mu > 0.0) {
    b.branch_exp = 64.0 * L * R2 * std::exp(-mu * Td / (4.0 * L)) + 36.0 * sigma2 / (mu * Td);
    b.large_horizon_bound = mu * R2 * std::exp(-mu * Td / L) + sigma2 / (mu * Td);
  } else {
    b.branch_exp = kInf;
    b.large_horizon_bound = kInf;
  }
  b.theorem_min = std::min(b.branch_exp, b.branch_sub);

  double gamma = 1.0 / (2.0 * L);
  if (distance_gamma) {
    gamma = *distance_gamma;
  } else if (mu > 0.0 && mu <= L) {
    gamma = classic_constant_stepsize(mu, L, R2, sigma2, T).gamma(0);
  }
  b.distance_gamma = gamma;
  b.distance_contraction_term = std::pow(1.0 - mu * gamma, Td) * R2;
  if (sigma2 == 0.0) {
    b.distance_tail_term = 0.0;
  } else {
    b.distance_tail_term = mu > 0.0 ? gamma * sigma2 / mu : kInf;
  }
  b.distance_bound = b.distance_contraction_term + b.distance_tail_term;
  return b;
}

CampaignSummary run_campaign(const ProblemOracle& oracle, const Vector& x0,
                             const RunConfig& cfg, std::size_t n_replicates,
                             std::uint64_t master_seed, std::size_t workers) {
  if (n_replicates == 0) throw InvalidArgument("replicates must be >= 1");

  CampaignSummary out;
  out.replicates.resize(n_replicates);
  parallel_for(n_replicates, workers, [&](std::size_t r) {
    RunConfig local = cfg;
    local.replicate_seed = derive_seed(master_seed, static_cast<std::uint64_t>(r));
    const RunResult res = run_sgd(oracle, x0, local);
    out.replicates[r] = {local.replicate_seed, res.f_gap_avg, res.dist_sq_last, res.composite};
  });

  std::vector<double> composite(n_replicates), f_gap(n_replicates), dist(n_replicates);
  for (std::size_t r = 0; r < n_replicates; ++r) {
    composite[r] = out.replicates[r].composite;
    f_gap[r] = out.replicates[r].f_gap_avg;
    dist[r] = out.replicates[r].dist_sq_last;
  }
  const auto mc = sample_moments(composite);
  const auto mf = sample_moments(f_gap);
  const auto md = sample_moments(dist);
  out.mean_composite = mc.mean;
  out.std_composite = mc.std;
  out.stderr_composite = mc.stderr_;
  out.ci99_composite = kZ99 * mc.stderr_;
  out.mean_f_gap = mf.mean;
  out.stderr_f_gap = mf.stderr_;
  out.mean_dist_sq = md.mean;
  out.stderr_dist_sq = md.stderr_;

  const double R = (x0 - oracle.x_star()).norm();
  out.bounds = theorem_bound(oracle.mu(), oracle.L(), R, oracle.sigma2(), cfg.horizon);
  const double upper = out.mean_composite + out.ci99_composite;
  if (out.bounds.theorem_min > 0.0) {
    out.ratio = upper / out.bounds.theorem_min;
  } else {
    out.ratio = upper > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  return out;
}

}  // namespace sgdbound
