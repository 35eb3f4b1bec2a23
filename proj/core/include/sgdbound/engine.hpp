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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sgdbound/oracles.hpp"
#include "sgdbound/schedules.hpp"

namespace sgdbound {

struct RunConfig {
  std::size_t horizon = 0;
  StepWeightSchedule schedule;
  std::uint64_t replicate_seed = 0;
  bool record_trajectory = false;
  bool descent_check = false;
};

struct RunResult {
  double f_gap_avg = 0.0;     // f(x_avg) - f*
  double dist_sq_last = 0.0;  // ||x_{T+1} - x*||^2
  double composite = 0.0;     // f_gap_avg + mu * dist_sq_last
  Vector x_avg;
  Vector x_last;
  /// Per-step descent margins when descent_check is set.
  std::vector<double> descent_margins;
  /// x_0..x_{T+1} when record_trajectory is set.
  std::vector<Vector> trajectory;
  double wall_time_seconds = 0.0;
};

/// Runs x_{t+1} = x_t - gamma_t g_t for t = 0..T and maintains the weighted
/// average of x_0..x_T online. Iterates with zero weight still advance the
/// state. Throws InvalidArgument when some gamma_t exceeds 1/(2L) or the
/// schedule horizon differs from cfg.horizon.
RunResult run_sgd(const ProblemOracle& oracle, const Vector& x0, const RunConfig& cfg);

/// (1 - mu gamma)||x_t - x*||^2 - gamma (f(x_t) - f*) + gamma^2 sigma2
///   - ||x_next - x*||^2.
/// The per-step inequality only holds pathwise for deterministic oracles;
/// any other oracle throws InvalidArgument.
double descent_step_margin(const ProblemOracle& oracle, const Vector& x_t,
                           const Vector& x_next, double gamma);

/// Relative floor for descent margins: margin >= -kDescentTolerance *
/// max(1, ||x_t - x*||^2).
inline constexpr double kDescentTolerance = 1e-10;

struct BoundReport {
  double branch_exp = 0.0;  // 64 L R^2 exp(-mu T / 4L) + 36 sigma2 / (mu T)
  double branch_sub = 0.0;  // 2 L R^2 / T + 2 sigma R / sqrt(T)
  double theorem_min = 0.0;
  /// (1 - mu gamma)^T R^2 + gamma sigma2 / mu at the given constant gamma.
  double distance_bound = 0.0;
  double distance_contraction_term = 0.0;
  double distance_tail_term = 0.0;
  double distance_gamma = 0.0;
  /// mu R^2 exp(-mu T / L) + sigma2 / (mu T); informational only, its
  /// large-T precondition is asymptotic.
  double large_horizon_bound = 0.0;
};

/// Bounds for horizon T >= 1. mu = 0 reports +inf for every mu-divided
/// quantity, so theorem_min is the sublinear branch. `distance_gamma` defaults to
/// the classic constant stepsize (1/(2L) when mu = 0).
BoundReport theorem_bound(double mu, double L, double R, double sigma2, std::size_t T,
                          std::optional<double> distance_gamma = std::nullopt);

struct ReplicateSummary {
  std::uint64_t seed = 0;
  double f_gap_avg = 0.0;
  double dist_sq_last = 0.0;
  double composite = 0.0;
};

struct CampaignSummary {
  std::vector<ReplicateSummary> replicates;
  double mean_composite = 0.0;
  double std_composite = 0.0;
  double stderr_composite = 0.0;
  double ci99_composite = 0.0;  // 99% normal half-width
  double mean_f_gap = 0.0;
  double stderr_f_gap = 0.0;
  double mean_dist_sq = 0.0;
  double stderr_dist_sq = 0.0;
  BoundReport bounds;
  double ratio = 0.0;  // (mean_composite + ci99) / theorem_min
};

/// Replicate r uses seed derive_seed(master_seed, r). Results are gathered by
/// replicate index and reduced in a fixed order, so they are bit-identical
/// for any worker count.
CampaignSummary run_campaign(const ProblemOracle& oracle, const Vector& x0,
                             const RunConfig& cfg, std::size_t n_replicates,
                             std::uint64_t master_seed, std::size_t workers = 1);

/// mean <= bound + 3 * stderr.
inline bool within_bound(double mean, double stderr_, double bound) {
  return mean <= bound + 3.0 * stderr_;
}

}  // namespace sgdbound
