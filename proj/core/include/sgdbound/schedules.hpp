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
#include <optional>
#include <ostream>
#include <string_view>
#include <vector>

namespace sgdbound {

enum class ScheduleFamily {
  constant_log,      // log-tuned constant stepsize, exponential weights
  two_phase,         // constant then 2/(a(kappa + t - t0)), suffix weights
  sublinear,         // tuned constant stepsize, uniform weights (a = 0 case)
  user_constant,     // caller-chosen constant stepsize, exponential weights
  classic_constant,  // log-tuned 1/(2L)-capped stepsize, last iterate only
  decreasing,        // 2/(a(kappa + t)) from t = 0, polynomial weights
};

std::string_view to_string(ScheduleFamily family);
std::optional<ScheduleFamily> parse_schedule_family(std::string_view name);

/// Weight families for the pure decreasing-stepsize schedule: (kappa + t)
/// or (kappa + t)^2.
enum class DecreasingWeights { linear, quadratic };

/// Stepsizes gamma_0..gamma_T and averaging weights w_0..w_T for a finite
/// horizon T.
///
/// Every schedule is defined by a closed-form rule; arrays are materialized
/// at construction when the horizon is at most kMaterializeLimit and
/// evaluated on demand beyond that. Weights are also available as
/// logarithms, which is what averaging code should consume: exponential
/// weights overflow a double long before T = 10^4.
class StepWeightSchedule {
 public:
  static constexpr std::size_t kMaterializeLimit = 10'000'000;

  enum class WeightShape { exponential, uniform, last_iterate, polynomial };

  /// Closed-form description. Stepsizes are `head_gamma` for
  /// t < tail_start and min(cap, 2 / (tail_a * (tail_kappa + t - tail_start)))
  /// afterwards. Weights follow `shape`:
  ///   exponential  w_t = growth^(t + 1), log w_t = (t + 1) * log_ratio
  ///   uniform      w_t = 1
  ///   last_iterate w_T = 1, zero elsewhere
  ///   polynomial   w_t = (kappa + t - weight_start)^power for
  ///                t >= weight_start, zero before
  struct Rule {
    double head_gamma = 0.0;
    std::size_t tail_start = 0;
    double tail_a = 0.0;
    double tail_kappa = 0.0;
    double cap = 0.0;
    WeightShape shape = WeightShape::uniform;
    double growth = 1.0;
    double log_ratio = 0.0;
    double weight_kappa = 0.0;
    double weight_power = 1.0;
    std::size_t weight_start = 0;
  };

  /// Validates the rule against the horizon: every gamma in (0, cap], at
  /// least one positive weight.
  StepWeightSchedule(ScheduleFamily family, std::size_t horizon, Rule rule,
                     bool degenerate = false);

  ScheduleFamily family() const { return family_; }
  std::size_t horizon() const { return horizon_; }
  std::size_t size() const { return horizon_ + 1; }
  /// Upper bound 1/d every stepsize respects.
  double cap() const { return rule_.cap; }
  /// Set when a parameter corner forced a fallback choice (r0 = 0 with
  /// c > 0 in the sublinear schedule, a*gamma = 1 for exponential weights).
  bool degenerate() const { return degenerate_; }
  bool materialized() const { return !gammas_.empty(); }
  const Rule& rule() const { return rule_; }

  double gamma(std::size_t t) const;
  double weight(std::size_t t) const;
  double log_weight(std::size_t t) const;
  /// First index with positive weight.
  std::size_t first_weighted() const;

  std::vector<double> gammas() const;
  std::vector<double> weights() const;
  std::vector<double> log_weights() const;

 private:
  double rule_gamma(std::size_t t) const;
  double rule_log_weight(std::size_t t) const;

  ScheduleFamily family_;
  std::size_t horizon_;
  Rule rule_;
  bool degenerate_;
  std::vector<double> gammas_;
  std::vector<double> log_weights_;
};

/// Log-tuned candidate ln(max{2, a^2 r0 T^2 / c}) / (a T); +inf when c = 0.
double log_tuned_gamma(double a, double c, double r0, std::size_t T);

/// gamma = min{1/d, log_tuned_gamma(a, c, r0, T)}, weights (1 - a gamma)^-(t+1).
/// When a*gamma = 1 the weights collapse onto the last iterate.
StepWeightSchedule constant_log_stepsize(double a, double d, double c, double r0,
                                         std::size_t T);

/// Constant 1/d then decreasing stepsizes with quadratic suffix weights from
/// t0 = ceil(T/2) when T > d/a; plain 1/d with exponential weights otherwise.
StepWeightSchedule two_phase_schedule(double a, double d, std::size_t T);

/// gamma = 1/d if 1/d^2 <= r0/(c(T+1)), else sqrt(r0/(c(T+1))); uniform
/// weights. r0 = 0 with c > 0 yields 1/d flagged degenerate.
StepWeightSchedule sublinear_stepsize(double d, double c, double r0, std::size_t T);

/// gamma = min{1/(2L), ln(max{2, mu^2 R^2 T / sigma^2}) / (mu T)}, weight on
/// the last iterate only.
StepWeightSchedule classic_constant_stepsize(double mu, double L, double R2,
                                             double sigma2, std::size_t T);

/// Caller-chosen constant stepsize with weights (1 - a gamma)^-(t+1)
/// (uniform when a = 0).
StepWeightSchedule user_constant_schedule(double gamma, double a, double d,
                                          std::size_t T);

/// gamma_t = 2/(a(kappa + t)), kappa = 2d/a, from t = 0.
StepWeightSchedule decreasing_schedule(double a, double d, std::size_t T,
                                       DecreasingWeights weights);

/// Columns: t, gamma, weight.
void write_schedule_csv(const StepWeightSchedule& schedule, std::ostream& out);

}  // namespace sgdbound
