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

#include "sgdbound/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "sgdbound/csv.hpp"
#include "sgdbound/error.hpp"

namespace sgdbound {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& what, double value) {
  if (!ok) {
    throw InvalidArgument(what + " (got " + format_double(value) + ")");
  }
}

void require_finite_nonneg(double v, const char* name) {
  require(std::isfinite(v) && v >= 0.0, std::string(name) + " must be finite and >= 0", v);
}

void require_cap(double a, double d) {
  require(std::isfinite(d) && d > 0.0, "stepsize cap parameter d must be > 0", d);
  require_finite_nonneg(a, "decay rate a");
  require(d >= a, "d must be >= a", d);
}

using Shape = StepWeightSchedule::WeightShape;

// Exponential weights (1 - a*gamma)^-(t+1); when a*gamma = 1 they are
// undefined and their limit puts all mass on the last iterate.
void exponential_weights(StepWeightSchedule::Rule& rule, double a, double d,
                         double gamma, bool& degenerate) {
  if (a == 0.0) {
    rule.shape = Shape::uniform;
  } else if (gamma == 1.0 / d && a == d) {
    rule.shape = Shape::last_iterate;
    degenerate = true;
  } else {
    rule.shape = Shape::exponential;
    rule.growth = 1.0 / (1.0 - a * gamma);
    rule.log_ratio = -std::log1p(-a * gamma);
  }
}

StepWeightSchedule::Rule constant_rule(double gamma, double cap) {
  StepWeightSchedule::Rule rule;
  rule.head_gamma = gamma;
  rule.tail_start = std::numeric_limits<std::size_t>::max();
  rule.cap = cap;
  return rule;
}

}  // namespace

std::string_view to_string(ScheduleFamily family) {
  switch (family) {
    case ScheduleFamily::constant_log: return "constant_log";
    case ScheduleFamily::two_phase: return "two_phase";
    case ScheduleFamily::sublinear: return "sublinear";
    case ScheduleFamily::user_constant: return "user_constant";
    case ScheduleFamily::classic_constant: return "classic_constant";
    case ScheduleFamily::decreasing: return "decreasing";
  }
  return "unknown";
}

std::optional<ScheduleFamily> parse_schedule_family(std::string_view name) {
  for (auto f : {ScheduleFamily::constant_log, ScheduleFamily::two_phase,
                 ScheduleFamily::sublinear, ScheduleFamily::user_constant,
                 ScheduleFamily::classic_constant, ScheduleFamily::decreasing}) {
    if (to_string(f) == name) return f;
  }
  return std::nullopt;
}

StepWeightSchedule::StepWeightSchedule(ScheduleFamily family, std::size_t horizon,
                                       Rule rule, bool degenerate)
    : family_(family), horizon_(horizon), rule_(rule), degenerate_(degenerate) {
  require(std::isfinite(rule_.cap) && rule_.cap > 0.0, "stepsize cap must be > 0", rule_.cap);
  if (rule_.tail_start > 0) {
    require(rule_.head_gamma > 0.0 && rule_.head_gamma <= rule_.cap,
            "constant stepsize must lie in (0, cap]", rule_.head_gamma);
  }
  if (rule_.tail_start <= horizon_) {
    require(rule_.tail_a > 0.0 && std::isfinite(rule_.tail_a),
            "decreasing stepsizes need a > 0", rule_.tail_a);
    require(rule_.tail_kappa > 0.0 && std::isfinite(rule_.tail_kappa),
            "decreasing stepsizes need kappa > 0", rule_.tail_kappa);
  }
  switch (rule_.shape) {
    case Shape::exponential:
      require(std::isfinite(rule_.log_ratio) && rule_.log_ratio >= 0.0,
              "exponential weights need a finite non-negative log ratio", rule_.log_ratio);
      break;
    case Shape::polynomial:
      require(rule_.weight_start <= horizon_, "polynomial weights start after the horizon",
              static_cast<double>(rule_.weight_start));
      require(rule_.weight_kappa > 0.0, "polynomial weight offset must be > 0",
              rule_.weight_kappa);
      break;
    case Shape::uniform:
    case Shape::last_iterate:
      break;
  }

  if (size() <= kMaterializeLimit) {
    gammas_.resize(size());
    log_weights_.resize(size());
    for (std::size_t t = 0; t <= horizon_; ++t) {
      gammas_[t] = rule_gamma(t);
      log_weights_[t] = rule_log_weight(t);
    }
  }
}

double StepWeightSchedule::rule_gamma(std::size_t t) const {
  if (t < rule_.tail_start) return rule_.head_gamma;
  const double offset = static_cast<double>(t - rule_.tail_start);
  return std::min(rule_.cap, 2.0 / (rule_.tail_a * (rule_.tail_kappa + offset)));
}

double StepWeightSchedule::rule_log_weight(std::size_t t) const {
  switch (rule_.shape) {
    case Shape::exponential:
      return static_cast<double>(t + 1) * rule_.log_ratio;
    case Shape::uniform:
      return 0.0;
    case Shape::last_iterate:
      return t == horizon_ ? 0.0 : -kInf;
    case Shape::polynomial:
      if (t < rule_.weight_start) return -kInf;
      return rule_.weight_power *
             std::log(rule_.weight_kappa + static_cast<double>(t - rule_.weight_start));
  }
  return -kInf;
}

double StepWeightSchedule::gamma(std::size_t t) const {
  return materialized() ? gammas_[t] : rule_gamma(t);
}

double StepWeightSchedule::log_weight(std::size_t t) const {
  return materialized() ? log_weights_[t] : rule_log_weight(t);
}

double StepWeightSchedule::weight(std::size_t t) const {
  switch (rule_.shape) {
    case Shape::exponential:
      return std::pow(rule_.growth, static_cast<double>(t + 1));
    case Shape::uniform:
      return 1.0;
    case Shape::last_iterate:
      return t == horizon_ ? 1.0 : 0.0;
    case Shape::polynomial: {
      if (t < rule_.weight_start) return 0.0;
      const double base = rule_.weight_kappa + static_cast<double>(t - rule_.weight_start);
      if (rule_.weight_power == 1.0) return base;
      if (rule_.weight_power == 2.0) return base * base;
      return std::pow(base, rule_.weight_power);
    }
  }
  return 0.0;
}

std::size_t StepWeightSchedule::first_weighted() const {
  switch (rule_.shape) {
    case Shape::last_iterate: return horizon_;
    case Shape::polynomial: return rule_.weight_start;
    default: return 0;
  }
}

std::vector<double> StepWeightSchedule::gammas() const {
  if (materialized()) return gammas_;
  std::vector<double> out(size());
  for (std::size_t t = 0; t <= horizon_; ++t) out[t] = rule_gamma(t);
  return out;
}

std::vector<double> StepWeightSchedule::weights() const {
  std::vector<double> out(size());
  for (std::size_t t = 0; t <= horizon_; ++t) out[t] = weight(t);
  return out;
}

std::vector<double> StepWeightSchedule::log_weights() const {
  if (materialized()) return log_weights_;
  std::vector<double> out(size());
  for (std::size_t t = 0; t <= horizon_; ++t) out[t] = rule_log_weight(t);
  return out;
}

double log_tuned_gamma(double a, double c, double r0, std::size_t T) {
  if (c == 0.0) return kInf;
  const double Td = static_cast<double>(T);
  const double arg = a * a * r0 * Td * Td / c;
  return std::log(std::max(2.0, arg)) / (a * Td);
}

StepWeightSchedule constant_log_stepsize(double a, double d, double c, double r0,
                                         std::size_t T) {
  if (a == 0.0) {
    throw InvalidArgument(
        "constant_log stepsize needs a > 0; use the sublinear schedule for a = 0");
  }
  require_cap(a, d);
  require_finite_nonneg(c, "noise coefficient c");
  require_finite_nonneg(r0, "initial value r0");
  require(T >= 1, "horizon T must be >= 1", static_cast<double>(T));

  const double gamma = std::min(1.0 / d, log_tuned_gamma(a, c, r0, T));
  auto rule = constant_rule(gamma, 1.0 / d);
  bool degenerate = false;
  exponential_weights(rule, a, d, gamma, degenerate);
  return StepWeightSchedule(ScheduleFamily::constant_log, T, rule, degenerate);
}

StepWeightSchedule two_phase_schedule(double a, double d, std::size_t T) {
  if (a == 0.0) throw InvalidArgument("two_phase schedule needs a > 0");
  require_cap(a, d);

  const double cap = 1.0 / d;
  if (static_cast<double>(T) <= d / a) {
    auto rule = constant_rule(cap, cap);
    bool degenerate = false;
    exponential_weights(rule, a, d, cap, degenerate);
    return StepWeightSchedule(ScheduleFamily::two_phase, T, rule, degenerate);
  }
  const std::size_t t0 = (T + 1) / 2;  // ceil(T / 2)
  const double kappa = 2.0 * d / a;
  StepWeightSchedule::Rule rule;
  rule.head_gamma = cap;
  rule.tail_start = t0;
  rule.tail_a = a;
  rule.tail_kappa = kappa;
  rule.cap = cap;
  rule.shape = Shape::polynomial;
  rule.weight_kappa = kappa;
  rule.weight_power = 2.0;
  rule.weight_start = t0;
  return StepWeightSchedule(ScheduleFamily::two_phase, T, rule);
}

StepWeightSchedule sublinear_stepsize(double d, double c, double r0, std::size_t T) {
  require(std::isfinite(d) && d > 0.0, "stepsize cap parameter d must be > 0", d);
  require_finite_nonneg(c, "noise coefficient c");
  require_finite_nonneg(r0, "initial value r0");

  const double cap = 1.0 / d;
  double gamma = cap;
  bool degenerate = false;
  if (c > 0.0) {
    if (r0 == 0.0) {
      degenerate = true;
    } else {
      const double threshold = r0 / (c * static_cast<double>(T + 1));
      if (1.0 / (d * d) > threshold) gamma = std::sqrt(threshold);
    }
  }
  auto rule = constant_rule(gamma, cap);
  rule.shape = Shape::uniform;
  return StepWeightSchedule(ScheduleFamily::sublinear, T, rule, degenerate);
}

StepWeightSchedule classic_constant_stepsize(double mu, double L, double R2,
                                             double sigma2, std::size_t T) {
  require(std::isfinite(mu) && mu > 0.0, "classic constant stepsize needs mu > 0", mu);
  require(std::isfinite(L) && L > 0.0, "smoothness L must be > 0", L);
  require(mu <= L, "mu must not exceed L", mu);
  require_finite_nonneg(R2, "squared initial distance R^2");
  require_finite_nonneg(sigma2, "noise level sigma^2");
  require(T >= 1, "horizon T must be >= 1", static_cast<double>(T));

  double tuned = kInf;
  if (sigma2 > 0.0) {
    const double Td = static_cast<double>(T);
    tuned = std::log(std::max(2.0, mu * mu * R2 * Td / sigma2)) / (mu * Td);
  }
  const double cap = 1.0 / (2.0 * L);
  auto rule = constant_rule(std::min(cap, tuned), cap);
  rule.shape = Shape::last_iterate;
  return StepWeightSchedule(ScheduleFamily::classic_constant, T, rule);
}

StepWeightSchedule user_constant_schedule(double gamma, double a, double d,
                                          std::size_t T) {
  require_cap(a, d);
  require(gamma > 0.0 && gamma <= 1.0 / d, "constant stepsize must lie in (0, 1/d]", gamma);
  auto rule = constant_rule(gamma, 1.0 / d);
  bool degenerate = false;
  exponential_weights(rule, a, d, gamma, degenerate);
  return StepWeightSchedule(ScheduleFamily::user_constant, T, rule, degenerate);
}

StepWeightSchedule decreasing_schedule(double a, double d, std::size_t T,
                                       DecreasingWeights weights) {
  if (a == 0.0) throw InvalidArgument("decreasing schedule needs a > 0");
  require_cap(a, d);
  const double kappa = 2.0 * d / a;
  StepWeightSchedule::Rule rule;
  rule.tail_start = 0;
  rule.tail_a = a;
  rule.tail_kappa = kappa;
  rule.cap = 1.0 / d;
  rule.shape = Shape::polynomial;
  rule.weight_kappa = kappa;
  rule.weight_power = weights == DecreasingWeights::linear ? 1.0 : 2.0;
  rule.weight_start = 0;
  return StepWeightSchedule(ScheduleFamily::decreasing, T, rule);
}

void write_schedule_csv(const StepWeightSchedule& schedule, std::ostream& out) {
  CsvWriter csv(out);
  csv.header({"t", "gamma", "weight"});
  for (std::size_t t = 0; t <= schedule.horizon(); ++t) {
    csv.field(static_cast<std::uint64_t>(t)).field(schedule.gamma(t)).field(schedule.weight(t));
    csv.end_row();
  }
}

}  // namespace sgdbound
