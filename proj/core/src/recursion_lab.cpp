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

#include "sgdbound/recursion_lab.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "sgdbound/csv.hpp"
#include "sgdbound/error.hpp"
#include "sgdbound/online_weights.hpp"
#include "sgdbound/parallel.hpp"
#include "sgdbound/rng.hpp"

namespace sgdbound {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& what, double value) {
  if (!ok) throw InvalidArgument(what + " (got " + format_double(value) + ")");
}

void require_positive_a(const RecursionParams& p, const char* lemma) {
  if (p.a() == 0.0) {
    throw InvalidArgument(std::string(lemma) +
                          " bound needs a > 0; use the sublinear lemma for a = 0");
  }
}

template <typename LogWeight>
double weighted_error_impl(const SequencePair& seq, LogWeight&& log_weight,
                           bool include_r_term) {
  const std::size_t T = seq.horizon();
  OnlineWeights norm;
  double mean_s = 0.0;
  for (std::size_t t = 0; t <= T; ++t) {
    const double rho = norm.push(log_weight(t));
    if (rho > 0.0) mean_s += rho * (seq.s[t] - mean_s);
  }
  if (!norm.any_positive()) throw InvalidArgument("weights are all zero");
  const double r_term = include_r_term ? seq.params.a() * seq.r[T + 1] : 0.0;
  return seq.params.b() * mean_s + r_term;
}

void check_lengths(const SequencePair& seq) {
  if (seq.s.empty() || seq.r.size() != seq.s.size() + 1 ||
      seq.gammas.size() != seq.s.size()) {
    throw InvalidArgument("sequence pair needs |r| = |s| + 1 = |gammas| + 1");
  }
}

ScheduleFamily family_for(LemmaTag tag) {
  switch (tag) {
    case LemmaTag::constant_log: return ScheduleFamily::constant_log;
    case LemmaTag::two_phase: return ScheduleFamily::two_phase;
    case LemmaTag::sublinear: return ScheduleFamily::sublinear;
    case LemmaTag::unroll: return ScheduleFamily::user_constant;
    case LemmaTag::decreasing_linear:
    case LemmaTag::decreasing_quadratic: return ScheduleFamily::decreasing;
  }
  return ScheduleFamily::user_constant;
}

bool needs_positive_a(LemmaTag tag) { return tag != LemmaTag::sublinear; }

double relative_margin(const VerificationMargin& m) {
  if (m.bound_value > 0.0) return m.margin / m.bound_value;
  return m.margin >= 0.0 ? 0.0 : -kInf;
}

}  // namespace

RecursionParams::RecursionParams(double a, double b, double c, double d)
    : a_(a), b_(b), c_(c), d_(d) {
  require(std::isfinite(b) && b > 0.0, "recursion parameter b must be > 0", b);
  require(std::isfinite(a) && a >= 0.0, "recursion parameter a must be >= 0", a);
  require(std::isfinite(c) && c >= 0.0, "recursion parameter c must be >= 0", c);
  require(std::isfinite(d) && d > 0.0, "recursion parameter d must be > 0", d);
  require(d >= a, "recursion parameter d must be >= a", d);
}

std::string_view to_string(SequenceMode mode) {
  return mode == SequenceMode::tight ? "tight" : "slack";
}

std::optional<SequenceMode> parse_sequence_mode(std::string_view name) {
  if (name == "tight") return SequenceMode::tight;
  if (name == "slack") return SequenceMode::slack;
  return std::nullopt;
}

SequencePair generate_feasible_sequence(const RecursionParams& params,
                                        std::span<const double> gammas, double r0,
                                        SequenceOptions options, std::uint64_t seed) {
  require(std::isfinite(r0) && r0 >= 0.0, "r0 must be finite and >= 0", r0);
  if (gammas.empty()) throw InvalidArgument("stepsize list is empty");
  const double cap = 1.0 / params.d();
  for (double g : gammas) {
    require(g > 0.0 && g <= cap, "stepsizes must lie in (0, 1/d]", g);
  }

  const double a = params.a(), b = params.b(), c = params.c();
  SequencePair seq{std::vector<double>(gammas.size() + 1),
                   std::vector<double>(gammas.size()),
                   std::vector<double>(gammas.begin(), gammas.end()), params};
  CounterRng s_draws(seed, 0);
  CounterRng slack_draws(seed, 1);

  seq.r[0] = r0;
  for (std::size_t t = 0; t < gammas.size(); ++t) {
    const double g = gammas[t];
    const double base = (1.0 - a * g) * seq.r[t] + c * g * g;
    const double s_max = base / (b * g);
    const double s = options.zero_s ? 0.0 : s_draws.uniform() * s_max;
    seq.s[t] = s;
    const double tight = std::max(0.0, (1.0 - a * g) * seq.r[t] - b * g * s + c * g * g);
    seq.r[t + 1] =
        options.mode == SequenceMode::tight ? tight : slack_draws.uniform() * tight;
  }
  return seq;
}

double max_recursion_violation(const SequencePair& seq) {
  check_lengths(seq);
  const auto& p = seq.params;
  double worst = -kInf;
  for (std::size_t t = 0; t < seq.s.size(); ++t) {
    const double g = seq.gammas[t];
    const double decay = (1.0 - p.a() * g) * seq.r[t];
    const double drop = p.b() * g * seq.s[t];
    const double noise = p.c() * g * g;
    const double excess = seq.r[t + 1] - (decay - drop + noise);
    const double scale =
        std::max({std::abs(decay), std::abs(drop), noise, std::abs(seq.r[t + 1])});
    worst = std::max(worst, scale > 0.0 ? excess / scale : (excess > 0.0 ? kInf : 0.0));
  }
  return worst;
}

double weighted_error(const SequencePair& seq, std::span<const double> weights) {
  check_lengths(seq);
  if (weights.size() != seq.s.size()) {
    throw InvalidArgument("weights must have T+1 entries");
  }
  for (double w : weights) require(std::isfinite(w) && w >= 0.0, "weights must be >= 0", w);
  return weighted_error_impl(
      seq, [&](std::size_t t) { return weights[t] > 0.0 ? std::log(weights[t]) : -kInf; },
      true);
}

double weighted_error(const SequencePair& seq, const StepWeightSchedule& schedule) {
  check_lengths(seq);
  if (schedule.size() != seq.s.size()) {
    throw InvalidArgument("schedule horizon does not match the sequence");
  }
  return weighted_error_impl(seq, [&](std::size_t t) { return schedule.log_weight(t); },
                             true);
}

double lemma_constant_bound(const RecursionParams& p, double r0, std::size_t T) {
  require_positive_a(p, "constant-stepsize");
  require(T >= 1, "horizon T must be >= 1", static_cast<double>(T));
  const double gamma = std::min(1.0 / p.d(), log_tuned_gamma(p.a(), p.c(), r0, T));
  return r0 / gamma * std::exp(-p.a() * gamma * static_cast<double>(T + 1)) + p.c() * gamma;
}

double lemma_two_phase_bound(const RecursionParams& p, double r0, std::size_t T) {
  require_positive_a(p, "two-phase");
  require(T >= 1, "horizon T must be >= 1", static_cast<double>(T));
  const double Td = static_cast<double>(T);
  return 32.0 * p.d() * r0 * std::exp(-p.a() * Td / (2.0 * p.d())) +
         36.0 * p.c() / (p.a() * Td);
}

double lemma_sublinear_bound(const RecursionParams& p, double r0, std::size_t T) {
  const double n = static_cast<double>(T + 1);
  return p.d() * r0 / n + 2.0 * std::sqrt(p.c() * r0) / std::sqrt(n);
}

double lemma_unroll_bound(const RecursionParams& p, double r0, std::size_t T) {
  require_positive_a(p, "unrolling");
  return r0 * std::exp(-p.a() * static_cast<double>(T) / p.d()) + p.c() / (p.a() * p.d());
}

double lemma_decreasing_bound(const RecursionParams& p, double r0, std::size_t T) {
  require_positive_a(p, "decreasing-stepsize");
  require(T >= 1, "horizon T must be >= 1", static_cast<double>(T));
  const double kappa = 2.0 * p.d() / p.a();
  const double Td = static_cast<double>(T);
  return 2.0 * p.a() * kappa * kappa * r0 / (Td * Td) + 2.0 * p.c() / (p.a() * Td);
}

std::string_view to_string(LemmaTag tag) {
  switch (tag) {
    case LemmaTag::constant_log: return "constant_log";
    case LemmaTag::two_phase: return "two_phase";
    case LemmaTag::sublinear: return "sublinear";
    case LemmaTag::unroll: return "unroll";
    case LemmaTag::decreasing_linear: return "decreasing_linear";
    case LemmaTag::decreasing_quadratic: return "decreasing_quadratic";
  }
  return "unknown";
}

std::optional<LemmaTag> parse_lemma_tag(std::string_view name) {
  for (auto tag : {LemmaTag::constant_log, LemmaTag::two_phase, LemmaTag::sublinear,
                   LemmaTag::unroll, LemmaTag::decreasing_linear,
                   LemmaTag::decreasing_quadratic}) {
    if (to_string(tag) == name) return tag;
  }
  return std::nullopt;
}

bool lemma_is_gating(LemmaTag tag) {
  return tag != LemmaTag::decreasing_linear && tag != LemmaTag::decreasing_quadratic;
}

StepWeightSchedule schedule_for(LemmaTag tag, const RecursionParams& p, double r0,
                                std::size_t T) {
  switch (tag) {
    case LemmaTag::constant_log: return constant_log_stepsize(p.a(), p.d(), p.c(), r0, T);
    case LemmaTag::two_phase: return two_phase_schedule(p.a(), p.d(), T);
    case LemmaTag::sublinear: return sublinear_stepsize(p.d(), p.c(), r0, T);
    case LemmaTag::unroll: return user_constant_schedule(1.0 / p.d(), p.a(), p.d(), T);
    case LemmaTag::decreasing_linear:
      return decreasing_schedule(p.a(), p.d(), T, DecreasingWeights::linear);
    case LemmaTag::decreasing_quadratic:
      return decreasing_schedule(p.a(), p.d(), T, DecreasingWeights::quadratic);
  }
  throw InvalidArgument("unknown lemma tag");
}

VerificationMargin verify_lemma(const SequencePair& seq, const StepWeightSchedule& schedule,
                                LemmaTag tag) {
  check_lengths(seq);
  if (schedule.size() != seq.s.size()) {
    throw InvalidArgument("schedule horizon " + std::to_string(schedule.horizon()) +
                          " does not match sequence horizon " +
                          std::to_string(seq.horizon()));
  }
  if (schedule.family() != family_for(tag)) {
    throw InvalidArgument("lemma " + std::string(to_string(tag)) +
                          " does not apply to a " + std::string(to_string(schedule.family())) +
                          " schedule");
  }
  for (std::size_t t = 0; t < seq.gammas.size(); ++t) {
    if (seq.gammas[t] != schedule.gamma(t)) {
      throw InvalidArgument("sequence was not generated with this schedule's stepsizes");
    }
  }

  const auto& p = seq.params;
  const double r0 = seq.r[0];
  const std::size_t T = seq.horizon();
  VerificationMargin out;
  out.tag = tag;

  if (tag == LemmaTag::unroll) {
    if (schedule.gamma(0) != 1.0 / p.d()) {
      throw InvalidArgument("unrolling lemma needs gamma = 1/d");
    }
    double worst = kInf;
    for (std::size_t t = 0; t < seq.r.size(); ++t) {
      VerificationMargin m;
      m.tag = tag;
      m.weighted_error = seq.r[t];
      m.bound_value = lemma_unroll_bound(p, r0, t);
      m.margin = m.bound_value - m.weighted_error;
      const double rel = relative_margin(m);
      if (rel < worst) {
        worst = rel;
        out = m;
      }
    }
    return out;
  }

  const bool r_term = tag != LemmaTag::sublinear;
  out.weighted_error = weighted_error_impl(
      seq, [&](std::size_t t) { return schedule.log_weight(t); }, r_term);
  switch (tag) {
    case LemmaTag::constant_log: out.bound_value = lemma_constant_bound(p, r0, T); break;
    case LemmaTag::two_phase: out.bound_value = lemma_two_phase_bound(p, r0, T); break;
    case LemmaTag::sublinear: out.bound_value = lemma_sublinear_bound(p, r0, T); break;
    case LemmaTag::decreasing_linear:
    case LemmaTag::decreasing_quadratic:
      out.bound_value = lemma_decreasing_bound(p, r0, T);
      break;
    case LemmaTag::unroll: break;
  }
  out.margin = out.bound_value - out.weighted_error;
  return out;
}

std::vector<CampaignCell> expand_grid(const RecursionGrid& grid,
                                      std::vector<std::string>* skipped) {
  std::vector<CampaignCell> cells;
  auto skip = [&](LemmaTag tag, double a, double b, double c, double d, std::size_t T,
                  const std::string& why) {
    if (!skipped) return;
    skipped->push_back(std::string(to_string(tag)) + " a=" + format_double(a) +
                       " b=" + format_double(b) + " c=" + format_double(c) +
                       " d=" + format_double(d) + " T=" + std::to_string(T) + ": " + why);
  };
  for (LemmaTag tag : grid.lemmas) {
    for (double a : grid.a) {
      for (double b : grid.b) {
        for (double c : grid.c) {
          for (const DRule& rule : grid.d) {
            const double d = rule.scale * a + rule.offset;
            for (std::size_t T : grid.horizons) {
              if (needs_positive_a(tag) && a == 0.0) {
                skip(tag, a, b, c, d, T, "lemma requires a > 0");
                continue;
              }
              if (T == 0 && tag != LemmaTag::sublinear && tag != LemmaTag::unroll) {
                skip(tag, a, b, c, d, T, "lemma requires T >= 1");
                continue;
              }
              std::optional<RecursionParams> params;
              try {
                params.emplace(a, b, c, d);
              } catch (const InvalidArgument& e) {
                skip(tag, a, b, c, d, T, e.what());
                continue;
              }
              for (double r0 : grid.r0) {
                if (tag == LemmaTag::sublinear && r0 == 0.0 && c > 0.0) {
                  skip(tag, a, b, c, d, T,
                       "r0 = 0 with c > 0 leaves no admissible stepsize attaining the bound");
                  continue;
                }
                for (SequenceMode mode : grid.modes) {
                  cells.push_back(CampaignCell{tag, *params, r0, T, mode});
                }
              }
            }
          }
        }
      }
    }
  }
  return cells;
}

std::uint64_t cell_draw_seed(std::uint64_t master_seed, const CampaignCell& cell,
                             std::size_t draw) {
  std::uint64_t s = derive_seed(master_seed, static_cast<std::uint64_t>(cell.tag));
  for (double v : {cell.params.a(), cell.params.b(), cell.params.c(), cell.params.d(),
                   cell.r0}) {
    s = derive_seed(s, std::bit_cast<std::uint64_t>(v));
  }
  s = derive_seed(s, static_cast<std::uint64_t>(cell.T));
  return derive_seed(s, static_cast<std::uint64_t>(draw));
}

CellOutcome run_cell(const CampaignCell& cell, std::size_t draws, std::uint64_t master_seed) {
  const auto schedule = schedule_for(cell.tag, cell.params, cell.r0, cell.T);
  const auto gammas = schedule.gammas();
  CellOutcome out{cell, 0, {}, draws, 0};
  double worst = kInf;
  for (std::size_t k = 0; k < draws; ++k) {
    const std::uint64_t seed = cell_draw_seed(master_seed, cell, k);
    const auto seq = generate_feasible_sequence(cell.params, gammas, cell.r0,
                                                SequenceOptions{cell.mode, false}, seed);
    const auto m = verify_lemma(seq, schedule, cell.tag);
    if (!m.holds()) ++out.violations;
    const double rel = relative_margin(m);
    if (rel < worst || k == 0) {
      worst = rel;
      out.worst = m;
      out.worst_seed = seed;
    }
  }
  return out;
}

std::vector<CellOutcome> run_recursion_campaign(const std::vector<CampaignCell>& cells,
                                                std::size_t draws,
                                                std::uint64_t master_seed,
                                                std::size_t workers) {
  std::vector<std::optional<CellOutcome>> slots(cells.size());
  parallel_for(cells.size(), workers,
               [&](std::size_t i) { slots[i] = run_cell(cells[i], draws, master_seed); });
  std::vector<CellOutcome> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

void write_campaign_csv(const std::vector<CellOutcome>& outcomes, std::ostream& out) {
  CsvWriter csv(out);
  csv.header({"lemma_tag", "a", "b", "c", "d", "T", "mode", "seed", "weighted_error",
              "bound", "margin"});
  for (const auto& o : outcomes) {
    const auto& p = o.cell.params;
    csv.field(to_string(o.cell.tag))
        .field(p.a())
        .field(p.b())
        .field(p.c())
        .field(p.d())
        .field(static_cast<std::uint64_t>(o.cell.T))
        .field(to_string(o.cell.mode))
        .field(o.worst_seed)
        .field(o.worst.weighted_error)
        .field(o.worst.bound_value)
        .field(o.worst.margin);
    csv.end_row();
  }
}

}  // namespace sgdbound
