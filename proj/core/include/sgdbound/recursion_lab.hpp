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

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sgdbound/schedules.hpp"

namespace sgdbound {

/// Constants of the two-sequence recursion
///
///   r_{t+1} <= (1 - a gamma_t) r_t - b gamma_t s_t + c gamma_t^2,
///   gamma_t <= 1/d.
class RecursionParams {
 public:
  /// Throws InvalidArgument naming the violated bound unless
  /// b > 0, a >= 0, c >= 0, d > 0 and d >= a.
  RecursionParams(double a, double b, double c, double d);

  double a() const { return a_; }
  double b() const { return b_; }
  double c() const { return c_; }
  double d() const { return d_; }

  bool operator==(const RecursionParams&) const = default;

 private:
  double a_, b_, c_, d_;
};

/// Sequences r_0..r_{T+1} and s_0..s_T together with the stepsizes
/// gamma_0..gamma_T that generated them.
struct SequencePair {
  std::vector<double> r;
  std::vector<double> s;
  std::vector<double> gammas;
  RecursionParams params;

  std::size_t horizon() const { return s.empty() ? 0 : s.size() - 1; }
};

enum class SequenceMode {
  tight,  // r_{t+1} equals the right-hand side
  slack,  // r_{t+1} drawn uniformly below the right-hand side
};

std::string_view to_string(SequenceMode mode);
std::optional<SequenceMode> parse_sequence_mode(std::string_view name);

struct SequenceOptions {
  SequenceMode mode = SequenceMode::tight;
  /// Force every s_t to zero (pure decay of r).
  bool zero_s = false;
};

/// Relative slack used when re-checking the recursion step by step.
inline constexpr double kFeasibilitySlack = 1e-12;
/// Relative tolerance on lemma margins: margin >= -kMarginTolerance * bound.
inline constexpr double kMarginTolerance = 1e-9;

/// Draws one feasible sequence. s_t is uniform on
/// [0, ((1 - a gamma_t) r_t + c gamma_t^2) / (b gamma_t)], which keeps
/// r_{t+1} >= 0. The s draws come from stream 0 of `seed` and the slack draws
/// from stream 1, so tight and slack sequences with the same seed share their
/// s-uniforms; the slack sequence is then dominated term by term.
SequencePair generate_feasible_sequence(const RecursionParams& params,
                                        std::span<const double> gammas, double r0,
                                        SequenceOptions options, std::uint64_t seed);

/// Largest relative violation of the recursion over all steps (<= 0 when
/// every step holds exactly). Scale per step is the largest term magnitude.
double max_recursion_violation(const SequencePair& seq);

/// (b / W_T) sum_t s_t w_t + a r_{T+1} with W_T = sum_t w_t, accumulated as an
/// online normalized mean. Throws when all weights are zero or any is
/// negative or the lengths disagree.
double weighted_error(const SequencePair& seq, std::span<const double> weights);
/// Same quantity using the schedule's log-weights, so geometric weights are
/// never materialized.
double weighted_error(const SequencePair& seq, const StepWeightSchedule& schedule);

/// r0/gamma exp(-a gamma (T+1)) + c gamma at the constant_log stepsize.
double lemma_constant_bound(const RecursionParams& params, double r0, std::size_t T);
/// 32 d r0 exp(-aT/(2d)) + 36 c/(aT).
double lemma_two_phase_bound(const RecursionParams& params, double r0, std::size_t T);
/// d r0/(T+1) + 2 sqrt(c r0)/sqrt(T+1).
double lemma_sublinear_bound(const RecursionParams& params, double r0, std::size_t T);
/// r0 exp(-aT/d) + c/(ad): bound on r_T under gamma = 1/d.
double lemma_unroll_bound(const RecursionParams& params, double r0, std::size_t T);
/// 2 a kappa^2 r0 / T^2 + 2c/(aT), kappa = 2d/a.
double lemma_decreasing_bound(const RecursionParams& params, double r0, std::size_t T);

enum class LemmaTag {
  constant_log,
  two_phase,
  sublinear,
  unroll,
  decreasing_linear,
  decreasing_quadratic,
};

std::string_view to_string(LemmaTag tag);
std::optional<LemmaTag> parse_lemma_tag(std::string_view name);

/// True for lemmas whose bound is enforced by campaigns. The pure
/// decreasing-stepsize bound is reported for both weight families but never
/// gates a campaign.
bool lemma_is_gating(LemmaTag tag);

/// Schedule under which a lemma's bound is claimed.
StepWeightSchedule schedule_for(LemmaTag tag, const RecursionParams& params, double r0,
                                std::size_t T);

struct VerificationMargin {
  /// Left side of the lemma: (b/W) sum s_t w_t + a r_{T+1} (no r term for
  /// the sublinear lemma; r_t at the tightest t for the unrolling lemma).
  double weighted_error = 0.0;
  double bound_value = 0.0;
  double margin = 0.0;  // bound_value - weighted_error
  LemmaTag tag = LemmaTag::two_phase;

  bool holds() const { return margin >= -kMarginTolerance * std::max(1.0, bound_value); }
};

/// Evaluates the lemma's left side on `seq` and compares with its bound.
/// Throws when the schedule length or family does not match.
VerificationMargin verify_lemma(const SequencePair& seq, const StepWeightSchedule& schedule,
                                LemmaTag tag);

// ---------------------------------------------------------------------------
// Randomized campaigns
// ---------------------------------------------------------------------------

/// d = scale * a + offset.
struct DRule {
  double scale = 1.0;
  double offset = 0.0;
  bool operator==(const DRule&) const = default;
};

struct RecursionGrid {
  std::vector<LemmaTag> lemmas;
  std::vector<double> a, b, c;
  std::vector<DRule> d;
  std::vector<std::size_t> horizons;
  std::vector<double> r0{1.0};
  std::vector<SequenceMode> modes{SequenceMode::tight, SequenceMode::slack};
  /// Draws per (cell, mode).
  std::size_t draws = 1000;
};

struct CampaignCell {
  LemmaTag tag;
  RecursionParams params;
  double r0;
  std::size_t T;
  SequenceMode mode;
};

struct CellOutcome {
  CampaignCell cell;
  /// Seed of the draw with the smallest relative margin.
  std::uint64_t worst_seed = 0;
  VerificationMargin worst;
  std::size_t draws = 0;
  std::size_t violations = 0;
};

/// Expands the grid; cells whose parameters fail a lemma's precondition
/// (a = 0 for the a > 0 lemmas, invalid d, the degenerate sublinear case
/// r0 = 0 < c) are listed in `skipped`.
std::vector<CampaignCell> expand_grid(const RecursionGrid& grid,
                                      std::vector<std::string>* skipped = nullptr);

/// Seed of draw `draw` in a cell. Depends on the cell's parameters but not on
/// its mode, so tight and slack draws with equal index are matched.
std::uint64_t cell_draw_seed(std::uint64_t master_seed, const CampaignCell& cell,
                             std::size_t draw);

CellOutcome run_cell(const CampaignCell& cell, std::size_t draws, std::uint64_t master_seed);

std::vector<CellOutcome> run_recursion_campaign(const std::vector<CampaignCell>& cells,
                                                std::size_t draws,
                                                std::uint64_t master_seed,
                                                std::size_t workers = 1);

/// Columns: lemma_tag, a, b, c, d, T, mode, seed, weighted_error, bound, margin.
void write_campaign_csv(const std::vector<CellOutcome>& outcomes, std::ostream& out);

}  // namespace sgdbound
