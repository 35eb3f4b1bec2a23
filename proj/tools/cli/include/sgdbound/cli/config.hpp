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

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sgdbound/error.hpp"
#include "sgdbound/oracles.hpp"
#include "sgdbound/recursion_lab.hpp"
#include "sgdbound/schedules.hpp"

namespace sgdbound::cli {

/// Malformed configuration. `field` is a dotted path such as
/// "problems[0].spectrum"; `line` is 1-based, 0 when unknown.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, std::size_t line, const std::string& message);
  const std::string& field() const { return field_; }
  std::size_t line() const { return line_; }

 private:
  std::string field_;
  std::size_t line_;
};

enum class Design { gaussian, orthogonal, low_rank };

struct ProblemSpec {
  std::string name;
  ProblemKind kind = ProblemKind::noisy_quadratic;
  /// Quadratic eigenvalues.
  std::vector<double> spectrum;
  double sigma2 = 0.0;
  /// Finite sums: m x dim design.
  std::size_t rows = 0;
  std::size_t dim = 0;
  Design design = Design::gaussian;
  std::size_t rank = 0;
  double noise_std = 0.0;
  bool interpolating = false;
  double l2 = 0.0;
  /// Distance of x0 from x*.
  double R = 1.0;
  /// Noise level assumed when tuning schedules and evaluating bounds, for
  /// studying misspecified constants. Defaults to the oracle's sigma2.
  std::optional<double> assumed_sigma2;

  bool operator==(const ProblemSpec&) const = default;
};

struct AlgorithmSpec {
  std::vector<ScheduleFamily> schedules{ScheduleFamily::two_phase};
  std::vector<std::size_t> horizons;
  /// Stepsize for user_constant.
  std::optional<double> gamma;
  DecreasingWeights decreasing_weights = DecreasingWeights::quadratic;

  bool operator==(const AlgorithmSpec&) const = default;
};

/// One cartesian grid of recursion cells; `draws` is per (cell, mode).
struct RecursionBlock {
  std::vector<LemmaTag> lemmas;
  std::vector<double> a, b, c;
  std::vector<DRule> d;
  std::vector<std::size_t> horizons;
  std::vector<double> r0{1.0};
  std::vector<SequenceMode> modes{SequenceMode::tight, SequenceMode::slack};
  std::size_t draws = 10'000;

  bool operator==(const RecursionBlock&) const = default;
  RecursionGrid grid() const;
};

struct OracleCheckSpec {
  std::size_t points = 20;
  std::size_t samples = 2000;
  /// Query points are drawn at distance radius * U(0, 1] from x*.
  double radius = 1.0;
  /// Also check the built-in instance grid.
  bool standard_instances = false;

  bool operator==(const OracleCheckSpec&) const = default;
};

struct ExperimentConfig {
  std::optional<std::string> mode;
  std::uint64_t master_seed = 0;
  std::size_t replicates = 1;
  std::optional<std::string> output;
  /// Emit one row per replicate in `run` (aggregates are always written).
  bool write_replicates = true;
  std::vector<ProblemSpec> problems;
  AlgorithmSpec algorithm;
  std::optional<std::vector<RecursionBlock>> recursion;
  OracleCheckSpec check_oracle;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Parses a JSON document. `mode` selects the required blocks ("run" and
/// "sweep" need problems and horizons, "verify-recursion" fills a default
/// grid when the recursion block is absent).
ExperimentConfig parse_config(std::string_view text, std::string_view mode);
ExperimentConfig load_config(const std::string& path, std::string_view mode);
/// Canonical JSON; parse_config(to_json(c), mode) == c.
std::string to_json(const ExperimentConfig& config);

/// Blocks used by verify-recursion when the config has no recursion entry.
std::vector<RecursionBlock> default_recursion_blocks();

std::string_view to_string(Design design);
ProblemOracle build_oracle(const ProblemSpec& spec, std::uint64_t seed);

}  // namespace sgdbound::cli
