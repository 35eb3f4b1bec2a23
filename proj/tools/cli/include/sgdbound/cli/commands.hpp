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
#include <ostream>
#include <string>
#include <vector>

#include "sgdbound/cli/config.hpp"

namespace sgdbound::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitViolation = 2,
  kExitNumeric = 3,
};

struct CommandOptions {
  std::optional<std::string> out_path;
  std::size_t workers = 1;
  std::optional<std::uint64_t> seed;
};

/// Each command writes its CSV to `csv` and a human-readable summary to
/// `summary`, and returns kExitOk or kExitViolation. Errors propagate as
/// exceptions; run_cli maps them to exit codes.
int cmd_run(const ExperimentConfig& config, const CommandOptions& opts, std::ostream& csv,
            std::ostream& summary);
/// Aggregate rows only.
int cmd_sweep(const ExperimentConfig& config, const CommandOptions& opts, std::ostream& csv,
              std::ostream& summary);
int cmd_verify_recursion(const ExperimentConfig& config, const CommandOptions& opts,
                         std::ostream& csv, std::ostream& summary);
int cmd_check_oracle(const ExperimentConfig& config, const CommandOptions& opts,
                     std::ostream& csv, std::ostream& summary);

struct BoundArgs {
  double mu = 0.0;
  double L = 0.0;
  double R = 0.0;
  double sigma2 = 0.0;
  std::size_t T = 0;
  std::optional<double> gamma;
};
void cmd_bound(const BoundArgs& args, std::ostream& out);

/// Full command line without the program name, e.g. {"run", "--config", "x.json"}.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sgdbound::cli
