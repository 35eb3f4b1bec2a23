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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "sgdbound/cli/commands.hpp"
#include "sgdbound/cli/config.hpp"
#include "sgdbound/schedules.hpp"

using namespace sgdbound;
using namespace sgdbound::cli;

namespace {

const std::string kFixtures = SGDBOUND_FIXTURE_DIR;
const std::string kGolden = SGDBOUND_GOLDEN_DIR;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n') + 1); }

struct Outcome {
  int code;
  std::string out, err;
};

Outcome invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string fixture(const std::string& name) { return kFixtures + "/" + name; }

std::size_t count_rows(const std::string& csv, const std::string& prefix) {
  std::size_t n = 0;
  std::istringstream in(csv);
  for (std::string line; std::getline(in, line);) n += line.rfind(prefix, 0) == 0;
  return n;
}

}  // namespace

TEST_CASE("config round trip") {
  for (const auto& [file, mode] : std::vector<std::pair<std::string, std::string>>{
           {"run_deterministic.json", "run"},
           {"run_noisy.json", "run"},
           {"misspecified_noise.json", "run"},
           {"verify_small.json", "verify-recursion"},
           {"check_oracle_small.json", "check-oracle"}}) {
    INFO(file);
    const auto parsed = load_config(fixture(file), mode);
    const auto again = parse_config(to_json(parsed), mode);
    CHECK(again == parsed);
    CHECK(to_json(again) == to_json(parsed));
  }

  ExperimentConfig full;
  full.mode = "sweep";
  full.master_seed = 18446744073709551615ull;
  full.replicates = 9;
  full.output = "out.csv";
  full.write_replicates = false;
  ProblemSpec ls;
  ls.name = "ls";
  ls.kind = ProblemKind::least_squares;
  ls.rows = 12;
  ls.dim = 4;
  ls.design = Design::low_rank;
  ls.rank = 2;
  ls.noise_std = 0.1;
  ls.R = 0.3;
  ls.assumed_sigma2 = 0.7;
  ProblemSpec lg;
  lg.name = "lg";
  lg.kind = ProblemKind::logistic;
  lg.rows = 5;
  lg.dim = 2;
  lg.design = Design::orthogonal;
  lg.l2 = 0.1;
  full.problems = {ls, lg};
  full.algorithm.schedules = {ScheduleFamily::decreasing, ScheduleFamily::user_constant};
  full.algorithm.horizons = {3, 1000000};
  full.algorithm.gamma = 1.0 / 3.0;
  full.algorithm.decreasing_weights = DecreasingWeights::linear;
  full.recursion = default_recursion_blocks();
  full.check_oracle = {7, 1234, 0.1, true};
  CHECK(parse_config(to_json(full), "sweep") == full);
}

TEST_CASE("config diagnostics name the field and line") {
  SUBCASE("replicates = 0") {
    const auto r = invoke({"run", "--config", fixture("replicates_zero.json")});
    CHECK(r.code == kExitUsage);
    CHECK(r.err.find("replicates") != std::string::npos);
    CHECK(r.err.find("line 3") != std::string::npos);
  }
  SUBCASE("unknown schedule inside a nested list") {
    try {
      load_config(fixture("unknown_schedule.json"), "run");
      FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.field() == "algorithm.schedules[1]");
      CHECK(e.line() == 5);
    }
  }
  SUBCASE("malformed JSON") {
    try {
      load_config(fixture("malformed.json"), "run");
      FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.line() == 4);
    }
  }
  SUBCASE("repeated keys resolve to the right occurrence") {
    const std::string text = R"({
  "problems": [
    {"kind": "noisy_quadratic", "spectrum": [1]},
    {"kind": "noisy_quadratic",
     "spectrum": [-1]}
  ],
  "algorithm": {"horizons": [5]}
})";
    try {
      parse_config(text, "run");
      FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.field() == "problems[1].spectrum");
      CHECK(e.line() == 5);
    }
  }
  SUBCASE("unknown fields and mode mismatch") {
    CHECK_THROWS_AS(parse_config(R"({"replicate": 3})", "verify-recursion"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"mode": "run"})", "verify-recursion"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"problem": {"kind": "noisy_quadratic", "spectrum": [1]},
                                     "algorithm": {"horizons": []}})",
                                 "run"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"problem": {"kind": "noisy_quadratic", "spectrum": [1]},
                                     "algorithm": {"schedule": "user_constant", "horizons": [3]}})",
                                 "run"),
                    ConfigError);
  }
}

TEST_CASE("exit-code contract") {
  CHECK(invoke({"run", "--config", fixture("run_deterministic.json")}).code == kExitOk);
  CHECK(invoke({"run", "--config", fixture("malformed.json")}).code == kExitUsage);
  CHECK(invoke({"run", "--config", fixture("misspecified_noise.json")}).code == kExitViolation);
  CHECK(invoke({"run", "--config", fixture("overflow.json")}).code == kExitNumeric);
  CHECK(invoke({"run"}).code == kExitUsage);
  CHECK(invoke({"frobnicate"}).code == kExitUsage);
  CHECK(invoke({"run", "--config", fixture("does_not_exist.json")}).code == kExitUsage);
  CHECK(invoke({"verify-recursion", "--config", fixture("verify_small.json")}).code == kExitOk);
  CHECK(invoke({"check-oracle", "--config", fixture("check_oracle_small.json")}).code == kExitOk);
  CHECK(invoke({"--help"}).code == kExitOk);

  const auto v = invoke({"run", "--config", fixture("misspecified_noise.json")});
  CHECK(v.err.find("violation: noisy_quadratic_0 / two_phase / T=1000") != std::string::npos);
}

TEST_CASE("deterministic smoke run") {
  const auto r = invoke({"run", "--config", fixture("run_deterministic.json")});
  REQUIRE(r.code == kExitOk);
  CHECK(count_rows(r.out, "aggregate,") == 1);
  std::istringstream in(r.out);
  std::string line;
  while (std::getline(in, line) && line.rfind("aggregate,", 0) != 0) {
  }
  const double ratio = std::stod(line.substr(line.rfind(',') + 1));
  CHECK(ratio < 1.0);
}

TEST_CASE("CSV schemas match the golden column lists") {
  const auto run = invoke({"run", "--config", fixture("run_deterministic.json")});
  CHECK(first_line(run.out) == slurp(kGolden + "/run_columns.csv"));
  const auto sweep = invoke({"sweep", "--config", fixture("run_noisy.json")});
  CHECK(first_line(sweep.out) == slurp(kGolden + "/sweep_columns.csv"));
  CHECK(count_rows(sweep.out, "replicate,") == 0);
  CHECK(count_rows(sweep.out, "aggregate,") == 8);
  const auto verify = invoke({"verify-recursion", "--config", fixture("verify_small.json")});
  CHECK(first_line(verify.out) == slurp(kGolden + "/verify_recursion_columns.csv"));
  const auto check = invoke({"check-oracle", "--config", fixture("check_oracle_small.json")});
  CHECK(first_line(check.out) == slurp(kGolden + "/check_oracle_columns.csv"));
  std::ostringstream sched;
  write_schedule_csv(two_phase_schedule(1.0, 2.0, 3), sched);
  CHECK(first_line(sched.str()) == slurp(kGolden + "/schedule_columns.csv"));
}

TEST_CASE("reruns are byte-identical and independent of worker count") {
  const auto a = invoke({"run", "--config", fixture("run_noisy.json")});
  const auto b = invoke({"run", "--config", fixture("run_noisy.json")});
  const auto c = invoke({"run", "--config", fixture("run_noisy.json"), "--workers", "3"});
  REQUIRE(a.code == kExitOk);
  CHECK(a.out == b.out);
  CHECK(a.out == c.out);
  CHECK(count_rows(a.out, "replicate,") == 8 * 50);

  const auto reseeded = invoke({"run", "--config", fixture("run_noisy.json"), "--seed", "99"});
  CHECK(reseeded.out != a.out);

  const auto v1 = invoke({"verify-recursion", "--config", fixture("verify_small.json")});
  const auto v2 = invoke({"verify-recursion", "--config", fixture("verify_small.json"), "--workers", "4"});
  CHECK(v1.out == v2.out);
}

TEST_CASE("verify-recursion reports skipped cells and pairs tight with slack") {
  const auto r = invoke({"verify-recursion", "--config", fixture("verify_small.json")});
  REQUIRE(r.code == kExitOk);
  CHECK(r.err.find("skipped: two_phase a=0") != std::string::npos);
  // Each cell's worst tight margin is at most its worst slack margin.
  std::istringstream in(r.out);
  std::string line, previous;
  std::getline(in, line);
  std::size_t pairs = 0;
  while (std::getline(in, line)) {
    if (line.find(",slack,") != std::string::npos && previous.find(",tight,") != std::string::npos) {
      const double tight = std::stod(previous.substr(previous.rfind(',') + 1));
      const double slack = std::stod(line.substr(line.rfind(',') + 1));
      CHECK(tight <= slack);
      ++pairs;
    }
    previous = line;
  }
  CHECK(pairs > 0);
}

TEST_CASE("output paths") {
  const auto dir = std::filesystem::temp_directory_path() / "sgdbound_cli_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "run.csv").string();
  const auto r = invoke({"run", "--config", fixture("run_deterministic.json"), "--out", path});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("theorem_min ok") != std::string::npos);
  CHECK(first_line(slurp(path)) == slurp(kGolden + "/run_columns.csv"));
  const auto bad = invoke({"run", "--config", fixture("run_deterministic.json"), "--out",
                        (dir / "missing" / "x.csv").string()});
  CHECK(bad.code == kExitUsage);
  std::filesystem::remove_all(dir);
}

TEST_CASE("bound subcommand") {
  const auto r = invoke({"bound", "--mu", "1", "--L", "1", "--R", "1", "--sigma2", "1", "--T", "100"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("theorem_branch_sub        0.22\n") != std::string::npos);
  CHECK(r.out.find("theorem_min               0.22\n") != std::string::npos);

  const auto quiet = invoke({"bound", "--mu", "1", "--L", "1", "--R", "1", "--sigma2", "0", "--T", "10"});
  CHECK(quiet.out.find("distance_tail_term        0\n") != std::string::npos);

  const auto flat = invoke({"bound", "--mu", "0", "--L", "1", "--R", "1", "--sigma2", "1", "--T", "10"});
  CHECK(flat.code == kExitOk);
  CHECK(flat.out.find("theorem_branch_exp        inf\n") != std::string::npos);
  CHECK(flat.out.find("lemma_two_phase           n/a") != std::string::npos);

  const auto missing = invoke({"bound", "--mu", "1", "--L", "1", "--R", "1", "--sigma2", "1"});
  CHECK(missing.code == kExitUsage);
  CHECK(missing.err.find("--T") != std::string::npos);
  CHECK(missing.err.find("Usage") != std::string::npos);
}
