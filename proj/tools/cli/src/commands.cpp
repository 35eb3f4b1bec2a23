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

#include "sgdbound/cli/commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "sgdbound/csv.hpp"
#include "sgdbound/engine.hpp"
#include "sgdbound/parallel.hpp"
#include "sgdbound/rng.hpp"

namespace sgdbound::cli {

namespace {

std::string fixed(double v, int digits = 6) {
  if (!std::isfinite(v)) return format_double(v);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::uint64_t master_seed(const ExperimentConfig& c, const CommandOptions& o) {
  return o.seed.value_or(c.master_seed);
}

// Seeds: problem i builds from derive_seed(master, i); its cells draw from
// derive_seed(derive_seed(problem, 100 + schedule index), horizon index).
std::uint64_t problem_seed(std::uint64_t master, std::size_t i) { return derive_seed(master, i); }

struct Instance {
  const ProblemSpec* spec;
  ProblemOracle oracle;
  Vector x0;
  double sigma2_assumed;
};

Instance make_instance(const ProblemSpec& spec, std::uint64_t seed) {
  ProblemOracle oracle = build_oracle(spec, seed);
  Vector x0 = point_at_distance(oracle, spec.R, derive_seed(seed, 4));
  const double s2 = spec.assumed_sigma2.value_or(oracle.sigma2());
  return Instance{&spec, std::move(oracle), std::move(x0), s2};
}

StepWeightSchedule make_schedule(ScheduleFamily f, const AlgorithmSpec& alg, const Instance& in,
                                 std::size_t T) {
  const double mu = in.oracle.mu(), L = in.oracle.L(), R2 = in.spec->R * in.spec->R;
  const double s2 = in.sigma2_assumed;
  switch (f) {
    case ScheduleFamily::constant_log: return constant_log_stepsize(mu, 2 * L, s2, R2, T);
    case ScheduleFamily::two_phase: return two_phase_schedule(mu, 2 * L, T);
    case ScheduleFamily::sublinear: return sublinear_stepsize(2 * L, s2, R2, T);
    case ScheduleFamily::user_constant: return user_constant_schedule(*alg.gamma, mu, 2 * L, T);
    case ScheduleFamily::classic_constant:
      return classic_constant_stepsize(mu, L, R2, s2, T);
    case ScheduleFamily::decreasing:
      return decreasing_schedule(mu, 2 * L, T, alg.decreasing_weights);
  }
  throw InvalidArgument("unknown schedule family");
}

// The bound a schedule is run against, and which metric it constrains.
struct Check {
  std::string name;  // empty: informational only
  double bound = 0.0;
  enum Metric { composite, f_gap, dist_sq } metric = composite;
};

Check check_for(ScheduleFamily f, const Instance& in, const StepWeightSchedule& s,
                const BoundReport& b, std::size_t T) {
  const double mu = in.oracle.mu(), R2 = in.spec->R * in.spec->R, s2 = in.sigma2_assumed;
  const double g = s.gamma(0);
  const double n = static_cast<double>(T + 1);
  switch (f) {
    case ScheduleFamily::two_phase: return {"theorem_min", b.theorem_min, Check::composite};
    case ScheduleFamily::sublinear:
      return {"sublinear_lemma",
              lemma_sublinear_bound(RecursionParams(0.0, 1.0, s2, 2 * in.oracle.L()), R2, T),
              Check::f_gap};
    case ScheduleFamily::constant_log:
    case ScheduleFamily::user_constant:
      if (mu > 0.0) {
        return {"constant_lemma", R2 / g * std::exp(-mu * g * n) + s2 * g, Check::composite};
      }
      return {"constant_average", R2 / (g * n) + s2 * g, Check::f_gap};
    case ScheduleFamily::classic_constant:
      return {"distance_bound", b.distance_bound, Check::dist_sq};
    case ScheduleFamily::decreasing: return {"", b.theorem_min, Check::composite};
  }
  return {};
}

double ratio(double value, double bound) {
  if (bound > 0.0) return value / bound;
  return value > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

void run_header(CsvWriter& w) {
  w.header({"kind", "n", "mu", "L", "sigma2", "schedule", "T", "seed", "f_gap_avg",
            "dist_sq_last", "composite", "theorem_min", "ratio"});
}

int run_cells(const ExperimentConfig& c, const CommandOptions& o, std::ostream& csv,
              std::ostream& summary, bool replicate_rows) {
  const std::uint64_t master = master_seed(c, o);
  CsvWriter w(csv);
  run_header(w);
  summary << pad("problem", 28) << pad("schedule", 17) << pad("T", 8) << pad("mean", 14)
          << pad("ci99", 12) << pad("theorem_min", 14) << pad("ratio", 12) << "check\n";
  int status = kExitOk;

  for (std::size_t i = 0; i < c.problems.size(); ++i) {
    const std::uint64_t pseed = problem_seed(master, i);
    const Instance in = make_instance(c.problems[i], pseed);
    const double mu = in.oracle.mu(), L = in.oracle.L();
    for (std::size_t fi = 0; fi < c.algorithm.schedules.size(); ++fi) {
      const ScheduleFamily f = c.algorithm.schedules[fi];
      for (std::size_t ti = 0; ti < c.algorithm.horizons.size(); ++ti) {
        const std::size_t T = c.algorithm.horizons[ti];
        const std::string cell = in.spec->name + " / " + std::string(to_string(f)) +
                                 " / T=" + std::to_string(T);
        std::optional<StepWeightSchedule> schedule;
        try {
          schedule.emplace(make_schedule(f, c.algorithm, in, T));
        } catch (const InvalidArgument& e) {
          throw ConfigError("algorithm.schedules", 0, cell + ": " + e.what());
        }
        const std::uint64_t cseed = derive_seed(derive_seed(pseed, 100 + fi), ti);
        RunConfig cfg{T, *schedule, 0, false, false};
        const auto agg = run_campaign(in.oracle, in.x0, cfg, c.replicates, cseed, o.workers);

        std::optional<double> distance_gamma;
        if (f == ScheduleFamily::classic_constant) distance_gamma = schedule->gamma(0);
        const BoundReport b = theorem_bound(mu, L, in.spec->R, in.sigma2_assumed, T, distance_gamma);
        const Check chk = check_for(f, in, *schedule, b, T);

        auto row = [&](std::string_view kind, std::uint64_t seed, double fg, double dist,
                       double comp, double r) {
          w.field(kind)
              .field(static_cast<std::uint64_t>(in.oracle.dim()))
              .field(mu)
              .field(L)
              .field(in.sigma2_assumed)
              .field(to_string(f))
              .field(static_cast<std::uint64_t>(T))
              .field(seed)
              .field(fg)
              .field(dist)
              .field(comp)
              .field(b.theorem_min)
              .field(r);
          w.end_row();
        };
        if (replicate_rows) {
          for (const auto& rep : agg.replicates) {
            row("replicate", rep.seed, rep.f_gap_avg, rep.dist_sq_last, rep.composite,
                ratio(rep.composite, b.theorem_min));
          }
        }
        const double ci99 = agg.ci99_composite;
        row("aggregate", cseed, agg.mean_f_gap, agg.mean_dist_sq, agg.mean_composite,
            ratio(agg.mean_composite + ci99, b.theorem_min));

        std::string verdict = "info";
        if (!chk.name.empty()) {
          double mean = agg.mean_composite, se = agg.stderr_composite;
          if (chk.metric == Check::f_gap) {
            mean = agg.mean_f_gap;
            se = agg.stderr_f_gap;
          } else if (chk.metric == Check::dist_sq) {
            mean = agg.mean_dist_sq;
            se = agg.stderr_dist_sq;
          }
          const bool ok = within_bound(mean, se, chk.bound);
          verdict = chk.name + (ok ? " ok" : " VIOLATED");
          if (!ok) {
            status = kExitViolation;
            summary << "violation: " << cell << ": mean " << format_double(mean) << " > "
                    << chk.name << " " << format_double(chk.bound) << " + 3 x stderr "
                    << format_double(se) << "\n";
          }
        }
        summary << pad(in.spec->name, 28) << pad(std::string(to_string(f)), 17)
                << pad(std::to_string(T), 8) << pad(fixed(agg.mean_composite), 14)
                << pad(fixed(ci99, 3), 12) << pad(fixed(b.theorem_min), 14)
                << pad(fixed(ratio(agg.mean_composite + ci99, b.theorem_min), 4), 12) << verdict
                << "\n";
      }
    }
  }
  return status;
}

}  // namespace

int cmd_run(const ExperimentConfig& c, const CommandOptions& o, std::ostream& csv,
            std::ostream& summary) {
  return run_cells(c, o, csv, summary, c.write_replicates);
}

int cmd_sweep(const ExperimentConfig& c, const CommandOptions& o, std::ostream& csv,
              std::ostream& summary) {
  return run_cells(c, o, csv, summary, false);
}

int cmd_verify_recursion(const ExperimentConfig& c, const CommandOptions& o, std::ostream& csv,
                         std::ostream& summary) {
  const std::uint64_t master = master_seed(c, o);
  const auto blocks = c.recursion.value_or(default_recursion_blocks());
  std::vector<CellOutcome> all;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    std::vector<std::string> skipped;
    const auto cells = expand_grid(blocks[k].grid(), &skipped);
    for (const auto& s : skipped) summary << "skipped: " << s << "\n";
    auto out = run_recursion_campaign(cells, blocks[k].draws, derive_seed(master, k), o.workers);
    all.insert(all.end(), std::make_move_iterator(out.begin()), std::make_move_iterator(out.end()));
  }
  write_campaign_csv(all, csv);

  struct Tally {
    std::size_t cells = 0, draws = 0, violations = 0;
    double worst = std::numeric_limits<double>::infinity();
  };
  std::map<LemmaTag, Tally> tally;
  int status = kExitOk;
  for (const auto& o2 : all) {
    auto& t = tally[o2.cell.tag];
    t.cells += 1;
    t.draws += o2.draws;
    t.violations += o2.violations;
    const double scale = std::max(1.0, o2.worst.bound_value);
    t.worst = std::min(t.worst, o2.worst.margin / scale);
    if (o2.violations > 0 && lemma_is_gating(o2.cell.tag)) {
      status = kExitViolation;
      summary << "violation: " << to_string(o2.cell.tag) << " a=" << format_double(o2.cell.params.a())
              << " b=" << format_double(o2.cell.params.b())
              << " c=" << format_double(o2.cell.params.c())
              << " d=" << format_double(o2.cell.params.d()) << " r0=" << format_double(o2.cell.r0)
              << " T=" << o2.cell.T << " mode=" << to_string(o2.cell.mode)
              << " seed=" << o2.worst_seed << " margin=" << format_double(o2.worst.margin) << "\n";
    }
  }
  summary << pad("lemma", 22) << pad("cells", 8) << pad("draws", 12) << pad("violations", 12)
          << pad("worst margin/max(1,bound)", 27) << "gating\n";
  for (const auto& [tag, t] : tally) {
    summary << pad(std::string(to_string(tag)), 22) << pad(std::to_string(t.cells), 8)
            << pad(std::to_string(t.draws), 12) << pad(std::to_string(t.violations), 12)
            << pad(fixed(t.worst, 4), 27) << (lemma_is_gating(tag) ? "yes" : "no") << "\n";
  }
  return status;
}

int cmd_check_oracle(const ExperimentConfig& c, const CommandOptions& o, std::ostream& csv,
                     std::ostream& summary) {
  const std::uint64_t master = master_seed(c, o);
  std::vector<NamedOracle> instances;
  for (std::size_t i = 0; i < c.problems.size(); ++i) {
    instances.push_back({c.problems[i].name, build_oracle(c.problems[i], problem_seed(master, i))});
  }
  if (c.check_oracle.standard_instances) {
    for (auto& n : standard_instances(derive_seed(master, 0x57D))) instances.push_back(std::move(n));
  }

  const auto& k = c.check_oracle;
  struct Row {
    SmoothnessReport smooth;
    double convexity = 0.0;
    double f_gap = 0.0;
  };
  std::vector<Row> rows(instances.size() * k.points);
  parallel_for(rows.size(), o.workers, [&](std::size_t idx) {
    const auto& oracle = instances[idx / k.points].oracle;
    const std::uint64_t seed = derive_seed(derive_seed(master, 0xC4EC), idx);
    CounterRng rng(seed, 0);
    const double radius = k.radius * (1.0 - rng.uniform());
    const Vector x = point_at_distance(oracle, radius, derive_seed(seed, 1));
    CounterRng sampler(seed, 1);
    rows[idx] = {check_smoothness_assumption(oracle, x, k.samples, sampler),
                 check_mu_convexity(oracle, x), oracle.value(x) - oracle.f_star()};
  });

  CsvWriter w(csv);
  w.header({"problem", "kind", "point", "f_gap", "lhs_estimate", "rhs", "slack", "ci_halfwidth",
            "violated", "mu_convexity_margin"});
  int status = kExitOk;
  summary << pad("problem", 30) << pad("mu", 12) << pad("L", 12) << pad("sigma2", 12)
          << pad("flagged", 9) << "min convexity margin\n";
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& [name, oracle] = instances[i];
    std::size_t flagged = 0;
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < k.points; ++p) {
      const Row& r = rows[i * k.points + p];
      w.field(name)
          .field(to_string(oracle.kind()))
          .field(static_cast<std::uint64_t>(p))
          .field(r.f_gap)
          .field(r.smooth.lhs_estimate)
          .field(r.smooth.rhs)
          .field(r.smooth.slack)
          .field(r.smooth.ci_halfwidth)
          .field(r.smooth.violated ? "1" : "0")
          .field(r.convexity);
      w.end_row();
      flagged += r.smooth.violated;
      worst = std::min(worst, r.convexity);
      if (r.smooth.violated || r.convexity < -1e-10) status = kExitViolation;
    }
    summary << pad(name, 30) << pad(fixed(oracle.mu(), 4), 12) << pad(fixed(oracle.L(), 4), 12)
            << pad(fixed(oracle.sigma2(), 4), 12) << pad(std::to_string(flagged), 9)
            << fixed(worst, 3) << "\n";
  }
  return status;
}

void cmd_bound(const BoundArgs& a, std::ostream& out) {
  const BoundReport b = theorem_bound(a.mu, a.L, a.R, a.sigma2, a.T, a.gamma);
  auto line = [&](const std::string& name, const std::string& value) {
    out << pad(name, 26) << value << "\n";
  };
  auto num = [&](const std::string& name, double v) { line(name, format_double(v)); };

  num("theorem_branch_exp", b.branch_exp);
  num("theorem_branch_sub", b.branch_sub);
  num("theorem_min", b.theorem_min);
  num("distance_gamma", b.distance_gamma);
  num("distance_contraction_term", b.distance_contraction_term);
  num("distance_tail_term", b.distance_tail_term);
  num("distance_bound", b.distance_bound);
  num("large_horizon_bound", b.large_horizon_bound);

  // Recursion constants implied by the descent step: a = mu, b = 1,
  // c = sigma2, d = 2L, r0 = R^2.
  const double r0 = a.R * a.R;
  auto lemma = [&](const std::string& name, auto&& f) {
    try {
      num(name, f());
    } catch (const InvalidArgument& e) {
      line(name, std::string("n/a (") + e.what() + ")");
    }
  };
  const auto params = [&] { return RecursionParams(a.mu, 1.0, a.sigma2, 2.0 * a.L); };
  lemma("lemma_constant", [&] { return lemma_constant_bound(params(), r0, a.T); });
  lemma("lemma_two_phase", [&] { return lemma_two_phase_bound(params(), r0, a.T); });
  lemma("lemma_sublinear", [&] {
    return lemma_sublinear_bound(RecursionParams(0.0, 1.0, a.sigma2, 2.0 * a.L), r0, a.T);
  });
  lemma("lemma_unroll", [&] { return lemma_unroll_bound(params(), r0, a.T); });
  lemma("lemma_decreasing", [&] { return lemma_decreasing_bound(params(), r0, a.T); });
}

namespace {


int with_output(const std::optional<std::string>& path, std::ostream& out, std::ostream& err,
                const std::function<int(std::ostream&, std::ostream&)>& body) {
  if (!path) return body(out, err);
  std::ostringstream buffer;
  const int status = body(buffer, out);
  std::ofstream file(*path, std::ios::binary | std::ios::trunc);
  if (!file) throw ConfigError("output", 0, "cannot write '" + *path + "'");
  file << buffer.str();
  if (!file.flush()) throw ConfigError("output", 0, "cannot write '" + *path + "'");
  out << "wrote " << *path << "\n";
  return status;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"SGD convergence-bound experiments", "sgdbound"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "sgdbound 0.1.0");

  std::string config_path;
  CommandOptions opts;
  std::string out_path;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* cfg = sub->add_option("--config", config_path, "Experiment config (JSON)");
    if (config_required) cfg->required();
    cfg->check(CLI::ExistingFile);
    sub->add_option("--out", out_path, "CSV output path (overrides the config)");
    sub->add_option("--workers", opts.workers, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "Master seed (overrides the config)");
  };
  auto* run = app.add_subcommand("run", "Replicated SGD campaigns with per-replicate rows");
  add_common(run, true);
  auto* sweep = app.add_subcommand("sweep", "SGD campaigns, aggregate rows only");
  add_common(sweep, true);
  auto* verify = app.add_subcommand("verify-recursion", "Randomized lemma verification");
  add_common(verify, false);
  auto* check = app.add_subcommand("check-oracle", "Monte-Carlo assumption checks");
  add_common(check, false);

  BoundArgs bargs;
  double gamma = 0.0;
  auto* bound = app.add_subcommand("bound", "Print every bound for the given constants");
  bound->add_option("--mu", bargs.mu, "Strong convexity modulus")->required();
  bound->add_option("--L", bargs.L, "Smoothness constant")->required();
  bound->add_option("--R", bargs.R, "Initial distance ||x0 - x*||")->required();
  bound->add_option("--sigma2", bargs.sigma2, "Noise level")->required();
  bound->add_option("--T", bargs.T, "Horizon")->required();
  auto* gamma_opt = bound->add_option("--gamma", gamma, "Constant stepsize for the distance bound");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << (dynamic_cast<const CLI::CallForVersion*>(&e) ? std::string(e.what()) + "\n"
                                                            : app.help());
      return kExitOk;
    }
    err << "error: " << e.what() << "\n";
    CLI::App* active = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << active->help();
    return kExitUsage;
  }

  auto seed_opt = [&](CLI::App* sub) {
    if (sub->count("--seed")) opts.seed = seed;
    if (sub->count("--out")) opts.out_path = out_path;
  };

  try {
    if (bound->parsed()) {
      if (gamma_opt->count()) bargs.gamma = gamma;
      cmd_bound(bargs, out);
      return kExitOk;
    }
    CLI::App* sub = app.get_subcommands().front();
    seed_opt(sub);
    const std::string mode = sub->get_name();
    ExperimentConfig config;
    if (!config_path.empty()) {
      config = load_config(config_path, mode);
    } else {
      config = parse_config("{}", mode);
    }
    const auto path = opts.out_path ? opts.out_path : config.output;
    auto dispatch = [&](std::ostream& csv, std::ostream& summary) {
      if (mode == "run") return cmd_run(config, opts, csv, summary);
      if (mode == "sweep") return cmd_sweep(config, opts, csv, summary);
      if (mode == "verify-recursion") return cmd_verify_recursion(config, opts, csv, summary);
      return cmd_check_oracle(config, opts, csv, summary);
    };
    // Without an output file the CSV goes to stdout and the summary to stderr.
    if (path) return with_output(path, out, err, dispatch);
    return dispatch(out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    err << "invalid argument: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericFailure& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitNumeric;
  }
}

}  // namespace sgdbound::cli
