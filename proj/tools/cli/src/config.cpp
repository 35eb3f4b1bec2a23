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

#include "sgdbound/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sgdbound/rng.hpp"

namespace sgdbound::cli {

using Json = nlohmann::ordered_json;

ConfigError::ConfigError(std::string field, std::size_t line, const std::string& message)
    : Error((line ? "line " + std::to_string(line) + ": " : std::string()) +
            (field.empty() ? std::string() : "field '" + field + "': ") + message),
      field_(std::move(field)),
      line_(line) {}

namespace {

std::size_t line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + offset, '\n'));
}

// "/problems/0/spectrum" -> "problems[0].spectrum"
std::string display(const std::string& pointer) {
  std::string out;
  std::size_t i = 1;
  while (i <= pointer.size() && !pointer.empty()) {
    const std::size_t j = std::min(pointer.find('/', i), pointer.size());
    const std::string part = pointer.substr(i, j - i);
    if (!part.empty() && std::all_of(part.begin(), part.end(), ::isdigit)) {
      out += "[" + part + "]";
    } else {
      if (!out.empty()) out += ".";
      out += part;
    }
    i = j + 1;
  }
  return out;
}

// Lines of every object key, keyed by JSON pointer. Keys appear in the text
// in the same pre-order as an ordered_json traversal, so the k-th textual
// occurrence of "name": belongs to the k-th traversed key called name.
class Document {
 public:
  Document(std::string_view text, const Json& root) : text_(text) { index(root, ""); }

  std::size_t line(const std::string& pointer) const {
    for (std::string p = pointer; !p.empty(); p = p.substr(0, p.rfind('/'))) {
      const auto it = lines_.find(p);
      if (it != lines_.end()) return it->second;
    }
    return 0;
  }

  [[noreturn]] void fail(const std::string& pointer, const std::string& message) const {
    throw ConfigError(display(pointer), line(pointer), message);
  }

 private:
  void index(const Json& node, const std::string& pointer) {
    if (node.is_object()) {
      for (const auto& [key, value] : node.items()) {
        const std::size_t k = seen_[key]++;
        lines_[pointer + "/" + key] = key_line(key, k);
        index(value, pointer + "/" + key);
      }
    } else if (node.is_array()) {
      for (std::size_t i = 0; i < node.size(); ++i) {
        const std::string child = pointer + "/" + std::to_string(i);
        lines_[child] = line(pointer);
        index(node[i], child);
      }
    }
  }

  std::size_t key_line(const std::string& key, std::size_t ordinal) const {
    const std::regex pattern("\"" + std::regex_replace(key, std::regex(R"([.^$|()\[\]{}*+?\\])"),
                                                       R"(\$&)") +
                             "\"\\s*:");
    std::size_t k = 0;
    for (auto it = std::cregex_iterator(text_.data(), text_.data() + text_.size(), pattern);
         it != std::cregex_iterator(); ++it, ++k) {
      if (k == ordinal) return line_of_offset(text_, static_cast<std::size_t>(it->position()));
    }
    return 0;
  }

  std::string_view text_;
  std::map<std::string, std::size_t> lines_;
  std::map<std::string, std::size_t> seen_;
};

class Reader {
 public:
  Reader(const Document& doc, const Json& node, std::string pointer)
      : doc_(doc), node_(node), pointer_(std::move(pointer)) {
    if (!node_.is_object()) doc_.fail(pointer_, "expected an object");
  }

  bool has(const char* key) const { return node_.contains(key); }
  std::string at(const char* key) const { return pointer_ + "/" + key; }
  [[noreturn]] void fail(const char* key, const std::string& msg) const { doc_.fail(at(key), msg); }

  void allow(std::initializer_list<const char*> keys) const {
    const std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [key, value] : node_.items()) {
      if (!ok.count(key)) doc_.fail(pointer_ + "/" + key, "unknown field");
    }
  }

  const Json& raw(const char* key) const {
    if (!has(key)) doc_.fail(at(key), "required field is missing");
    return node_.at(key);
  }

  Reader object(const char* key) const { return Reader(doc_, raw(key), at(key)); }

  double number(const char* key) const { return as_number(raw(key), at(key)); }
  double number(const char* key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }

  std::uint64_t unsigned_int(const char* key) const { return as_unsigned(raw(key), at(key)); }
  std::uint64_t unsigned_int(const char* key, std::uint64_t fallback) const {
    return has(key) ? unsigned_int(key) : fallback;
  }

  bool boolean(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    if (!node_.at(key).is_boolean()) doc_.fail(at(key), "expected true or false");
    return node_.at(key).get<bool>();
  }

  std::string string(const char* key) const {
    if (!raw(key).is_string()) doc_.fail(at(key), "expected a string");
    return node_.at(key).get<std::string>();
  }

  template <typename F>
  auto list(const char* key, F&& element) const {
    const Json& arr = raw(key);
    if (!arr.is_array()) doc_.fail(at(key), "expected a list");
    std::vector<decltype(element(arr, std::string()))> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      out.push_back(element(arr[i], at(key) + "/" + std::to_string(i)));
    }
    return out;
  }

  std::vector<double> numbers(const char* key) const {
    return list(key, [&](const Json& v, const std::string& p) { return as_number(v, p); });
  }
  std::vector<std::size_t> counts(const char* key) const {
    return list(key, [&](const Json& v, const std::string& p) {
      return static_cast<std::size_t>(as_unsigned(v, p));
    });
  }

  template <typename Parse>
  auto names(const char* key, Parse&& parse, const char* what) const {
    return list(key, [&](const Json& v, const std::string& p) {
      if (!v.is_string()) doc_.fail(p, "expected a string");
      const auto parsed = parse(v.template get<std::string>());
      if (!parsed) doc_.fail(p, "unknown " + std::string(what) + " '" + v.template get<std::string>() + "'");
      return *parsed;
    });
  }

  double as_number(const Json& v, const std::string& p) const {
    if (!v.is_number()) doc_.fail(p, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) doc_.fail(p, "expected a finite number");
    return x;
  }

  std::uint64_t as_unsigned(const Json& v, const std::string& p) const {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
    doc_.fail(p, "expected a non-negative integer");
  }

  const Document& doc() const { return doc_; }
  const std::string& pointer() const { return pointer_; }

 private:
  const Document& doc_;
  const Json& node_;
  std::string pointer_;
};

std::optional<Design> parse_design(std::string_view name) {
  for (Design d : {Design::gaussian, Design::orthogonal, Design::low_rank}) {
    if (to_string(d) == name) return d;
  }
  return std::nullopt;
}

std::optional<DecreasingWeights> parse_weights(std::string_view name) {
  if (name == "linear") return DecreasingWeights::linear;
  if (name == "quadratic") return DecreasingWeights::quadratic;
  return std::nullopt;
}

ProblemSpec read_problem(const Reader& r, std::size_t index) {
  ProblemSpec p;
  const std::string kind = r.string("kind");
  const auto parsed = parse_problem_kind(kind);
  if (!parsed) r.fail("kind", "unknown problem kind '" + kind + "'");
  p.kind = *parsed;
  p.name = r.has("name") ? r.string("name") : kind + "_" + std::to_string(index);
  p.R = r.number("R", 1.0);
  if (p.R < 0.0) r.fail("R", "must be >= 0");
  if (r.has("assumed_sigma2")) {
    p.assumed_sigma2 = r.number("assumed_sigma2");
    if (*p.assumed_sigma2 < 0.0) r.fail("assumed_sigma2", "must be >= 0");
  }

  auto positive_count = [&](const char* key) {
    const auto v = static_cast<std::size_t>(r.unsigned_int(key));
    if (v == 0) r.fail(key, "must be >= 1");
    return v;
  };

  switch (p.kind) {
    case ProblemKind::noisy_quadratic:
      r.allow({"kind", "name", "R", "assumed_sigma2", "spectrum", "sigma2"});
      p.spectrum = r.numbers("spectrum");
      if (p.spectrum.empty()) r.fail("spectrum", "needs at least one eigenvalue");
      for (double v : p.spectrum) {
        if (v < 0.0) r.fail("spectrum", "eigenvalues must be >= 0");
      }
      if (*std::max_element(p.spectrum.begin(), p.spectrum.end()) <= 0.0) {
        r.fail("spectrum", "needs a positive eigenvalue");
      }
      p.sigma2 = r.number("sigma2", 0.0);
      if (p.sigma2 < 0.0) r.fail("sigma2", "must be >= 0");
      break;
    case ProblemKind::least_squares:
    case ProblemKind::logistic: {
      if (p.kind == ProblemKind::least_squares) {
        r.allow({"kind", "name", "R", "assumed_sigma2", "rows", "dim", "design", "rank",
                 "noise_std", "interpolating"});
        p.noise_std = r.number("noise_std", 0.0);
        if (p.noise_std < 0.0) r.fail("noise_std", "must be >= 0");
        p.interpolating = r.boolean("interpolating", false);
        if (p.interpolating && p.noise_std > 0.0) {
          r.fail("noise_std", "interpolating instances have no target noise");
        }
      } else {
        r.allow({"kind", "name", "R", "assumed_sigma2", "rows", "dim", "design", "rank", "l2"});
        p.l2 = r.number("l2");
        if (p.l2 <= 0.0) r.fail("l2", "must be > 0");
      }
      p.rows = positive_count("rows");
      p.dim = positive_count("dim");
      if (r.has("design")) {
        const auto d = parse_design(r.string("design"));
        if (!d) r.fail("design", "expected gaussian, orthogonal or low_rank");
        p.design = *d;
      }
      if (p.design == Design::low_rank) {
        p.rank = positive_count("rank");
        if (p.rank > p.dim) r.fail("rank", "must not exceed dim");
      } else if (r.has("rank")) {
        r.fail("rank", "only applies to the low_rank design");
      }
      break;
    }
  }
  return p;
}

AlgorithmSpec read_algorithm(const Reader& r, bool need_horizons) {
  r.allow({"schedules", "schedule", "horizons", "gamma", "decreasing_weights"});
  AlgorithmSpec a;
  if (r.has("schedules") && r.has("schedule")) r.fail("schedule", "give schedule or schedules");
  if (r.has("schedule")) {
    const std::string s = r.string("schedule");
    const auto f = parse_schedule_family(s);
    if (!f) r.fail("schedule", "unknown schedule family '" + s + "'");
    a.schedules = {*f};
  } else if (r.has("schedules")) {
    a.schedules = r.names("schedules", parse_schedule_family, "schedule family");
    if (a.schedules.empty()) r.fail("schedules", "needs at least one family");
  }
  if (r.has("horizons")) a.horizons = r.counts("horizons");
  if (need_horizons && a.horizons.empty()) r.fail("horizons", "needs at least one horizon");
  for (std::size_t T : a.horizons) {
    if (T == 0) r.fail("horizons", "horizons must be >= 1");
  }
  if (r.has("gamma")) {
    a.gamma = r.number("gamma");
    if (*a.gamma <= 0.0) r.fail("gamma", "must be > 0");
  }
  if (std::count(a.schedules.begin(), a.schedules.end(), ScheduleFamily::user_constant) &&
      !a.gamma) {
    r.fail("gamma", "user_constant schedules need a stepsize");
  }
  if (r.has("decreasing_weights")) {
    const auto w = parse_weights(r.string("decreasing_weights"));
    if (!w) r.fail("decreasing_weights", "expected linear or quadratic");
    a.decreasing_weights = *w;
  }
  return a;
}

RecursionBlock read_block(const Reader& r) {
  r.allow({"lemmas", "a", "b", "c", "d", "horizons", "r0", "modes", "draws"});
  RecursionBlock b;
  b.lemmas = r.names("lemmas", parse_lemma_tag, "lemma tag");
  b.a = r.numbers("a");
  b.b = r.numbers("b");
  b.c = r.numbers("c");
  b.d = r.list("d", [&](const Json& v, const std::string& p) {
    if (v.is_number()) return DRule{0.0, r.as_number(v, p)};
    Reader d(r.doc(), v, p);
    d.allow({"scale", "offset"});
    return DRule{d.number("scale", 0.0), d.number("offset", 0.0)};
  });
  b.horizons = r.counts("horizons");
  if (r.has("r0")) b.r0 = r.numbers("r0");
  if (r.has("modes")) b.modes = r.names("modes", parse_sequence_mode, "sequence mode");
  b.draws = static_cast<std::size_t>(r.unsigned_int("draws", b.draws));
  if (b.draws == 0) r.fail("draws", "must be >= 1");
  const std::pair<const char*, std::size_t> sizes[] = {
      {"lemmas", b.lemmas.size()}, {"a", b.a.size()}, {"b", b.b.size()}, {"c", b.c.size()},
      {"d", b.d.size()}, {"horizons", b.horizons.size()}, {"r0", b.r0.size()},
      {"modes", b.modes.size()}};
  for (const auto& [key, n] : sizes) {
    if (n == 0) r.fail(key, "must not be empty");
  }
  for (double x : b.r0) {
    if (x < 0.0) r.fail("r0", "must be >= 0");
  }
  return b;
}

Json number_list(const std::vector<double>& v) { return Json(v); }

}  // namespace

std::string_view to_string(Design design) {
  switch (design) {
    case Design::gaussian: return "gaussian";
    case Design::orthogonal: return "orthogonal";
    case Design::low_rank: return "low_rank";
  }
  return "gaussian";
}

RecursionGrid RecursionBlock::grid() const {
  RecursionGrid g;
  g.lemmas = lemmas;
  g.a = a;
  g.b = b;
  g.c = c;
  g.d = d;
  g.horizons = horizons;
  g.r0 = r0;
  g.modes = modes;
  g.draws = draws;
  return g;
}

ExperimentConfig parse_config(std::string_view text, std::string_view mode) {
  Json root;
  try {
    root = Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    const std::size_t line = line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ConfigError("", line, std::string("malformed JSON: ") + e.what());
  }
  const Document doc(text, root);
  const Reader r(doc, root, "");
  r.allow({"mode", "master_seed", "replicates", "output", "write_replicates", "problem",
           "problems", "algorithm", "recursion", "check_oracle"});

  ExperimentConfig c;
  if (r.has("mode")) {
    c.mode = r.string("mode");
    if (*c.mode != mode) {
      r.fail("mode", "config is for '" + *c.mode + "' but the command is '" + std::string(mode) + "'");
    }
  }
  c.master_seed = r.unsigned_int("master_seed", 0);
  c.replicates = static_cast<std::size_t>(r.unsigned_int("replicates", 1));
  if (c.replicates == 0) r.fail("replicates", "must be >= 1");
  if (r.has("output")) c.output = r.string("output");
  c.write_replicates = r.boolean("write_replicates", true);

  if (r.has("problem") && r.has("problems")) r.fail("problem", "give problem or problems");
  if (r.has("problem")) {
    c.problems.push_back(read_problem(r.object("problem"), 0));
  } else if (r.has("problems")) {
    const Json& arr = r.raw("problems");
    if (!arr.is_array()) r.fail("problems", "expected a list");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      c.problems.push_back(read_problem(Reader(doc, arr[i], r.at("problems") + "/" + std::to_string(i)), i));
    }
  }

  const bool runs = mode == "run" || mode == "sweep";
  if (runs && c.problems.empty()) r.fail("problems", "needs at least one problem");
  if (r.has("algorithm")) {
    c.algorithm = read_algorithm(r.object("algorithm"), runs);
  } else if (runs) {
    r.fail("algorithm", "required field is missing");
  }

  if (r.has("recursion")) {
    const Json& rec = r.raw("recursion");
    std::vector<RecursionBlock> blocks;
    if (rec.is_array()) {
      for (std::size_t i = 0; i < rec.size(); ++i) {
        blocks.push_back(read_block(Reader(doc, rec[i], r.at("recursion") + "/" + std::to_string(i))));
      }
    } else {
      blocks.push_back(read_block(r.object("recursion")));
    }
    if (blocks.empty()) r.fail("recursion", "needs at least one grid");
    c.recursion = std::move(blocks);
  }

  if (r.has("check_oracle")) {
    const Reader k = r.object("check_oracle");
    k.allow({"points", "samples", "radius", "standard_instances"});
    c.check_oracle.points = static_cast<std::size_t>(k.unsigned_int("points", 20));
    c.check_oracle.samples = static_cast<std::size_t>(k.unsigned_int("samples", 2000));
    c.check_oracle.radius = k.number("radius", 1.0);
    c.check_oracle.standard_instances = k.boolean("standard_instances", false);
    if (c.check_oracle.points == 0) k.fail("points", "must be >= 1");
    if (c.check_oracle.samples < 1000) k.fail("samples", "must be >= 1000");
    if (c.check_oracle.radius <= 0.0) k.fail("radius", "must be > 0");
  }
  if (mode == "check-oracle" && c.problems.empty()) c.check_oracle.standard_instances = true;
  return c;
}

ExperimentConfig load_config(const std::string& path, std::string_view mode) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", 0, "cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), mode);
}

std::string to_json(const ExperimentConfig& c) {
  Json root = Json::object();
  if (c.mode) root["mode"] = *c.mode;
  root["master_seed"] = c.master_seed;
  root["replicates"] = c.replicates;
  if (c.output) root["output"] = *c.output;
  root["write_replicates"] = c.write_replicates;

  Json problems = Json::array();
  for (const auto& p : c.problems) {
    Json j = Json::object();
    j["kind"] = std::string(to_string(p.kind));
    j["name"] = p.name;
    j["R"] = p.R;
    if (p.assumed_sigma2) j["assumed_sigma2"] = *p.assumed_sigma2;
    if (p.kind == ProblemKind::noisy_quadratic) {
      j["spectrum"] = number_list(p.spectrum);
      j["sigma2"] = p.sigma2;
    } else {
      j["rows"] = p.rows;
      j["dim"] = p.dim;
      j["design"] = std::string(to_string(p.design));
      if (p.design == Design::low_rank) j["rank"] = p.rank;
      if (p.kind == ProblemKind::least_squares) {
        j["noise_std"] = p.noise_std;
        j["interpolating"] = p.interpolating;
      } else {
        j["l2"] = p.l2;
      }
    }
    problems.push_back(std::move(j));
  }
  if (!c.problems.empty()) root["problems"] = std::move(problems);

  Json alg = Json::object();
  Json schedules = Json::array();
  for (auto f : c.algorithm.schedules) schedules.push_back(std::string(to_string(f)));
  alg["schedules"] = std::move(schedules);
  alg["horizons"] = c.algorithm.horizons;
  if (c.algorithm.gamma) alg["gamma"] = *c.algorithm.gamma;
  alg["decreasing_weights"] =
      c.algorithm.decreasing_weights == DecreasingWeights::linear ? "linear" : "quadratic";
  root["algorithm"] = std::move(alg);

  if (c.recursion) {
    Json blocks = Json::array();
    for (const auto& b : *c.recursion) {
      Json j = Json::object();
      Json lemmas = Json::array();
      for (auto t : b.lemmas) lemmas.push_back(std::string(to_string(t)));
      j["lemmas"] = std::move(lemmas);
      j["a"] = number_list(b.a);
      j["b"] = number_list(b.b);
      j["c"] = number_list(b.c);
      Json d = Json::array();
      for (const auto& rule : b.d) d.push_back(Json{{"scale", rule.scale}, {"offset", rule.offset}});
      j["d"] = std::move(d);
      j["horizons"] = b.horizons;
      j["r0"] = number_list(b.r0);
      Json modes = Json::array();
      for (auto m : b.modes) modes.push_back(std::string(to_string(m)));
      j["modes"] = std::move(modes);
      j["draws"] = b.draws;
      blocks.push_back(std::move(j));
    }
    root["recursion"] = std::move(blocks);
  }

  root["check_oracle"] = Json{{"points", c.check_oracle.points},
                              {"samples", c.check_oracle.samples},
                              {"radius", c.check_oracle.radius},
                              {"standard_instances", c.check_oracle.standard_instances}};
  return root.dump(2) + "\n";
}

std::vector<RecursionBlock> default_recursion_blocks() {
  RecursionBlock positive;
  positive.lemmas = {LemmaTag::two_phase, LemmaTag::unroll};
  positive.a = {0.1, 1.0};
  positive.b = {0.5, 1.0};
  positive.c = {0.0, 1.0, 100.0};
  positive.d = {{2.0, 0.0}, {20.0, 0.0}};
  positive.horizons = {1, 2, 3, 10, 100, 1000};

  RecursionBlock flat;
  flat.lemmas = {LemmaTag::sublinear};
  flat.a = {0.0};
  flat.b = {0.5, 1.0};
  flat.c = {0.0, 1.0, 100.0};
  flat.d = {{0.0, 0.5}, {0.0, 2.0}, {0.0, 20.0}};
  flat.horizons = {0, 1, 2, 3, 10, 100, 1000};
  flat.r0 = {0.0, 0.1, 1.0, 100.0};

  RecursionBlock informational;
  informational.lemmas = {LemmaTag::constant_log, LemmaTag::decreasing_linear,
                          LemmaTag::decreasing_quadratic};
  informational.a = positive.a;
  informational.b = positive.b;
  informational.c = positive.c;
  informational.d = positive.d;
  informational.horizons = {1, 10, 100, 1000};
  informational.draws = 1000;
  return {positive, flat, informational};
}

ProblemOracle build_oracle(const ProblemSpec& spec, std::uint64_t seed) {
  auto design = [&]() -> Matrix {
    const std::uint64_t s = derive_seed(seed, 1);
    switch (spec.design) {
      case Design::gaussian: return gaussian_design(spec.rows, spec.dim, s);
      case Design::orthogonal: return orthogonal_design(spec.rows, spec.dim, s);
      case Design::low_rank: return low_rank_design(spec.rows, spec.dim, spec.rank, s);
    }
    return {};
  };
  switch (spec.kind) {
    case ProblemKind::noisy_quadratic: {
      std::vector<double> eig = spec.spectrum;
      std::sort(eig.begin(), eig.end());
      return make_noisy_quadratic(eig, Vector::Zero(static_cast<Eigen::Index>(eig.size())),
                                  spec.sigma2, derive_seed(seed, 3));
    }
    case ProblemKind::least_squares: {
      const Matrix A = design();
      const Vector b =
          spec.interpolating ? Vector() : planted_targets(A, spec.noise_std, derive_seed(seed, 2));
      return make_finite_sum_least_squares(A, b, spec.interpolating, derive_seed(seed, 3));
    }
    case ProblemKind::logistic: {
      const Matrix A = design();
      return make_logistic_regression(A, planted_labels(A, derive_seed(seed, 2)), spec.l2,
                                      derive_seed(seed, 3));
    }
  }
  throw InvalidArgument("unknown problem kind");
}

}  // namespace sgdbound::cli
