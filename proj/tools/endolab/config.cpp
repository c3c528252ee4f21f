#include "endolab/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <Eigen/LU>

#include <endolab/presets.hpp>

#include "endolab/locate.hpp"

namespace endolab::cli {
namespace {

using nlohmann::json;

// Reads the keys of one object and rejects whatever was not asked for.
class Section {
 public:
  Section(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_, "expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }
  std::string at(const std::string& key) const { return where_ + "/" + key; }
  const json& raw(const std::string& key) const { return j_.at(key); }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number() || !std::isfinite(v.get<double>())) {
      throw ConfigError(at(key), "expected a finite number");
    }
    return v.get<double>();
  }
  long long integer(const std::string& key, long long fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (v.is_number_integer()) return v.get<long long>();
    if (v.is_number_float() && v.get<double>() == std::round(v.get<double>())) {
      return static_cast<long long>(v.get<double>());
    }
    throw ConfigError(at(key), "expected an integer");
  }
  int bounded(const std::string& key, int fallback, int lo, int hi) {
    const long long v = integer(key, fallback);
    if (v < lo || v > hi) {
      throw ConfigError(at(key), "must lie in [" + std::to_string(lo) + ", " +
                                     std::to_string(hi) + "]");
    }
    return static_cast<int>(v);
  }
  double positive(const std::string& key, double fallback) {
    const double v = number(key, fallback);
    if (v <= 0.0) throw ConfigError(at(key), "must be positive");
    return v;
  }
  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    if (!raw(key).is_boolean()) throw ConfigError(at(key), "expected true or false");
    return raw(key).get<bool>();
  }
  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    if (!raw(key).is_string()) throw ConfigError(at(key), "expected a string");
    return raw(key).get<std::string>();
  }
  std::vector<int> int_list(const std::string& key, int lo, int hi) {
    std::vector<int> out;
    if (!has(key)) return out;
    const json& v = raw(key);
    if (!v.is_array() || v.empty()) throw ConfigError(at(key), "expected a nonempty array");
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string w = at(key) + "/" + std::to_string(i);
      if (!v[i].is_number_integer()) throw ConfigError(w, "expected an integer");
      const long long x = v[i].get<long long>();
      if (x < lo || x > hi) {
        throw ConfigError(w, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) +
                                 "]");
      }
      out.push_back(static_cast<int>(x));
    }
    return out;
  }
  std::optional<TorusPoint> point(const std::string& key, int dim) {
    if (!has(key)) return std::nullopt;
    return point_from_json(raw(key), at(key), dim);
  }
  std::optional<BranchCode> code(const std::string& key, int degree) {
    if (!has(key)) return std::nullopt;
    if (!raw(key).is_string()) throw ConfigError(at(key), "expected a digit string");
    BranchCode c;
    try {
      c = BranchCode::parse(raw(key).get<std::string>());
    } catch (const Error& e) {
      throw ConfigError(at(key), e.what());
    }
    for (int letter : c.word) {
      if (letter >= degree) {
        throw ConfigError(at(key), "letter " + std::to_string(letter) + " >= degree " +
                                       std::to_string(degree));
      }
    }
    return c;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError(at(key), "unknown key '" + key + "'");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

DirectionSpec direction(const json& j, const std::string& where, int dim, int degree) {
  Section s(j, where);
  DirectionSpec d;
  if (s.has("vectors")) {
    const json& v = s.raw("vectors");
    if (!v.is_array() || v.empty() || static_cast<int>(v.size()) >= dim) {
      throw ConfigError(s.at("vectors"), "expected 1 to n-1 spanning vectors");
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string w = s.at("vectors") + "/" + std::to_string(i);
      if (!v[i].is_array() || static_cast<int>(v[i].size()) != dim) {
        throw ConfigError(w, "expected " + std::to_string(dim) + " numbers");
      }
      Vec col(dim);
      for (int k = 0; k < dim; ++k) {
        if (!v[i][static_cast<std::size_t>(k)].is_number()) {
          throw ConfigError(w + "/" + std::to_string(k), "expected a number");
        }
        col(k) = v[i][static_cast<std::size_t>(k)].get<double>();
      }
      d.vectors.push_back(col);
    }
  }
  d.bundle = s.string("bundle", "");
  d.code = s.code("code", degree);
  s.finish();
  if (d.vectors.empty() == d.bundle.empty()) {
    throw ConfigError(where, "give exactly one of 'vectors' or 'bundle'");
  }
  static const std::set<std::string> bundles = {"s", "c", "u", "cs", "cu"};
  if (!d.bundle.empty() && !bundles.count(d.bundle)) {
    throw ConfigError(s.at("bundle"), "bundle must be one of s, c, u, cs, cu");
  }
  if (!d.vectors.empty() && d.code) {
    throw ConfigError(s.at("code"), "a branch code only applies to a bundle direction");
  }
  return d;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::vector<std::string> kinds() {
  return {"splitting", "angles", "multiplicity", "perturb", "verify-cones", "constants",
          "orbit-metric"};
}

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig c;
  c.document = j;
  Section top(j, "");

  if (!top.has("version")) throw ConfigError("", "missing required key 'version'");
  c.version = static_cast<int>(top.integer("version", 0));
  if (c.version != kSchemaVersion) {
    throw ConfigError("/version", "unsupported schema version " + std::to_string(c.version) +
                                      " (this build reads version " +
                                      std::to_string(kSchemaVersion) + ")");
  }
  c.kind = top.string("kind", "");
  if (!c.kind.empty()) {
    const auto all = kinds();
    if (std::find(all.begin(), all.end(), c.kind) == all.end()) {
      throw ConfigError("/kind", "unknown experiment kind '" + c.kind + "'");
    }
  }
  const long long seed = top.integer("seed", 1);
  if (seed < 0) throw ConfigError("/seed", "seed must be nonnegative");
  c.seed = static_cast<std::uint64_t>(seed);

  const bool has_map = top.has("map");
  const bool has_preset = top.has("preset");
  if (has_map == has_preset) throw ConfigError("", "give exactly one of 'map' or 'preset'");
  if (has_preset) {
    c.preset = top.string("preset", "");
    const auto names = preset_names();
    if (std::find(names.begin(), names.end(), c.preset) == names.end()) {
      throw ConfigError("/preset", "unknown preset '" + c.preset + "'");
    }
    c.map = preset_map(c.preset);
  } else {
    c.map = map_spec_from_json(top.raw("map"), "/map");
    try {
      (void)build_map(c.map);
    } catch (const PreconditionError& e) {
      throw ConfigError("/map", e.what());
    }
  }
  const int n = static_cast<int>(c.map.matrix.rows());
  const int degree = c.map.cocycle_model
                         ? 1
                         : static_cast<int>(std::llround(std::abs(c.map.matrix.determinant())));

  if (top.has("splitting")) {
    Section s(top.raw("splitting"), "/splitting");
    c.splitting.forward_depth = s.bounded("forward_depth", 40, 15, 400);
    c.splitting.backward_depth = s.bounded("backward_depth", 40, 15, 400);
    c.splitting.drift_window = s.bounded("drift_window", 5, 1, 9);
    c.splitting.retry_residual = s.positive("retry_residual", 1e-3);
    c.splitting.max_retries = s.bounded("max_retries", 3, 0, 16);
    c.splitting_run.point = s.point("point", n);
    c.splitting_run.code = s.code("code", degree);
    c.splitting_run.tolerance = s.positive("tolerance", 1e-6);
    c.splitting_run.sweep = s.int_list("sweep", 15, 400);
    s.finish();
  }
  c.splitting.seed = c.seed ^ 0x5eedf00dULL;
  if (c.splitting_run.code) c.splitting.backward_depth = c.splitting_run.code->depth();

  if (top.has("angles")) {
    Section s(top.raw("angles"), "/angles");
    c.angles.point = s.point("point", n);
    if (s.has("e1")) c.angles.e1 = direction(s.raw("e1"), s.at("e1"), n, degree);
    if (s.has("e2")) c.angles.e2 = direction(s.raw("e2"), s.at("e2"), n, degree);
    c.angles.options.n_max = s.bounded("n_max", 60, 5, 1000);
    c.angles.options.fit_floor = s.positive("fit_floor", 1e-9);
    c.angles.options.fit_ceiling = s.positive("fit_ceiling", 1e-3);
    c.angles.options.confine_center = s.boolean("confine_center", true);
    c.angles.constant_samples = s.bounded("constant_samples", 64, 1, 4096);
    s.finish();
    if (c.angles.e1.has_value() != c.angles.e2.has_value()) {
      throw ConfigError("/angles", "give both 'e1' and 'e2' or neither");
    }
    if (c.angles.options.fit_floor >= c.angles.options.fit_ceiling) {
      throw ConfigError("/angles/fit_floor", "fit_floor must be below fit_ceiling");
    }
  }

  if (top.has("multiplicity")) {
    Section s(top.raw("multiplicity"), "/multiplicity");
    c.multiplicity.point = s.point("point", n);
    const std::string sigma = s.string("sigma", "cu");
    try {
      c.multiplicity.sigma = parse_sigma(sigma);
    } catch (const Error&) {
      throw ConfigError(s.at("sigma"), "sigma must be c, u or cu");
    }
    c.multiplicity.depth = s.bounded("depth", 40, 10, 400);
    c.multiplicity.depths = s.int_list("depths", 10, 400);
    c.multiplicity.budget = static_cast<std::size_t>(s.bounded("budget", 64, 1, 100000));
    c.multiplicity.threshold = s.positive("threshold", 1e-3);
    c.multiplicity.witnesses = s.boolean("witnesses", true);
    c.multiplicity.iterates = s.bounded("iterates", 3, 0, 16);
    s.finish();
    if (c.multiplicity.budget < static_cast<std::size_t>(degree)) {
      throw ConfigError("/multiplicity/budget", "budget must be at least the degree " +
                                                    std::to_string(degree));
    }
  }

  if (top.has("perturb")) {
    Section s(top.raw("perturb"), "/perturb");
    c.perturb.theta = s.number("theta", 0.2);
    c.perturb.depth = s.bounded("depth", 40, 10, 400);
    c.perturb.certify = s.boolean("certify", true);
    c.perturb.grid = s.bounded("grid", 16, 8, 256);
    c.perturb.beta = s.positive("beta", 0.4);
    c.perturb.min_displacement = s.number("min_displacement", 0.1);
    c.perturb.triple_tolerance = s.positive("triple_tolerance", 1e-3);
    c.perturb.max_attempts = s.bounded("max_attempts", 100000, 1, 10000000);
    s.finish();
    if (c.perturb.beta >= 1.0) throw ConfigError("/perturb/beta", "beta must lie in (0, 1)");
  }

  if (top.has("verify-cones")) {
    Section s(top.raw("verify-cones"), "/verify-cones");
    c.cones.beta = s.positive("beta", 0.4);
    c.cones.grid = s.bounded("grid", 32, 8, 256);
    c.cones.samples = s.bounded("samples", 64, 4, 4096);
    try {
      c.cones.source = parse_reference_source(s.string("source", "linear"));
    } catch (const Error&) {
      throw ConfigError(s.at("source"), "source must be 'linear' or 'computed'");
    }
    try {
      c.cones.metric = parse_cone_metric(s.string("metric", "adapted"));
    } catch (const Error&) {
      throw ConfigError(s.at("metric"), "metric must be 'adapted' or 'flat'");
    }
    s.finish();
    if (c.cones.beta >= 1.0) throw ConfigError("/verify-cones/beta", "beta must lie in (0, 1)");
  }

  if (top.has("constants")) {
    Section s(top.raw("constants"), "/constants");
    c.constants.samples = s.bounded("samples", 64, 1, 4096);
    c.constants.depth = s.bounded("depth", 20, 2, 200);
    c.constants.slack = s.number("slack", 1e-6);
    c.constants.adapted = s.boolean("adapted", true);
    c.constants.max_horizon = s.bounded("max_horizon", 64, 1, 1000);
    c.constants.include_design = s.boolean("include_design", true);
    s.finish();
    if (c.constants.slack < 0.0) throw ConfigError("/constants/slack", "slack must be >= 0");
  }

  if (top.has("orbit-metric")) {
    Section s(top.raw("orbit-metric"), "/orbit-metric");
    c.orbit_metric.depth = s.bounded("depth", 10, 1, 200);
    c.orbit_metric.orbits = s.bounded("orbits", 8, 2, 1000);
    s.finish();
  }

  top.finish();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", path + ": cannot open config file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", path + ":" + std::to_string(line_at(text, e.byte > 0 ? e.byte - 1 : 0)) +
                              ": invalid JSON: " + e.what());
  }
  try {
    return parse_config(j);
  } catch (const ConfigError& e) {
    const int line = line_of(value_lines(text), e.pointer());
    const std::string where = e.pointer().empty() ? "(top level)" : e.pointer();
    throw ConfigError(e.pointer(),
                      path + ":" + std::to_string(line) + ": " + where + ": " + e.what());
  }
}

std::string config_hash(const ExperimentConfig& config) {
  json doc = config.document;
  doc["seed"] = config.seed;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : doc.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return hex64(h);
}

json preset_config(const std::string& name) {
  const auto names = preset_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    throw ConfigError("/preset", "unknown preset '" + name + "'");
  }
  return {{"version", kSchemaVersion}, {"seed", 1}, {"map", to_json(preset_map(name))}};
}

}  // namespace endolab::cli
