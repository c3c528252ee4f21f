#include "endolab/runners.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>

namespace endolab::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

json meta(const ExperimentConfig& config, const std::string& kind) {
  return {{"tool", "endolab"},
          {"version", ENDOLAB_VERSION},
          {"kind", kind},
          {"config_hash", config_hash(config)},
          {"seed", config.seed}};
}

void write_json(const fs::path& path, const json& j, std::ostream& log) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
  log << "wrote " << path.string() << '\n';
}

std::ofstream open_csv(const fs::path& path, const ExperimentConfig& config,
                       const std::string& kind) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "# endolab " << ENDOLAB_VERSION << " kind=" << kind
      << " config=" << config_hash(config) << " seed=" << config.seed << '\n';
  out << std::setprecision(17);
  return out;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::vector<TorusPoint> random_points(int n, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<TorusPoint> out;
  for (int k = 0; k < count; ++k) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = unit(rng);
    out.emplace_back(v);
  }
  return out;
}

// Salts keep the streams of different experiments apart under one seed.
constexpr std::uint64_t kPointSalt = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kSampleSalt = 0xd1b54a32d192ed03ULL;
constexpr std::uint64_t kFrameSalt = 0x8cb92ba72f3d8dd7ULL;

TorusPoint default_point(const ExperimentConfig& config, const std::optional<TorusPoint>& given) {
  if (given) return *given;
  if (config.map.design) return config.map.design->x;
  return random_points(static_cast<int>(config.map.matrix.rows()), 1,
                       config.seed ^ kPointSalt)
      .front();
}

BranchCode padded(const BranchCode& code, int depth) {
  if (code.depth() >= depth) return code.prefix(depth);
  BranchCode out = code;
  out.word.resize(static_cast<std::size_t>(depth), 0);
  return out;
}

std::vector<int> default_ladder(int first, int last, int step) {
  std::vector<int> out;
  for (int d = first; d < last; d += step) out.push_back(d);
  out.push_back(last);
  return out;
}

const SubspaceFrame& bundle_of(const SplittingEstimate& est, const std::string& name) {
  if (name == "s") return est.s;
  if (name == "c") return est.c;
  if (name == "u") return est.u;
  if (name == "cs") return est.cs;
  return est.cu;
}

int run_splitting(const ExperimentConfig& config, const fs::path& out, std::ostream& log) {
  const Endomorphism f = build_map(config.map);
  const auto& p = config.splitting_run;
  const TorusPoint x = default_point(config, p.point);
  const BranchCode code = p.code.value_or(zero_code(config.splitting));
  const SplittingEstimate est = compute_splitting(f, x, code, config.splitting);

  const std::vector<int> sweep =
      p.sweep.empty() ? default_ladder(15, config.splitting.backward_depth, 5) : p.sweep;
  auto csv = open_csv(out / "splitting_residuals.csv", config, "splitting");
  csv << "depth,residual_s,residual_c,residual_u,residual_cs,residual_cu,distance_to_final\n";
  for (int d : sweep) {
    SplittingOptions o = config.splitting;
    o.forward_depth = d;
    o.backward_depth = d;
    o.drift_window = std::min(o.drift_window, d - 1);
    const auto e = compute_splitting(f, x, padded(code, d), o);
    double dist = 0.0;
    for (const char* b : {"s", "c", "u", "cs", "cu"}) {
      if (bundle_of(e, b).dim() > 0) {
        dist = std::max(dist, subspace_distance(bundle_of(e, b), bundle_of(est, b)));
      }
    }
    csv << d << ',' << e.residual_s << ',' << e.residual_c << ',' << e.residual_u << ','
        << e.residual_cs << ',' << e.residual_cu << ',' << dist << '\n';
  }
  log << "wrote " << (out / "splitting_residuals.csv").string() << '\n';

  const bool converged = est.max_residual() <= p.tolerance;
  write_json(out / "splitting.json",
             {{"meta", meta(config, "splitting")},
              {"estimate", to_json(est)},
              {"tolerance", p.tolerance},
              {"converged", converged}},
             log);
  log << "max residual " << est.max_residual() << (converged ? " <= " : " > ") << "tolerance "
      << p.tolerance << '\n';
  return converged ? kExitOk : kExitGate;
}

SubspaceFrame resolve_direction(const Endomorphism& f, const TorusPoint& x,
                                const DirectionSpec& spec, const SplittingOptions& options) {
  if (!spec.vectors.empty()) {
    Mat cols(f.dim(), static_cast<Eigen::Index>(spec.vectors.size()));
    for (std::size_t i = 0; i < spec.vectors.size(); ++i) {
      cols.col(static_cast<Eigen::Index>(i)) = spec.vectors[i];
    }
    return SubspaceFrame(cols, x);
  }
  const BranchCode code = spec.code.value_or(zero_code(options));
  SplittingOptions o = options;
  o.backward_depth = code.depth();
  const auto est = compute_splitting(f, x, code, o);
  return bundle_of(est, spec.bundle);
}

int run_angles(const ExperimentConfig& config, const fs::path& out, std::ostream& log) {
  const Endomorphism f = build_map(config.map);
  const auto& p = config.angles;
  const TorusPoint x = default_point(config, p.point);
  const Dims d = f.dims();

  ConstantsOptions co;
  co.splitting = config.splitting;
  const auto fit = estimate_constants(
      f, random_points(f.dim(), p.constant_samples, config.seed ^ kSampleSalt), co);
  const auto& k = fit.constants;
  const double predicted = std::log(k.nu / (d.c > 0 ? k.gamma1 : k.mu));

  std::optional<SubspaceFrame> e1, e2;
  std::string source;
  if (p.e1) {
    e1 = resolve_direction(f, x, *p.e1, config.splitting);
    e2 = resolve_direction(f, x, *p.e2, config.splitting);
    source = "config";
  } else if (config.map.design && d.c > 0 && config.map.design->codes.size() >= 2) {
    SplittingOptions o = config.splitting;
    o.backward_depth = config.map.design->codes[0].depth();
    e1 = sigma_frame(f, x, Sigma::c, config.map.design->codes[0], o);
    e2 = sigma_frame(f, x, Sigma::c, config.map.design->codes[1], o);
    source = "designed center witnesses";
  } else {
    // Generic subspaces: inside E^cs of dimension c when there is a center,
    // otherwise u-dimensional subspaces of the whole tangent space.
    const int dim = d.c > 0 ? d.c : d.u;
    const Mat ambient = d.c > 0 ? stable_and_cs_frames(f, x, config.splitting).cs.basis()
                                : Mat(Mat::Identity(f.dim(), f.dim()));
    const Mat g1 = generic_frame(static_cast<int>(ambient.cols()), config.seed ^ kFrameSalt);
    const Mat g2 =
        generic_frame(static_cast<int>(ambient.cols()), (config.seed ^ kFrameSalt) + 1);
    e1 = SubspaceFrame(ambient * g1.leftCols(dim), x);
    e2 = SubspaceFrame(ambient * g2.leftCols(dim), x);
    source = d.c > 0 ? "generic subspaces of E^cs" : "generic subspaces";
  }

  AngleDecayOptions options = p.options;
  options.splitting = config.splitting;
  const AngleSeries series = angle_decay_series(f, x, *e1, *e2, options);

  auto csv = open_csv(out / "angles.csv", config, "angles");
  write_angles_csv(csv, series);
  log << "wrote " << (out / "angles.csv").string() << '\n';

  json j = {{"meta", meta(config, "angles")},
            {"point", to_json(x)},
            {"directions", source},
            {"slope", series.degenerate ? json(nullptr) : json(series.slope)},
            {"predicted_slope", number_or_null(predicted)},
            {"constants", to_json(fit)},
            {"series", to_json(series)}};
  if (!series.degenerate) {
    j["relative_error"] = number_or_null(std::abs(series.slope - predicted) / std::abs(predicted));
  }
  write_json(out / "angles.json", j, log);
  if (series.degenerate) {
    log << "directions coincide within 1e-12; no slope\n";
    return kExitGate;
  }
  log << "slope " << series.slope << " predicted " << predicted << '\n';
  return kExitOk;
}

json multiplicity_row(const std::string& kind, int k, int depth, const MultiplicityReport& r) {
  return {{"rows", kind},
          {"iterate", k},
          {"depth", depth},
          {"codes", r.codes_tried},
          {"cluster_count", r.cluster_count()},
          {"min_inter_cluster_angle",
           r.min_inter_cluster_angle ? json(*r.min_inter_cluster_angle) : json(nullptr)}};
}

int run_multiplicity(const ExperimentConfig& config, const fs::path& out, std::ostream& log) {
  const Endomorphism f = build_map(config.map);
  const auto& p = config.multiplicity;
  const TorusPoint x = default_point(config, p.point);

  MultiplicityOptions base;
  base.depth = p.depth;
  base.code_budget = p.budget;
  base.cluster_threshold = p.threshold;
  base.seed = config.seed;
  base.splitting = config.splitting;
  base.splitting.backward_depth = p.depth;

  const auto at_depth = [&](int depth, std::vector<BranchCode> codes, const TorusPoint& at) {
    MultiplicityOptions o = base;
    o.depth = depth;
    o.splitting.backward_depth = depth;
    o.codes = std::move(codes);
    return count_directions(f, at, p.sigma, o);
  };

  json rows = json::array();
  const auto full = at_depth(p.depth, {}, x);
  for (int depth : p.depths.empty() ? default_ladder(10, p.depth, 10) : p.depths) {
    rows.push_back(multiplicity_row("enumerated", 0, depth,
                                    depth == p.depth ? full : at_depth(depth, {}, x)));
  }

  std::optional<MultiplicityReport> designed;
  std::vector<BranchCode> probe =
      enumerate_codes(f.degree(), p.depth, p.budget, base.seed);
  if (p.witnesses && config.map.design && !config.map.design->codes.empty() &&
      torus_distance(config.map.design->x, x) < 1e-12) {
    const auto& codes = config.map.design->codes;
    const int top = codes.front().depth();
    for (int depth : default_ladder(10, top, 10)) {
      std::vector<BranchCode> cut;
      for (const auto& c : codes) cut.push_back(c.prefix(depth));
      auto r = at_depth(depth, cut, x);
      rows.push_back(multiplicity_row("designed", 0, depth, r));
      if (depth == top) designed = std::move(r);
    }
    probe = codes;
  }

  // Growth probe: follow f^k(x) carrying the same backward branches.
  std::vector<int> counts;
  TorusPoint at = x;
  // Cocycle models have no genuine preimages to follow.
  const int iterates = f.is_torus_map() ? p.iterates : 0;
  for (int k = 0; k <= iterates; ++k) {
    if (k > 0) {
      probe = pushed_codes(f, at, probe);
      at = f.evaluate(at);
    }
    const auto r = at_depth(probe.front().depth(), probe, at);
    rows.push_back(multiplicity_row("iterate", k, probe.front().depth(), r));
    counts.push_back(r.cluster_count());
  }
  const bool monotone = std::is_sorted(counts.begin(), counts.end());

  auto csv = open_csv(out / "multiplicity.csv", config, "multiplicity");
  csv << "rows,iterate,depth,codes,cluster_count,min_inter_cluster_angle\n";
  for (const auto& r : rows) {
    csv << r["rows"].get<std::string>() << ',' << r["iterate"] << ',' << r["depth"] << ','
        << r["codes"] << ',' << r["cluster_count"] << ',';
    if (r["min_inter_cluster_angle"].is_null()) {
      csv << "nan";
    } else {
      csv << r["min_inter_cluster_angle"].get<double>();
    }
    csv << '\n';
  }
  log << "wrote " << (out / "multiplicity.csv").string() << '\n';

  json j = {{"meta", meta(config, "multiplicity")},
            {"report", to_json(full)},
            {"rows", rows},
            {"iterate_counts", counts},
            {"non_decreasing", monotone}};
  if (designed) j["designed"] = to_json(*designed);
  write_json(out / "multiplicity.json", j, log);
  log << "sigma=" << to_string(p.sigma) << " clusters " << full.cluster_count() << " at depth "
      << p.depth << '\n';
  return kExitOk;
}

int run_perturb(const ExperimentConfig& config, const fs::path& out, std::ostream& log) {
  const auto& p = config.perturb;
  if (config.map.cocycle_model || !config.map.bumps.empty() || !config.map.trig_field.empty()) {
    throw ConfigError("/map", "perturb needs an unperturbed integral linear map");
  }
  const LinearPart a = LinearPart::integral(config.map.matrix.cast<long long>());

  TheoremDOptions o;
  o.theta = p.theta;
  o.seed = config.seed;
  o.depth = p.depth;
  o.certify_cones = false;  // run below so a failing certificate still leaves the design on disk
  o.cones.grid = p.grid;
  o.cones.beta = p.beta;
  o.cones.seed = config.seed;
  o.cones.splitting = config.splitting;
  o.triple_tolerance = p.triple_tolerance;
  o.min_displacement = p.min_displacement;
  o.max_attempts = p.max_attempts;
  auto built = build_theorem_d_map(a, o);
  if (p.certify && !built.report.degenerate) {
    built.report.cone_certificate = verify_cone_conditions(built.map, o.cones);
  }

  const MapSpec spec =
      built.report.degenerate ? config.map : map_spec_of(built.map, built.report.design);
  write_json(out / "map.json",
             {{"version", kSchemaVersion}, {"seed", config.seed}, {"map", to_json(spec)}}, log);
  write_json(out / "design.json",
             {{"meta", meta(config, "perturb")}, {"report", to_json(built.report)}}, log);

  if (built.report.degenerate) log << built.report.flag << '\n';
  if (built.report.cone_certificate) {
    const auto& c = *built.report.cone_certificate;
    log << "cone certificate " << (c.pass ? "pass" : "FAIL") << " (min margin "
        << c.min_margin() << ")\n";
    if (!c.pass) return kExitGate;
  }
  return kExitOk;
}

int run_verify_cones(const ExperimentConfig& config, const fs::path& out, std::ostream& log) {
  const Endomorphism f = build_map(config.map);
  ConeOptions o;
  o.beta = config.cones.beta;
  o.grid = config.cones.grid;
  o.samples_per_cone = config.cones.samples;
  o.source = config.cones.source;
  o.metric = config.cones.metric;
  o.seed = config.seed;
  o.splitting = config.splitting;
  const Certificate cert = verify_cone_conditions(f, o);
  write_json(out / "certificate.json",
             {{"meta", meta(config, "verify-cones")}, {"certificate", to_json(cert)}}, log);
  log << "cone certificate " << (cert.pass ? "pass" : "FAIL") << " (min margin "
      << cert.min_margin() << ")\n";
  return cert.pass ? kExitOk : kExitGate;
}

int run_constants(const ExperimentConfig& config, const fs::path& out, std::ostream& log) {
  const Endomorphism f = build_map(config.map);
  const auto& p = config.constants;
  auto samples = random_points(f.dim(), p.samples, config.seed ^ kSampleSalt);
  if (p.include_design) {
    if (config.map.design) samples.push_back(config.map.design->x);
    for (const auto& b : config.map.bumps) samples.push_back(b.center);
  }
  ConstantsOptions co;
  co.depth = p.depth;
  co.envelope_slack = p.slack;
  co.splitting = config.splitting;
  const ConstantsFit fit = estimate_constants(f, samples, co);

  json j = {{"meta", meta(config, "constants")}, {"fit", to_json(fit)}};
  int code = fit.valid ? kExitOk : kExitGate;
  if (p.adapted && fit.valid) {
    AdaptedMetricOptions ao;
    ao.max_horizon = p.max_horizon;
    ao.splitting = config.splitting;
    const TorusPoint x = config.map.design ? config.map.design->x : samples.front();
    try {
      const auto m = adapted_metric(f, x, samples, fit.constants, ao);
      j["adapted_metric"] = to_json(m);
      log << "adapted metric horizon " << m.horizon << ", one-step inequalities "
          << (m.holds() ? "hold" : "FAIL") << " (min margin " << m.margins.min() << ")\n";
      if (!m.holds()) code = kExitGate;
    } catch (const ConvergenceError& e) {
      j["adapted_metric"] = nullptr;
      j["adapted_metric_error"] = e.what();
      log << "adapted metric: " << e.what() << '\n';
      code = kExitGate;
    }
  }
  write_json(out / "constants.json", j, log);
  const auto& k = fit.constants;
  log << "nu " << k.nu << " gamma1 " << k.gamma1 << " gamma2 " << k.gamma2 << " mu " << k.mu
      << " C " << k.C << (fit.valid ? "" : " (invalid: " + fit.violation + ")") << '\n';
  return code;
}

int run_orbit_metric(const ExperimentConfig& config, const fs::path& out, std::ostream& log) {
  const Endomorphism f = build_map(config.map);
  const auto& p = config.orbit_metric;
  const auto points = random_points(f.dim(), p.orbits, config.seed ^ kPointSalt);
  std::mt19937_64 rng(config.seed ^ kSampleSalt);
  std::uniform_int_distribution<int> letter(0, f.degree() - 1);
  std::vector<TruncatedBiorbit> orbits;
  for (const auto& x : points) {
    BranchCode code;
    for (int i = 0; i < p.depth; ++i) code.word.push_back(letter(rng));
    orbits.push_back(biorbit(f, x, code));
  }

  const std::size_t n = orbits.size();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  auto csv = open_csv(out / "orbit_metric.csv", config, "orbit-metric");
  csv << "a,b,dbar,truncation_bound\n";
  double asymmetry = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (a == b) continue;
      const auto r = orbit_distance(orbits[a], orbits[b]);
      d[a][b] = r.value;
      if (a < b) csv << a << ',' << b << ',' << r.value << ',' << r.truncation_bound << '\n';
    }
  }
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      asymmetry = std::max(asymmetry, std::abs(d[a][b] - d[b][a]));
      for (std::size_t c = 0; c < n; ++c) worst = std::max(worst, d[a][c] - d[a][b] - d[b][c]);
    }
  }
  log << "wrote " << (out / "orbit_metric.csv").string() << '\n';
  log << "truncation bound " << orbit_distance(orbits[0], orbits[1]).truncation_bound
      << ", asymmetry " << asymmetry << ", worst triangle excess " << worst << '\n';
  return asymmetry <= 1e-12 && worst <= 1e-12 ? kExitOk : kExitGate;
}

}  // namespace

void apply_seed(ExperimentConfig& config, std::uint64_t seed) {
  config.seed = seed;
  config.splitting.seed = seed ^ 0x5eedf00dULL;
}

int run_experiment(const std::string& kind, const ExperimentConfig& config,
                   const fs::path& out, std::ostream& log) {
  if (kind == "splitting") return run_splitting(config, out, log);
  if (kind == "angles") return run_angles(config, out, log);
  if (kind == "multiplicity") return run_multiplicity(config, out, log);
  if (kind == "perturb") return run_perturb(config, out, log);
  if (kind == "verify-cones") return run_verify_cones(config, out, log);
  if (kind == "constants") return run_constants(config, out, log);
  if (kind == "orbit-metric") return run_orbit_metric(config, out, log);
  throw ConfigError("/kind", "unknown experiment kind '" + kind + "'");
}

int run(const std::string& kind, const std::string& config_path,
        std::optional<std::uint64_t> seed, const std::string& out_dir, std::ostream& log,
        std::ostream& err) {
  ExperimentConfig config;
  try {
    config = load_config(config_path);
    if (!config.kind.empty() && config.kind != kind) {
      throw ConfigError("", config_path + ": config is for kind '" + config.kind +
                                "', not '" + kind + "'");
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  if (seed) apply_seed(config, *seed);

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    err << "cannot create output directory " << out_dir << ": " << ec.message() << '\n';
    return kExitConfig;
  }
  try {
    return run_experiment(kind, config, out_dir, log);
  } catch (const ConfigError& e) {
    err << "config error: " << config_path << ": " << e.pointer() << ": " << e.what() << '\n';
    return kExitConfig;
  } catch (const PreconditionError& e) {
    err << "config error: " << config_path << ": " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "quality gate: " << e.what() << '\n';
    return kExitGate;
  }
}

}  // namespace endolab::cli
