#include "endolab/io.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <set>

namespace endolab {
namespace {

using nlohmann::json;

std::string child(const std::string& where, const std::string& key) { return where + "/" + key; }
std::string child(const std::string& where, std::size_t index) {
  return where + "/" + std::to_string(index);
}

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where, "expected an object");
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  require_object(j, where);
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError(child(where, key), "unknown key '" + key + "'");
  }
}

const json& required(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where, "missing required key '" + key + "'");
  return j.at(key);
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(where, "expected a finite number");
  return v;
}

long long integer(const json& j, const std::string& where) {
  if (j.is_number_integer()) return j.get<long long>();
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (std::isfinite(v) && v == std::round(v)) return static_cast<long long>(v);
  }
  throw ConfigError(where, "expected an integer");
}

Vec vector_of(const json& j, const std::string& where, int dim = 0) {
  if (!j.is_array() || j.empty() || j.size() > kMaxDim) {
    throw ConfigError(where, "expected an array of 1 to 3 numbers");
  }
  if (dim > 0 && static_cast<int>(j.size()) != dim) {
    throw ConfigError(where, "expected " + std::to_string(dim) + " entries");
  }
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], child(where, i));
  return v;
}

json vector_json(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json matrix_json(const Mat& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json margin_json(const MarginEntry& m) {
  return {{"value", finite_or_null(m.value)}, {"witness", to_json(m.witness)}};
}

Dims dims_from(const json& j, const std::string& where, int n) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(where, "dims must be [s, c, u]");
  Dims d{static_cast<int>(integer(j[0], child(where, 0))),
         static_cast<int>(integer(j[1], child(where, 1))),
         static_cast<int>(integer(j[2], child(where, 2)))};
  if (d.s < 0 || d.c < 0 || d.u < 0 || d.total() != n) {
    throw ConfigError(where, "dims must be nonnegative and sum to " + std::to_string(n));
  }
  return d;
}

}  // namespace

json to_json(const TorusPoint& p) {
  if (p.dim() == 0) return nullptr;
  return vector_json(p.coords());
}

TorusPoint point_from_json(const json& j, const std::string& where, int dim) {
  const Vec v = vector_of(j, where, dim);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v(i) < 0.0 || v(i) >= 1.0) {
      throw ConfigError(child(where, static_cast<std::size_t>(i)),
                        "torus coordinates must lie in [0, 1)");
    }
  }
  return TorusPoint(v);
}

json to_json(const Dims& d) { return json::array({d.s, d.c, d.u}); }

json to_json(const SubspaceFrame& frame) {
  json basis = json::array();
  for (Eigen::Index c = 0; c < frame.basis().cols(); ++c) {
    basis.push_back(vector_json(frame.basis().col(c)));
  }
  return {{"dim", frame.dim()}, {"basis", basis}};
}

Endomorphism build_map(const MapSpec& spec) {
  const auto n = spec.matrix.rows();
  if (n < 1 || n > kMaxDim || spec.matrix.cols() != n) {
    throw PreconditionError("map matrix must be square of size 1..3");
  }
  if (spec.cocycle_model) {
    return Endomorphism(LinearPart::cocycle_model(spec.matrix), spec.bumps, spec.trig_field,
                        spec.dims);
  }
  IntMat a(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) {
      const double v = spec.matrix(r, c);
      if (v != std::round(v)) throw PreconditionError("integral map has a non-integer entry");
      a(r, c) = static_cast<long long>(v);
    }
  }
  return Endomorphism(LinearPart::integral(a), spec.bumps, spec.trig_field, spec.dims);
}

MapSpec map_spec_of(const Endomorphism& f, std::optional<DesignPoint> design) {
  MapSpec spec;
  spec.matrix = f.linear().matrix();
  spec.cocycle_model = !f.linear().is_integral();
  spec.bumps = f.bumps();
  spec.trig_field = f.trig_field();
  if (f.dims() != f.linear().spectral_dims()) spec.dims = f.dims();
  spec.design = std::move(design);
  return spec;
}

json to_json(const DesignPoint& design) {
  json pre = json::array();
  for (const auto& p : design.preimages) pre.push_back(to_json(p));
  json balls = json::array();
  for (const auto& b : design.balls) balls.push_back({{"center", to_json(b.center)}, {"radius", b.radius}});
  json codes = json::array();
  for (const auto& c : design.codes) codes.push_back(c.to_string());
  return {{"x", to_json(design.x)}, {"preimages", pre}, {"balls", balls}, {"codes", codes}};
}

json to_json(const MapSpec& spec) {
  json matrix = json::array();
  for (Eigen::Index r = 0; r < spec.matrix.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < spec.matrix.cols(); ++c) {
      const double v = spec.matrix(r, c);
      if (!spec.cocycle_model) {
        row.push_back(static_cast<long long>(v));
      } else {
        row.push_back(v);
      }
    }
    matrix.push_back(row);
  }
  json out = {{"matrix", matrix}};
  if (spec.cocycle_model) out["cocycle_model"] = true;
  if (spec.dims) out["dims"] = to_json(*spec.dims);
  if (!spec.bumps.empty()) {
    json bumps = json::array();
    for (const auto& b : spec.bumps) {
      bumps.push_back({{"center", to_json(b.center)},
                       {"radius", b.radius},
                       {"angle", b.angle},
                       {"plane", b.plane},
                       {"axes", json::array({vector_json(b.axis_a), vector_json(b.axis_b)})},
                       {"profile", "poly4"}});
    }
    out["bumps"] = bumps;
  }
  if (!spec.trig_field.empty()) {
    json trig = json::array();
    for (const auto& t : spec.trig_field) {
      json wave = json::array();
      for (Eigen::Index i = 0; i < t.wave.size(); ++i) wave.push_back(t.wave(i));
      trig.push_back({{"component", t.component}, {"wave", wave}, {"amplitude", t.amplitude}});
    }
    out["trig_field"] = trig;
  }
  if (spec.design) out["design"] = to_json(*spec.design);
  return out;
}

MapSpec map_spec_from_json(const json& j, const std::string& where) {
  check_keys(j, {"matrix", "cocycle_model", "dims", "bumps", "trig_field", "design"}, where);
  MapSpec spec;
  if (j.contains("cocycle_model")) {
    if (!j["cocycle_model"].is_boolean()) {
      throw ConfigError(child(where, "cocycle_model"), "expected true or false");
    }
    spec.cocycle_model = j["cocycle_model"].get<bool>();
  }

  const auto mwhere = child(where, "matrix");
  const json& m = required(j, "matrix", where);
  if (!m.is_array() || m.empty() || m.size() > kMaxDim) {
    throw ConfigError(mwhere, "matrix must be a list of 1 to 3 rows");
  }
  const auto n = static_cast<Eigen::Index>(m.size());
  spec.matrix.resize(n, n);
  for (std::size_t r = 0; r < m.size(); ++r) {
    const auto rwhere = child(mwhere, r);
    if (!m[r].is_array() || static_cast<Eigen::Index>(m[r].size()) != n) {
      throw ConfigError(rwhere, "row " + std::to_string(r) + " must have " + std::to_string(n) +
                                    " entries");
    }
    for (std::size_t c = 0; c < m[r].size(); ++c) {
      const auto ewhere = child(rwhere, c);
      spec.matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          spec.cocycle_model ? number(m[r][c], ewhere)
                             : static_cast<double>(integer(m[r][c], ewhere));
    }
  }
  const int dim = static_cast<int>(n);

  if (j.contains("dims")) spec.dims = dims_from(j["dims"], child(where, "dims"), dim);

  if (j.contains("bumps")) {
    const auto bwhere = child(where, "bumps");
    if (!j["bumps"].is_array()) throw ConfigError(bwhere, "bumps must be a list");
    for (std::size_t i = 0; i < j["bumps"].size(); ++i) {
      const auto w = child(bwhere, i);
      const json& b = j["bumps"][i];
      check_keys(b, {"center", "radius", "angle", "plane", "axes", "profile"}, w);
      RotationBump bump;
      bump.center = point_from_json(required(b, "center", w), child(w, "center"), dim);
      bump.radius = number(required(b, "radius", w), child(w, "radius"));
      bump.angle = number(required(b, "angle", w), child(w, "angle"));
      if (b.contains("profile") && b["profile"] != "poly4") {
        throw ConfigError(child(w, "profile"), "only the 'poly4' profile is available");
      }
      if (b.contains("plane")) {
        if (!b["plane"].is_string()) throw ConfigError(child(w, "plane"), "plane must be a string");
        bump.plane = b["plane"].get<std::string>();
      }
      if (b.contains("axes")) {
        const json& axes = b["axes"];
        if (!axes.is_array() || axes.size() != 2) {
          throw ConfigError(child(w, "axes"), "axes must be two vectors");
        }
        bump.axis_a = vector_of(axes[0], child(child(w, "axes"), 0), dim);
        bump.axis_b = vector_of(axes[1], child(child(w, "axes"), 1), dim);
      } else if (bump.plane == "uu-s") {
        if (spec.cocycle_model) throw ConfigError(child(w, "plane"), "uu-s needs an integral map");
        try {
          IntMat a = spec.matrix.cast<long long>();
          std::tie(bump.axis_a, bump.axis_b) = uu_s_plane(LinearPart::integral(a));
        } catch (const PreconditionError& e) {
          throw ConfigError(child(w, "plane"), e.what());
        }
      } else {
        throw ConfigError(child(w, "plane"), "plane must be 'uu-s' or come with explicit axes");
      }
      spec.bumps.push_back(bump);
    }
  }

  if (j.contains("trig_field")) {
    const auto twhere = child(where, "trig_field");
    if (!j["trig_field"].is_array()) throw ConfigError(twhere, "trig_field must be a list");
    for (std::size_t i = 0; i < j["trig_field"].size(); ++i) {
      const auto w = child(twhere, i);
      const json& t = j["trig_field"][i];
      check_keys(t, {"component", "wave", "amplitude"}, w);
      TrigTerm term;
      term.component = static_cast<int>(integer(required(t, "component", w), child(w, "component")));
      const json& wave = required(t, "wave", w);
      if (!wave.is_array() || static_cast<int>(wave.size()) != dim) {
        throw ConfigError(child(w, "wave"), "wave must have " + std::to_string(dim) + " integers");
      }
      term.wave.resize(dim);
      for (int k = 0; k < dim; ++k) {
        term.wave(k) = integer(wave[static_cast<std::size_t>(k)],
                               child(child(w, "wave"), static_cast<std::size_t>(k)));
      }
      term.amplitude = number(required(t, "amplitude", w), child(w, "amplitude"));
      spec.trig_field.push_back(term);
    }
  }

  if (j.contains("design")) {
    const auto w = child(where, "design");
    const json& d = j["design"];
    check_keys(d, {"x", "preimages", "balls", "codes"}, w);
    DesignPoint design;
    design.x = point_from_json(required(d, "x", w), child(w, "x"), dim);
    if (d.contains("preimages")) {
      for (std::size_t i = 0; i < d["preimages"].size(); ++i) {
        design.preimages.push_back(
            point_from_json(d["preimages"][i], child(child(w, "preimages"), i), dim));
      }
    }
    if (d.contains("balls")) {
      for (std::size_t i = 0; i < d["balls"].size(); ++i) {
        const auto bw = child(child(w, "balls"), i);
        check_keys(d["balls"][i], {"center", "radius"}, bw);
        design.balls.push_back(
            Ball{point_from_json(required(d["balls"][i], "center", bw), child(bw, "center"), dim),
                 number(required(d["balls"][i], "radius", bw), child(bw, "radius"))});
      }
    }
    if (d.contains("codes")) {
      for (std::size_t i = 0; i < d["codes"].size(); ++i) {
        const auto cw = child(child(w, "codes"), i);
        if (!d["codes"][i].is_string()) throw ConfigError(cw, "codes are digit strings");
        try {
          design.codes.push_back(BranchCode::parse(d["codes"][i].get<std::string>()));
        } catch (const PreconditionError& e) {
          throw ConfigError(cw, e.what());
        }
      }
    }
    spec.design = design;
  }
  return spec;
}

json to_json(const SplittingEstimate& est) {
  return {{"point", to_json(est.point)},
          {"dims", to_json(est.dims)},
          {"frames",
           {{"s", to_json(est.s)},
            {"c", to_json(est.c)},
            {"u", to_json(est.u)},
            {"cs", to_json(est.cs)},
            {"cu", to_json(est.cu)}}},
          {"residuals",
           {{"s", est.residual_s},
            {"c", est.residual_c},
            {"u", est.residual_u},
            {"cs", est.residual_cs},
            {"cu", est.residual_cu}}},
          {"provenance",
           {{"branch_code", est.code.to_string()}, {"forward_depth", est.forward_depth}}},
          {"transversality", est.transversality},
          {"spanning_volume", est.spanning_volume}};
}

json to_json(const HyperbolicityConstants& k) {
  return {{"nu", k.nu},         {"gamma1", k.gamma1}, {"gamma2", k.gamma2},
          {"mu", k.mu},         {"C", k.C},           {"dims", to_json(k.dims)}};
}

json to_json(const ConstantsFit& fit) {
  json env = {{"s_max", fit.envelope.s_max},
              {"c_max", fit.envelope.c_max},
              {"c_min", fit.envelope.c_min},
              {"u_min", fit.envelope.u_min}};
  return {{"constants", to_json(fit.constants)},
          {"valid", fit.valid},
          {"violation", fit.violation},
          {"samples", fit.samples},
          {"envelope", env}};
}

json to_json(const AdaptedMetric& m) {
  return {{"x", to_json(m.x)},
          {"N", m.horizon},
          {"G", matrix_json(m.G)},
          {"K", m.K},
          {"rayleigh",
           {{"L_s", m.L_s}, {"K_s", m.K_s}, {"L_c", m.L_c}, {"K_c", m.K_c}, {"L_u", m.L_u},
            {"K_u", m.K_u}}},
          {"constants",
           {{"nu", m.nu}, {"gamma1", m.gamma1}, {"gamma2", m.gamma2}, {"mu", m.mu}}},
          {"chain_holds", m.chain_holds},
          {"margins",
           {{"s", finite_or_null(m.margins.s)},
            {"c_lower", finite_or_null(m.margins.c_lower)},
            {"c_upper", finite_or_null(m.margins.c_upper)},
            {"u", finite_or_null(m.margins.u)}}},
          {"witnesses",
           {{"s", to_json(m.margins.witness_s)},
            {"c_lower", to_json(m.margins.witness_c_lower)},
            {"c_upper", to_json(m.margins.witness_c_upper)},
            {"u", to_json(m.margins.witness_u)}}},
          {"samples", m.samples},
          {"holds", m.holds()}};
}

json to_json(const MultiplicityReport& report) {
  json clusters = json::array();
  for (const auto& c : report.clusters) {
    json witnesses = json::array();
    for (const auto& w : c.witnesses) witnesses.push_back(w.to_string());
    clusters.push_back({{"representative", to_json(c.representative)}, {"witnesses", witnesses}});
  }
  return {{"x", to_json(report.x)},
          {"sigma", to_string(report.sigma)},
          {"depth", report.depth},
          {"codes_tried", report.codes_tried},
          {"cluster_count", report.cluster_count()},
          {"min_inter_cluster_angle", report.min_inter_cluster_angle
                                          ? json(*report.min_inter_cluster_angle)
                                          : json(nullptr)},
          {"clusters", clusters}};
}

json to_json(const Certificate& cert) {
  return {{"pass", cert.pass},
          {"margins",
           {{"invariance_s", margin_json(cert.invariance_s)},
            {"invariance_u", margin_json(cert.invariance_u)},
            {"invariance_cs", margin_json(cert.invariance_cs)},
            {"invariance_cu", margin_json(cert.invariance_cu)},
            {"s", margin_json(cert.rate_s)},
            {"u", margin_json(cert.rate_u)},
            {"cs", margin_json(cert.rate_cs)},
            {"cu", margin_json(cert.rate_cu)}}},
          {"rates",
           {{"sup_s", cert.sup_s},
            {"sup_cs", cert.sup_cs},
            {"inf_u", finite_or_null(cert.inf_u)},
            {"inf_cu", finite_or_null(cert.inf_cu)}}},
          {"grid", cert.grid},
          {"beta", cert.beta},
          {"seed", cert.seed},
          {"metric", to_string(cert.metric)},
          {"reference", to_string(cert.source)},
          {"vectors_per_cone", cert.vectors_per_cone},
          {"method", "sampled cone boundaries on a grid; evidence, not a validated proof"}};
}

json to_json(const DesignReport& report) {
  json out = {{"design", to_json(report.design)},
              {"theta", report.theta},
              {"radius", report.radius},
              {"tau", report.tau},
              {"c1_distance", report.c1_distance},
              {"degenerate", report.degenerate},
              {"flag", report.flag},
              {"triple_intersection",
               {{"dimension", report.triple.dimension}, {"angle", report.triple.angle}}},
              {"seed", report.seed},
              {"attempts", report.attempts}};
  out["cone_certificate"] =
      report.cone_certificate ? to_json(*report.cone_certificate) : json(nullptr);
  return out;
}

json to_json(const AngleSeries& series) {
  return {{"n", series.n},
          {"angle", series.angle},
          {"slope", series.degenerate ? json(nullptr) : finite_or_null(series.slope)},
          {"fitted", series.fitted},
          {"degenerate", series.degenerate}};
}

void write_orbit_csv(std::ostream& out, const BackwardOrbit& orbit) {
  const int n = orbit.points.front().dim();
  out << "depth";
  for (int i = 0; i < n; ++i) out << ",x" << i;
  out << '\n' << std::setprecision(17);
  for (int k = 0; k <= orbit.depth(); ++k) {
    out << k;
    for (int i = 0; i < n; ++i) out << ',' << orbit.back(k)[i];
    out << '\n';
  }
}

void write_angles_csv(std::ostream& out, const AngleSeries& series) {
  out << "n,angle,log_angle\n" << std::setprecision(17);
  for (std::size_t i = 0; i < series.n.size(); ++i) {
    out << series.n[i] << ',' << series.angle[i] << ',';
    if (series.angle[i] > 0.0) {
      out << std::log(series.angle[i]);
    } else {
      out << "-inf";
    }
    out << '\n';
  }
}

}  // namespace endolab
