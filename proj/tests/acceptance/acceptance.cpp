// One PASS/FAIL line per acceptance criterion; exit status is the number of failures.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include <endolab/presets.hpp>

using namespace endolab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

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

// sin of the largest principal angle, computed without the library: |(I - P_V) Q_U|_2.
double oracle_gap(const Mat& u, const Mat& v) {
  if (u.cols() == 0 && v.cols() == 0) return 0.0;
  if (u.cols() != v.cols()) return 1.0;
  const Eigen::MatrixXd qu = Eigen::MatrixXd(u).householderQr().householderQ() *
                             Eigen::MatrixXd::Identity(u.rows(), u.cols());
  const Eigen::MatrixXd qv = Eigen::MatrixXd(v).householderQr().householderQ() *
                             Eigen::MatrixXd::Identity(v.rows(), v.cols());
  const Eigen::MatrixXd r = qu - qv * (qv.transpose() * qu);
  return Eigen::JacobiSVD<Eigen::MatrixXd>(r).singularValues()(0);
}

Endomorphism preset(const std::string& name) { return build_map(preset_map(name)); }

// Closed-form bundles of [[2,1],[1,1]], optionally extended by a neutral e3.
struct LinearBundles {
  Mat s, c, u, cs, cu;
};

LinearBundles cat_bundles(bool block) {
  const double lu = (3.0 + std::sqrt(5.0)) / 2.0;
  const double ls = (3.0 - std::sqrt(5.0)) / 2.0;
  const int n = block ? 3 : 2;
  Vec vu = Vec::Zero(n), vs = Vec::Zero(n);
  vu(0) = 1.0;
  vu(1) = lu - 2.0;
  vs(0) = 1.0;
  vs(1) = ls - 2.0;
  LinearBundles b;
  b.s = vs.normalized();
  b.u = vu.normalized();
  if (block) {
    b.c = Vec::Unit(3, 2);
    b.cs.resize(3, 2);
    b.cs << b.s, b.c;
    b.cu.resize(3, 2);
    b.cu << b.c, b.u;
  } else {
    b.c.resize(2, 0);
    b.cs = b.s;
    b.cu = b.u;
  }
  return b;
}

Outcome linear_oracle() {
  double worst = 0.0;
  int runs = 0;
  for (const char* name : {"linear-t2-n2", "t3-block-n2"}) {
    const auto f = preset(name);
    const auto oracle = cat_bundles(f.dim() == 3);
    const auto codes = enumerate_codes(f.degree(), 40, 32, 11);
    for (const auto& x : random_points(f.dim(), 16, 7)) {
      for (int k = 0; k < 32; ++k) {
        const auto& code = codes[static_cast<std::size_t>(k) % codes.size()];
        const auto est = compute_splitting(f, x, code);
        worst = std::max({worst, oracle_gap(est.s.basis(), oracle.s),
                          oracle_gap(est.c.basis(), oracle.c), oracle_gap(est.u.basis(), oracle.u),
                          oracle_gap(est.cs.basis(), oracle.cs),
                          oracle_gap(est.cu.basis(), oracle.cu)});
        ++runs;
      }
    }
  }
  return {worst <= 1e-8, std::to_string(runs) + " splittings, worst angle " + fmt("%.2e", worst)};
}

Outcome cs_branch_independence() {
  const auto spec = preset_map("theorem-d-t3");
  const auto f = build_map(spec);
  auto points = random_points(3, 15, 21);
  points.push_back(spec.design->x);
  const auto codes = enumerate_codes(f.degree(), 40, 32, 23);
  double worst = 0.0;
  for (const auto& x : points) {
    const auto forward = stable_and_cs_frames(f, x);
    for (const auto& code : codes) {
      const auto pushed = pushed_cs_frame(f, backward_orbit(f, x, code), 8);
      worst = std::max(worst, oracle_gap(pushed.basis(), forward.cs.basis()));
    }
  }
  return {worst <= 1e-6, "16 points x 32 codes, worst angle " + fmt("%.2e", worst)};
}

Outcome designed_multiplicity() {
  const auto spec = preset_map("theorem-d-t3");
  const auto f = build_map(spec);
  const auto& design = *spec.design;
  MultiplicityOptions o;
  o.codes = design.codes;
  const auto cu = count_directions(f, design.x, Sigma::cu, o);
  const auto u = count_directions(f, design.x, Sigma::u, o);
  std::vector<SubspaceFrame> frames;
  for (const auto& code : design.codes) frames.push_back(sigma_frame(f, design.x, Sigma::cu, code));
  const auto triple = triple_intersection(frames[0], frames[1], frames[2], 1e-3);
  const double cu_angle = cu.min_inter_cluster_angle.value_or(0.0);
  const double u_angle = u.min_inter_cluster_angle.value_or(0.0);
  const bool pass = cu.cluster_count() >= 2 && u.cluster_count() >= 2 && cu_angle >= 1e-3 &&
                    u_angle >= 1e-3 && triple.dimension == 0;
  return {pass, "cu clusters " + std::to_string(cu.cluster_count()) + fmt(" (min %.3g)", cu_angle) +
                    ", u clusters " + std::to_string(u.cluster_count()) +
                    fmt(" (min %.3g)", u_angle) + ", triple dim " +
                    std::to_string(triple.dimension) + fmt(" (angle %.3g)", triple.angle)};
}

Outcome angle_decay() {
  // diagonal cocycle: two lines in E^cs = span(e1, e2)
  const auto diag = preset("diag-t3-cocycle");
  const TorusPoint p{0.3, 0.6, 0.2};
  Vec a(3), b(3);
  a << 0.8, 0.6, 0.0;
  b << -0.3, 0.9, 0.0;
  const auto d = angle_decay_series(diag, p, SubspaceFrame(a, p), SubspaceFrame(b, p));
  const double diag_err = std::abs(d.slope + std::log(2.0));

  const auto spec = preset_map("theorem-d-t3");
  const auto f = build_map(spec);
  const auto& design = *spec.design;
  const auto e1 = sigma_frame(f, design.x, Sigma::c, design.codes[0]);
  const auto e2 = sigma_frame(f, design.x, Sigma::c, design.codes[1]);
  const auto series = angle_decay_series(f, design.x, e1, e2);
  const auto fit = estimate_constants(f, random_points(3, 64, 31));
  const double predicted = std::log(fit.constants.nu / fit.constants.gamma1);
  const double rel = std::abs(series.slope - predicted) / std::abs(predicted);
  return {diag_err <= 1e-6 && !series.degenerate && rel <= 0.25,
          "diag slope error " + fmt("%.2e", diag_err) + ", theorem-d slope " +
              fmt("%.5f", series.slope) + " vs " + fmt("%.5f", predicted) +
              fmt(" (%.2f%%)", 100.0 * rel)};
}

Outcome adapted() {
  const auto spec = preset_map("theorem-d-t3");
  const auto f = build_map(spec);
  auto samples = random_points(3, 61, 41);
  samples.push_back(spec.design->x);
  for (const auto& bump : spec.bumps) samples.push_back(bump.center);
  const auto fit = estimate_constants(f, samples);
  if (!fit.valid) return {false, "constants invalid: " + fit.violation};
  const auto m = adapted_metric(f, spec.design->x, samples, fit.constants);
  const double c = fit.constants.C, nu = fit.constants.nu, mu = fit.constants.mu;
  const int n = m.horizon;
  const bool chain = c * std::pow(nu, n) < 1.0 && std::pow(std::pow(mu, n) / c, 2) > 1.0;
  return {n <= 16 && chain && m.holds(),
          "N = " + std::to_string(n) + ", " + std::to_string(m.samples) +
              " points, min one-step margin " + fmt("%.3g", m.margins.min())};
}

Outcome cone_certificate() {
  const auto f = preset("theorem-d-t3");
  ConeOptions o;
  o.beta = 0.4;
  o.grid = 32;
  const auto good = verify_cone_conditions(f, o);

  TheoremDOptions t;
  t.theta = 1.2;
  t.seed = kTheoremDSeed;
  t.certify_cones = false;
  const auto strong = build_theorem_d_map(LinearPart::integral(companion_deg3()), t);
  const auto bad = verify_cone_conditions(strong.map, o);
  return {good.pass && !bad.pass, "theta 0.2 margin " + fmt("%.4f", good.min_margin()) +
                                      ", theta 1.2 margin " + fmt("%.4f", bad.min_margin())};
}

long long int_det(const Mat& a) {
  const auto e = [&](int r, int c) { return std::llround(a(r, c)); };
  if (a.rows() == 2) return e(0, 0) * e(1, 1) - e(0, 1) * e(1, 0);
  return e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1)) -
         e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0)) +
         e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0));
}

Outcome degree_and_separation() {
  bool pass = true;
  std::string detail;
  for (const auto& name : preset_names()) {
    const auto spec = preset_map(name);
    const auto f = build_map(spec);
    const long long expected = spec.cocycle_model ? 1 : std::llabs(int_det(spec.matrix));
    double min_gap = 1.0;
    for (const auto& y : random_points(f.dim(), 100, 51)) {
      const auto pre = preimages(f, y);
      if (static_cast<long long>(pre.size()) != expected) pass = false;
      for (const auto& p : pre) {
        if (f.is_torus_map() && torus_distance(f.evaluate(p), y) > 1e-9) pass = false;
      }
      for (std::size_t i = 0; i < pre.size(); ++i) {
        for (std::size_t j = i + 1; j < pre.size(); ++j) {
          min_gap = std::min(min_gap, torus_distance(pre[i], pre[j]));
        }
      }
    }
    if (expected >= 2) {
      const double tau = name == "linear-t2-deg2" ? std::numbers::sqrt2 / 2.0
                                                  : separation_constant(f);
      if (min_gap < tau - 1e-9) pass = false;
      if (name == "linear-t2-deg2") detail = fmt("deg-2 min gap %.12f", min_gap);
    }
  }
  return {pass, std::to_string(preset_names().size()) + " presets x 100 points; " + detail};
}

Outcome inverse_limit_metric() {
  const auto f = preset("linear-t2-deg2");
  const int m = 10;
  std::mt19937_64 rng(61);
  std::uniform_int_distribution<int> letter(0, f.degree() - 1);
  const auto points = random_points(2, 60, 63);
  std::vector<TruncatedBiorbit> orbits;
  for (const auto& x : points) {
    BranchCode c;
    for (int i = 0; i < m; ++i) c.word.push_back(letter(rng));
    orbits.push_back(biorbit(f, x, c));
  }
  double bound = 0.0, asym = 0.0, excess = -1.0;
  for (std::size_t t = 0; t + 2 < orbits.size(); t += 3) {
    const auto& a = orbits[t];
    const auto& b = orbits[t + 1];
    const auto& c = orbits[t + 2];
    const auto ab = orbit_distance(a, b), ba = orbit_distance(b, a);
    const auto bc = orbit_distance(b, c), ac = orbit_distance(a, c);
    bound = std::max(bound, ab.truncation_bound);
    asym = std::max(asym, std::abs(ab.value - ba.value));
    excess = std::max({excess, ac.value - ab.value - bc.value, ab.value - ac.value - bc.value,
                       bc.value - ab.value - ac.value});
  }
  return {bound <= 0.0014 && asym == 0.0 && excess <= 1e-12,
          "bound " + fmt("%.6f", bound) + ", asymmetry " + fmt("%.1e", asym) +
              ", worst triangle excess " + fmt("%.2e", excess)};
}

Outcome monotonicity() {
  const auto spec = preset_map("theorem-d-t3");
  const auto f = build_map(spec);
  TorusPoint x = spec.design->x;
  std::vector<BranchCode> codes = spec.design->codes;
  std::vector<int> counts;
  for (int k = 0; k <= 3; ++k) {
    if (k > 0) {
      codes = pushed_codes(f, x, codes);
      x = f.evaluate(x);
    }
    MultiplicityOptions o;
    o.codes = codes;
    counts.push_back(count_directions(f, x, Sigma::cu, o).cluster_count());
  }
  std::string s;
  for (int c : counts) s += (s.empty() ? "" : ", ") + std::to_string(c);
  return {std::is_sorted(counts.begin(), counts.end()), "cu counts at x, f x, f^2 x, f^3 x: " + s};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"linear oracle equivalence", linear_oracle},
      {"E^cs branch independence", cs_branch_independence},
      {"designed multiplicity", designed_multiplicity},
      {"angle decay slopes", angle_decay},
      {"adapted metric", adapted},
      {"cone certificate and openness boundary", cone_certificate},
      {"degree and separation", degree_and_separation},
      {"inverse-limit metric", inverse_limit_metric},
      {"monotonicity probe", monotonicity},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %zu (%s): %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first, o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures;
}
