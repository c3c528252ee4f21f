#include "endolab/theorem_d.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace endolab {

TripleIntersection triple_intersection(const SubspaceFrame& f1, const SubspaceFrame& f2,
                                       const SubspaceFrame& f3, double tolerance) {
  const SubspaceFrame* frames[3] = {&f1, &f2, &f3};
  TripleIntersection out;
  out.angle = std::numbers::pi / 2;
  for (int k = 0; k < 3; ++k) {
    const auto& a = *frames[(k + 1) % 3];
    const auto& b = *frames[(k + 2) % 3];
    const SubspaceFrame pair = intersect(a, b);
    if (pair.dim() == 0) continue;  // already trivial
    out.angle = std::min(out.angle, minimal_angle(pair, *frames[k]));
  }
  if (out.angle <= tolerance) {
    out.dimension = intersect(intersect(f1, f2, tolerance), f3, tolerance).dim();
    out.dimension = std::max(out.dimension, 1);
  }
  return out;
}

std::pair<Vec, Vec> uu_s_plane(const LinearPart& a) {
  const Dims d = a.spectral_dims();
  if (d.u != 1 || d.s < 1) {
    throw PreconditionError("uu-s plane needs a simple strong unstable eigenvalue");
  }
  const Mat basis = a.bundle_basis(d);
  Vec uu = basis.col(a.dim() - 1).normalized();
  Vec s = basis.col(0);
  s -= uu * uu.dot(s);
  return {uu, s.normalized()};
}

TheoremDMap build_theorem_d_map(const LinearPart& a, const TheoremDOptions& options) {
  if (a.dim() != 3) throw PreconditionError("the bump construction lives on T^3");
  if (!a.is_integral() || a.degree() < 3) {
    throw PreconditionError("the bump construction needs an integral map of degree >= 3");
  }
  if (!a.is_partially_hyperbolic() || a.spectral_dims() != Dims{1, 1, 1}) {
    throw PreconditionError("linear part must be partially hyperbolic with dims (1,1,1)");
  }

  const Endomorphism linear_map(a);
  const double tau = linear_separation(a);
  const double radius = tau / 8.0;

  DesignReport report;
  report.theta = options.theta;
  report.radius = radius;
  report.tau = tau;
  report.seed = options.seed;

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  bool found = false;
  for (int attempt = 1; attempt <= options.max_attempts && !found; ++attempt) {
    report.attempts = attempt;
    const TorusPoint x{unit(rng), unit(rng), unit(rng)};
    if (torus_distance(linear_map.evaluate(x), x) <= options.min_displacement) continue;
    const auto pre = preimages(linear_map, x);
    bool ok = true;
    for (std::size_t i = 0; i < pre.size() && ok; ++i) {
      if (torus_distance(pre[i], x) <= tau / 2) ok = false;
      for (std::size_t j = i + 1; j < pre.size() && ok; ++j) {
        if (torus_distance(pre[i], pre[j]) < tau / 2) ok = false;
      }
    }
    if (!ok) continue;
    report.design.x = x;
    report.design.preimages = pre;
    found = true;
  }
  if (!found) {
    throw Error("internal: no non-fixed point with separated preimages was found");
  }

  const auto& pre = report.design.preimages;
  report.design.balls = {Ball{pre[0], radius}, Ball{pre[1], radius}};

  std::vector<RotationBump> bumps;
  if (options.theta != 0.0) {
    const auto [axis_a, axis_b] = uu_s_plane(a);
    // Opposite angles: equal rotations would tilt E^cu identically at x_1 and x_2.
    for (int i = 0; i < 2; ++i) {
      RotationBump b;
      b.center = pre[static_cast<std::size_t>(i)];
      b.radius = radius;
      b.angle = i == 0 ? options.theta : -options.theta;
      b.axis_a = axis_a;
      b.axis_b = axis_b;
      b.plane = "uu-s";
      bumps.push_back(b);
    }
  } else {
    report.degenerate = true;
    report.flag = "degenerate: special map unchanged";
  }
  Endomorphism f(a, bumps);
  report.c1_distance = f.c1_distance_bound();

  for (int i = 0; i < 3; ++i) {
    const auto tail = avoiding_backward_orbit(f, pre[static_cast<std::size_t>(i)],
                                              report.design.balls, options.depth - 1);
    report.design.codes.push_back(tail.code.prepend(i));
  }

  // F_i = Df_{x_i} E^cu_A; the branches through x_i avoid the balls, so E^cu(x_i) = E^cu_A.
  const Mat basis = a.bundle_basis({1, 1, 1});
  const Mat cu_a = basis.rightCols(2);
  std::vector<SubspaceFrame> planes;
  for (int i = 0; i < 3; ++i) {
    planes.emplace_back(f.derivative(pre[static_cast<std::size_t>(i)]) * cu_a, report.design.x);
  }
  report.triple = triple_intersection(planes[0], planes[1], planes[2], options.triple_tolerance);

  if (!report.degenerate) {
    if (options.certify_cones) {
      report.cone_certificate = verify_cone_conditions(f, options.cones);
      if (!report.cone_certificate->pass) {
        throw VerificationError("cone verification fails for theta = " +
                                std::to_string(options.theta) + " (min margin " +
                                std::to_string(report.cone_certificate->min_margin()) + ")");
      }
    }
  }
  return {std::move(f), std::move(report)};
}

}  // namespace endolab
