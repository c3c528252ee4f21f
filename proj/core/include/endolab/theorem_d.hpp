#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "endolab/branch.hpp"
#include "endolab/cones.hpp"
#include "endolab/endomorphism.hpp"

namespace endolab {

/// The point x, its preimages x_1, x_2, x_3, ..., the bump balls around x_1, x_2
/// and the designed branch codes (one through each of x_1, x_2, x_3).
struct DesignPoint {
  TorusPoint x;
  std::vector<TorusPoint> preimages;
  std::vector<Ball> balls;
  std::vector<BranchCode> codes;
};

struct TripleIntersection {
  /// 0 when the three planes meet only at the origin (angle above tolerance).
  int dimension = 0;
  /// min over pairs {i,j} of the smallest angle between F_i ∩ F_j and F_k.
  double angle = 0.0;
};

TripleIntersection triple_intersection(const SubspaceFrame& f1, const SubspaceFrame& f2,
                                       const SubspaceFrame& f3, double tolerance = 1e-3);

struct DesignReport {
  DesignPoint design;
  double theta = 0.0;
  double radius = 0.0;
  double tau = 0.0;
  /// K_psi |theta| plus the trig bound.
  double c1_distance = 0.0;
  bool degenerate = false;
  std::string flag;
  /// Both bumps rotate in one plane, so this angle grows like |theta|^3.
  TripleIntersection triple;
  std::optional<Certificate> cone_certificate;
  std::uint64_t seed = 0;
  int attempts = 0;
};

struct TheoremDOptions {
  double theta = 0.2;
  std::uint64_t seed = 20240611;
  int depth = 40;
  /// Run the cone verifier on the result and fail when it does not pass.
  bool certify_cones = true;
  ConeOptions cones = [] {
    ConeOptions c;
    c.grid = 16;
    return c;
  }();
  double triple_tolerance = 1e-3;
  /// Minimum displacement d(f(x), x) of the sampled point.
  double min_displacement = 0.1;
  int max_attempts = 100000;
};

struct TheoremDMap {
  Endomorphism map;
  DesignReport report;
};

/// Rotation plane spanned by the strong unstable eigenvector a and the stable
/// eigenvector made orthogonal to a.
std::pair<Vec, Vec> uu_s_plane(const LinearPart& a);

TheoremDMap build_theorem_d_map(const LinearPart& a, const TheoremDOptions& options = {});

}  // namespace endolab
