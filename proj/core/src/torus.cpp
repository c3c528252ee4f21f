#include "endolab/torus.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace endolab {

double reduce_unit(double value) {
  double r = value - std::floor(value);
  // value = -tiny rounds to exactly 1.0
  if (r >= 1.0) r = 0.0;
  return r;
}

TorusPoint::TorusPoint(const Vec& coords) : coords_(coords) {
  if (coords.size() < 1 || coords.size() > kMaxDim) {
    throw PreconditionError("torus dimension must be between 1 and 3, got " +
                            std::to_string(coords.size()));
  }
  for (int i = 0; i < coords_.size(); ++i) coords_(i) = reduce_unit(coords_(i));
}

TorusPoint::TorusPoint(std::initializer_list<double> coords)
    : TorusPoint(Eigen::Map<const Eigen::VectorXd>(coords.begin(),
                                                   static_cast<Eigen::Index>(coords.size()))
                     .eval()) {}

TorusPoint TorusPoint::origin(int dim) { return TorusPoint(Vec::Zero(dim)); }

TorusPoint project(const LiftPoint& v) { return TorusPoint(v.coords); }

LiftPoint lift(const TorusPoint& p) { return LiftPoint{p.coords()}; }

Vec torus_displacement(const TorusPoint& from, const TorusPoint& to) {
  if (from.dim() != to.dim()) {
    throw PreconditionError("torus points of different dimension");
  }
  const int n = from.dim();
  const Vec raw = to.coords() - from.coords();
  // Both points are reduced, so the nearest translate is among the 3^n
  // candidates k in {-1,0,1}^n.
  Vec best = raw;
  double best_norm = std::numeric_limits<double>::infinity();
  int combos = 1;
  for (int i = 0; i < n; ++i) combos *= 3;
  for (int code = 0; code < combos; ++code) {
    Vec candidate = raw;
    int rest = code;
    for (int i = 0; i < n; ++i) {
      candidate(i) -= static_cast<double>(rest % 3 - 1);
      rest /= 3;
    }
    const double norm = candidate.squaredNorm();
    if (norm < best_norm) {
      best_norm = norm;
      best = candidate;
    }
  }
  return best;
}

double torus_distance(const TorusPoint& p, const TorusPoint& q) {
  return torus_displacement(p, q).norm();
}

double torus_diameter(int dim) { return std::sqrt(static_cast<double>(dim)) / 2.0; }

TruncatedBiorbit::TruncatedBiorbit(int depth, std::vector<TorusPoint> points)
    : depth_(depth), points_(std::move(points)) {
  if (depth < 0 || points_.size() != static_cast<std::size_t>(2 * depth + 1)) {
    throw PreconditionError("truncated biorbit of depth " + std::to_string(depth) +
                            " needs " + std::to_string(2 * depth + 1) + " points");
  }
  for (const auto& p : points_) {
    if (p.dim() != points_.front().dim()) {
      throw PreconditionError("truncated biorbit mixes torus dimensions");
    }
  }
}

const TorusPoint& TruncatedBiorbit::at(int i) const {
  if (i < -depth_ || i > depth_) {
    throw PreconditionError("biorbit index " + std::to_string(i) + " outside [-" +
                            std::to_string(depth_) + ", " + std::to_string(depth_) + "]");
  }
  return points_[static_cast<std::size_t>(i + depth_)];
}

OrbitDistance orbit_distance(const TruncatedBiorbit& a, const TruncatedBiorbit& b) {
  if (a.depth() != b.depth()) {
    throw PreconditionError("orbit_distance: truncation depths differ (" +
                            std::to_string(a.depth()) + " vs " + std::to_string(b.depth()) +
                            ")");
  }
  const int m = a.depth();
  OrbitDistance out;
  for (int i = -m; i <= m; ++i) {
    out.value += torus_distance(a.at(i), b.at(i)) / std::ldexp(1.0, std::abs(i));
  }
  // sum over |i| > m of diam / 2^|i| = 2 * diam * 2^-m
  out.truncation_bound = torus_diameter(a.at(0).dim()) * std::ldexp(1.0, -m + 1);
  return out;
}

}  // namespace endolab
