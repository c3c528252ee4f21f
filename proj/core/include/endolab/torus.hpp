#pragma once

#include <initializer_list>
#include <vector>

#include "endolab/types.hpp"

namespace endolab {

/// A point of the flat torus T^n, coordinates reduced into [0,1).
class TorusPoint {
 public:
  TorusPoint() = default;
  explicit TorusPoint(const Vec& coords);
  TorusPoint(std::initializer_list<double> coords);

  static TorusPoint origin(int dim);

  int dim() const { return static_cast<int>(coords_.size()); }
  const Vec& coords() const { return coords_; }
  double operator[](int i) const { return coords_(i); }

  friend bool operator==(const TorusPoint& a, const TorusPoint& b) {
    return a.coords_.size() == b.coords_.size() && a.coords_ == b.coords_;
  }

 private:
  Vec coords_;
};

/// A point of the universal cover R^n.
struct LiftPoint {
  Vec coords;
};

/// Reduces a real number into [0,1) with a floor-based modulus.
double reduce_unit(double value);

TorusPoint project(const LiftPoint& v);

/// The representative of p inside the fundamental domain [0,1)^n.
LiftPoint lift(const TorusPoint& p);

/// Shortest lifted displacement from `from` to `to`, i.e. the vector d with
/// |d| = torus_distance(from, to) and project(lift(from) + d) = to.
Vec torus_displacement(const TorusPoint& from, const TorusPoint& to);

/// Flat distance on T^n. Throws PreconditionError on dimension mismatch.
double torus_distance(const TorusPoint& p, const TorusPoint& q);

/// Diameter sqrt(n)/2 of the flat torus T^n.
double torus_diameter(int dim);

/// Open ball B(center, radius) on the torus.
struct Ball {
  TorusPoint center;
  double radius = 0.0;

  bool contains(const TorusPoint& p) const { return torus_distance(center, p) < radius; }
};

/// Orbit segment (x_{-m}, ..., x_0, ..., x_m) of a point of the inverse limit.
class TruncatedBiorbit {
 public:
  TruncatedBiorbit(int depth, std::vector<TorusPoint> points);

  int depth() const { return depth_; }
  /// The i-th coordinate x_i, -depth <= i <= depth.
  const TorusPoint& at(int i) const;
  const std::vector<TorusPoint>& points() const { return points_; }

 private:
  int depth_;
  std::vector<TorusPoint> points_;
};

struct OrbitDistance {
  double value = 0.0;
  /// Upper bound on the neglected tail sum over |i| > depth.
  double truncation_bound = 0.0;
};

/// Weighted inverse-limit distance sum_{|i|<=m} d(x_i, y_i) / 2^{|i|}.
OrbitDistance orbit_distance(const TruncatedBiorbit& a, const TruncatedBiorbit& b);

}  // namespace endolab
