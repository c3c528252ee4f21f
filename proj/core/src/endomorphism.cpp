#include "endolab/endomorphism.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/LU>

namespace endolab {

double bump_profile(double t) {
  if (t >= 1.0) return 0.0;
  const double q = 1.0 - t * t;
  return q * q;
}

double bump_profile_slope(double t) {
  if (t >= 1.0) return 0.0;
  return -4.0 * t * (1.0 - t * t);
}

double bump_c1_constant() {
  // sup|psi'| is attained at t = 1/sqrt(3): 8 / (3 sqrt 3).
  return 1.0 + 8.0 / (3.0 * std::sqrt(3.0)) + 1.0;
}

Mat RotationBump::rotation(double alpha) const {
  const int n = static_cast<int>(axis_a.size());
  const Mat plane = axis_a * axis_a.transpose() + axis_b * axis_b.transpose();
  const Mat generator = axis_b * axis_a.transpose() - axis_a * axis_b.transpose();
  return Mat::Identity(n, n) + (std::cos(alpha) - 1.0) * plane + std::sin(alpha) * generator;
}

Vec RotationBump::displacement(const Vec& w) const {
  const double rho = w.norm();
  if (rho >= radius) return Vec::Zero(w.size());
  const double alpha = angle * bump_profile(rho / radius);
  const Vec pa = axis_a * axis_a.dot(w) + axis_b * axis_b.dot(w);
  const Vec jw = axis_b * axis_a.dot(w) - axis_a * axis_b.dot(w);
  return (std::cos(alpha) - 1.0) * pa + std::sin(alpha) * jw;
}

Mat RotationBump::jacobian(const Vec& w) const {
  const int n = static_cast<int>(w.size());
  const double rho = w.norm();
  if (rho >= radius) return Mat::Identity(n, n);
  const double t = rho / radius;
  const double alpha = angle * bump_profile(t);
  // grad alpha = theta psi'(t) w / (r rho) = -4 theta (1 - t^2) w / r^2
  const Vec grad = -4.0 * angle * (1.0 - t * t) / (radius * radius) * w;
  const Mat plane = axis_a * axis_a.transpose() + axis_b * axis_b.transpose();
  const Mat generator = axis_b * axis_a.transpose() - axis_a * axis_b.transpose();
  const Mat d_rotation = -std::sin(alpha) * plane + std::cos(alpha) * generator;
  return rotation(alpha) + (d_rotation * w) * grad.transpose();
}

Endomorphism::Endomorphism(LinearPart linear, std::vector<RotationBump> bumps,
                           std::vector<TrigTerm> trig_field, std::optional<Dims> dims)
    : linear_(std::move(linear)), bumps_(std::move(bumps)), trig_(std::move(trig_field)) {
  const int n = linear_.dim();
  dims_ = dims.value_or(linear_.spectral_dims());
  if (dims_.s < 0 || dims_.c < 0 || dims_.u < 0 || dims_.total() != n) {
    throw PreconditionError("declared bundle dimensions must be nonnegative and sum to " +
                            std::to_string(n));
  }

  for (auto& b : bumps_) {
    if (b.center.dim() != n || b.axis_a.size() != n || b.axis_b.size() != n) {
      throw PreconditionError("rotation bump dimension does not match the linear part");
    }
    if (!(b.radius > 0.0 && b.radius < 0.5)) {
      throw PreconditionError("rotation bump radius must lie in (0, 1/2)");
    }
    const double na = b.axis_a.norm();
    if (na < 1e-12) throw PreconditionError("rotation plane vector is zero");
    b.axis_a /= na;
    b.axis_b -= b.axis_a * b.axis_a.dot(b.axis_b);
    const double nb = b.axis_b.norm();
    if (nb < 1e-12) throw PreconditionError("rotation plane vectors are parallel");
    b.axis_b /= nb;
  }
  for (std::size_t i = 0; i < bumps_.size(); ++i) {
    for (std::size_t j = i + 1; j < bumps_.size(); ++j) {
      if (torus_distance(bumps_[i].center, bumps_[j].center) <
          bumps_[i].radius + bumps_[j].radius) {
        throw PreconditionError("rotation bump balls " + std::to_string(i) + " and " +
                                std::to_string(j) + " overlap");
      }
    }
  }

  double trig_c1 = 0.0;
  for (const auto& t : trig_) {
    if (t.component < 0 || t.component >= n || t.wave.size() != n) {
      throw PreconditionError("trig term has wrong component or wave vector size");
    }
    trig_c1 += 2.0 * std::numbers::pi * std::abs(t.amplitude) * t.wave.cast<double>().norm();
  }
  // id + trig is a diffeomorphism when its derivative stays within 1 of the identity.
  if (trig_c1 >= 1.0) {
    throw PreconditionError("trig field C^1 size " + std::to_string(trig_c1) +
                            " >= 1; perturbation is not guaranteed to be a diffeomorphism");
  }
}

LiftPoint Endomorphism::perturb(const LiftPoint& v) const {
  Vec y = v.coords;
  if (!bumps_.empty()) {
    const TorusPoint x = project(v);
    for (const auto& b : bumps_) {
      const Vec w = torus_displacement(b.center, x);
      if (w.norm() < b.radius) {
        y += b.displacement(w);
        break;  // bump balls are disjoint
      }
    }
  }
  Vec out = y;
  for (const auto& t : trig_) {
    out(t.component) +=
        t.amplitude * std::sin(2.0 * std::numbers::pi * t.wave.cast<double>().dot(y));
  }
  return LiftPoint{out};
}

Mat Endomorphism::perturbation_jacobian(const LiftPoint& v) const {
  const int n = dim();
  Mat bump_jac = Mat::Identity(n, n);
  Vec y = v.coords;
  if (!bumps_.empty()) {
    const TorusPoint x = project(v);
    for (const auto& b : bumps_) {
      const Vec w = torus_displacement(b.center, x);
      if (w.norm() < b.radius) {
        bump_jac = b.jacobian(w);
        y += b.displacement(w);
        break;
      }
    }
  }
  if (trig_.empty()) return bump_jac;
  Mat trig_jac = Mat::Identity(n, n);
  for (const auto& t : trig_) {
    const Vec k = t.wave.cast<double>();
    const double phase = 2.0 * std::numbers::pi * k.dot(y);
    trig_jac.row(t.component) +=
        (t.amplitude * 2.0 * std::numbers::pi * std::cos(phase)) * k.transpose();
  }
  return trig_jac * bump_jac;
}

LiftPoint Endomorphism::lift_evaluate(const LiftPoint& v) const {
  return LiftPoint{linear_.matrix() * perturb(v).coords};
}

TorusPoint Endomorphism::evaluate(const TorusPoint& x) const {
  return project(lift_evaluate(lift(x)));
}

Mat Endomorphism::derivative(const TorusPoint& x) const {
  if (!has_perturbation()) return linear_.matrix();
  return linear_.matrix() * perturbation_jacobian(lift(x));
}

double Endomorphism::c1_distance_bound() const {
  double theta = 0.0;
  for (const auto& b : bumps_) theta = std::max(theta, std::abs(b.angle));
  double trig = 0.0;
  for (const auto& t : trig_) {
    trig += std::abs(t.amplitude) *
            (1.0 + 2.0 * std::numbers::pi * t.wave.cast<double>().norm());
  }
  return bump_c1_constant() * theta + trig;
}

double Endomorphism::min_abs_jacobian(const std::vector<TorusPoint>& points) const {
  double out = std::numeric_limits<double>::infinity();
  for (const auto& p : points) out = std::min(out, std::abs(derivative(p).determinant()));
  return out;
}

double separation_constant(const Endomorphism& f) {
  const double tau = linear_separation(f.linear());
  double max_radius = 0.0;
  for (const auto& b : f.bumps()) max_radius = std::max(max_radius, b.radius);
  return std::max(tau - 2.0 * max_radius, 1e-12);
}

}  // namespace endolab
