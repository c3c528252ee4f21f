#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "endolab/endomorphism.hpp"

namespace endolab {
namespace {

long long integer_determinant(const IntMat& a) {
  switch (a.rows()) {
    case 1:
      return a(0, 0);
    case 2:
      return a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    case 3:
      return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
             a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
             a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
    default:
      throw PreconditionError("linear part must be 1x1, 2x2 or 3x3");
  }
}

// adj(A), so that A * adj(A) = det(A) * I.
IntMat adjugate(const IntMat& a) {
  const auto n = a.rows();
  IntMat adj(n, n);
  if (n == 1) {
    adj(0, 0) = 1;
    return adj;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      IntMat minor(n - 1, n - 1);
      for (Eigen::Index r = 0, mr = 0; r < n; ++r) {
        if (r == i) continue;
        for (Eigen::Index c = 0, mc = 0; c < n; ++c) {
          if (c == j) continue;
          minor(mr, mc++) = a(r, c);
        }
        ++mr;
      }
      const long long sign = ((i + j) % 2 == 0) ? 1 : -1;
      adj(j, i) = sign * integer_determinant(minor);
    }
  }
  return adj;
}

long long positive_mod(long long value, long long modulus) {
  const long long r = value % modulus;
  return r < 0 ? r + modulus : r;
}

}  // namespace

LinearPart LinearPart::integral(const IntMat& matrix) {
  if (matrix.rows() != matrix.cols() || matrix.rows() < 1 || matrix.rows() > kMaxDim) {
    throw PreconditionError("linear part must be a square matrix of size 1..3");
  }
  LinearPart out;
  out.integer_ = matrix;
  out.integral_ = true;
  out.matrix_ = matrix.cast<double>();
  const long long det = integer_determinant(matrix);
  if (det == 0) throw PreconditionError("linear part is singular (det A = 0)");
  out.determinant_ = static_cast<double>(det);
  out.degree_ = static_cast<int>(std::llabs(det));

  // A^{-1} k = adj(A) k / det. Since |det| Z^n is contained in A Z^n, the box
  // {0..|det|-1}^n meets every coset of Z^n / A Z^n.
  const int n = static_cast<int>(matrix.rows());
  const long long d = std::llabs(det);
  const long long sign = det > 0 ? 1 : -1;
  const IntMat adj = adjugate(matrix);
  std::set<std::vector<long long>> numerators;
  long long combos = 1;
  for (int i = 0; i < n; ++i) combos *= d;
  for (long long code = 0; code < combos; ++code) {
    IntVec k(n);
    long long rest = code;
    for (int i = 0; i < n; ++i) {
      k(i) = rest % d;
      rest /= d;
    }
    const IntVec num = adj * k;
    std::vector<long long> reduced(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) reduced[i] = positive_mod(sign * num(i), d);
    numerators.insert(reduced);
  }
  if (numerators.size() != static_cast<std::size_t>(d)) {
    throw Error("internal: found " + std::to_string(numerators.size()) +
                " preimage offsets for degree " + std::to_string(d));
  }
  for (const auto& num : numerators) {  // std::set order is lexicographic
    Vec o(n);
    for (int i = 0; i < n; ++i) o(i) = static_cast<double>(num[i]) / static_cast<double>(d);
    out.offsets_.push_back(o);
  }
  out.finish();
  return out;
}

LinearPart LinearPart::cocycle_model(const Mat& matrix) {
  if (matrix.rows() != matrix.cols() || matrix.rows() < 1 || matrix.rows() > kMaxDim) {
    throw PreconditionError("linear part must be a square matrix of size 1..3");
  }
  LinearPart out;
  out.matrix_ = matrix;
  out.integral_ = false;
  out.determinant_ = matrix.determinant();
  if (std::abs(out.determinant_) < 1e-300) {
    throw PreconditionError("linear part is singular (det A = 0)");
  }
  out.degree_ = 1;
  out.offsets_.push_back(Vec::Zero(matrix.rows()));
  out.finish();
  return out;
}

void LinearPart::finish() {
  inverse_ = matrix_.inverse();
  Eigen::EigenSolver<Eigen::MatrixXd> solver(Eigen::MatrixXd(matrix_), true);
  const auto n = matrix_.rows();
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  const auto values = solver.eigenvalues();
  const auto vectors = solver.eigenvectors();
  // Sort by modulus; conjugate pairs keep positive imaginary part first.
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const double ma = std::abs(values(a));
    const double mb = std::abs(values(b));
    if (std::abs(ma - mb) > 1e-12 * std::max(1.0, ma)) return ma < mb;
    return values(a).imag() > values(b).imag();
  });
  for (int idx : order) {
    eigenvalues_.push_back(values(idx));
    eigenvectors_.push_back(vectors.col(idx));
  }
}

const IntMat& LinearPart::integer_matrix() const {
  if (!integral_) throw PreconditionError("cocycle model has no integer matrix");
  return integer_;
}

bool LinearPart::is_anosov(double tolerance) const {
  return std::none_of(eigenvalues_.begin(), eigenvalues_.end(), [&](const auto& l) {
    return std::abs(std::abs(l) - 1.0) <= tolerance;
  });
}

Dims LinearPart::spectral_dims() const {
  constexpr double tol = 1e-9;
  const int n = dim();
  Dims d;
  for (const auto& l : eigenvalues_) {
    if (std::abs(l) < 1.0 - tol) ++d.s;
  }
  if (d.s == n) return d;
  const double top = std::abs(eigenvalues_.back());
  for (const auto& l : eigenvalues_) {
    if (std::abs(std::abs(l) - top) <= tol * top) ++d.u;
  }
  d.u = std::min(d.u, n - d.s);
  d.c = n - d.s - d.u;
  return d;
}

bool LinearPart::is_partially_hyperbolic() const {
  constexpr double tol = 1e-9;
  const Dims d = spectral_dims();
  if (d.s < 1 || d.c < 1 || d.u < 1) return false;
  const auto mod = [&](int i) { return std::abs(eigenvalues_[static_cast<std::size_t>(i)]); };
  const double s_max = mod(d.s - 1);
  const double c_min = mod(d.s);
  const double c_max = mod(d.s + d.c - 1);
  const double u_min = mod(d.s + d.c);
  return s_max < 1.0 && u_min > 1.0 && s_max + tol < c_min && c_max + tol < u_min;
}

Mat LinearPart::bundle_basis(const Dims& dims) const {
  const int n = dim();
  if (dims.total() != n) {
    throw PreconditionError("bundle dimensions do not sum to the torus dimension");
  }
  const int boundaries[2] = {dims.s, dims.s + dims.c};
  Mat basis(n, n);
  for (int i = 0; i < n; ++i) {
    const auto& l = eigenvalues_[static_cast<std::size_t>(i)];
    const auto& v = eigenvectors_[static_cast<std::size_t>(i)];
    if (std::abs(l.imag()) <= 1e-12 * std::max(1.0, std::abs(l))) {
      basis.col(i) = v.real();
    } else if (l.imag() > 0) {
      if (i + 1 >= n || i + 1 == boundaries[0] || i + 1 == boundaries[1]) {
        throw PreconditionError("bundle split separates a complex conjugate eigenpair");
      }
      basis.col(i) = v.real();
      basis.col(i + 1) = v.imag();
      ++i;
      continue;
    } else {
      basis.col(i) = v.imag();
    }
  }
  for (int i = 0; i < n; ++i) basis.col(i).normalize();
  return basis;
}

double linear_separation(const LinearPart& a) {
  if (a.degree() < 2) {
    throw PreconditionError("separation constant needs degree >= 2 (map is invertible over Z)");
  }
  const TorusPoint zero = TorusPoint::origin(a.dim());
  double tau = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < a.preimage_offsets().size(); ++i) {
    tau = std::min(tau, torus_distance(TorusPoint(a.preimage_offsets()[i]), zero));
  }
  return tau;
}

}  // namespace endolab
