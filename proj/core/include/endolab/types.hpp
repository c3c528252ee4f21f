#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace endolab {

/// Largest torus dimension handled by the library.
inline constexpr int kMaxDim = 3;

// Small dense types with a compile-time capacity, so that vectors, frames and
// Jacobians on T^2 and T^3 live on the stack.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;
using IntVec = Eigen::Matrix<long long, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using IntMat = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

/// Dimensions of the stable, center and unstable bundles.
struct Dims {
  int s = 0;
  int c = 0;
  int u = 0;

  int total() const { return s + c + u; }
  friend bool operator==(const Dims&, const Dims&) = default;
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An operation was called outside its documented domain.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver (Newton, frame iteration) did not converge.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// A numerical certificate or consistency check came out negative.
class VerificationError : public Error {
 public:
  using Error::Error;
};

}  // namespace endolab
