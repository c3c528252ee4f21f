#pragma once

#include <vector>

#include "endolab/torus.hpp"
#include "endolab/types.hpp"

namespace endolab {

/// Orthonormal basis (columns) of a k-dimensional subspace of the tangent
/// space at `base`.
class SubspaceFrame {
 public:
  SubspaceFrame() = default;
  /// Orthonormalizes the columns (Householder QR); throws on rank deficiency.
  SubspaceFrame(const Mat& columns, TorusPoint base = {});

  int dim() const { return static_cast<int>(basis_.cols()); }
  int ambient_dim() const { return static_cast<int>(basis_.rows()); }
  const Mat& basis() const { return basis_; }
  const TorusPoint& base() const { return base_; }
  Mat projector() const { return basis_ * basis_.transpose(); }

 private:
  Mat basis_;
  TorusPoint base_;
};

/// Q factor of a thin Householder QR; the first k columns span the first k inputs.
Mat thin_q(const Mat& columns);

/// Principal angles in ascending order, min(dim U, dim V) of them, in [0, pi/2].
/// Small angles are taken from sines so they stay accurate below 1e-8.
std::vector<double> principal_angles(const Mat& u, const Mat& v);
std::vector<double> principal_angles(const SubspaceFrame& u, const SubspaceFrame& v);

/// Largest principal angle: the subspace distance used for drift and clustering.
/// Returns 0 for two zero-dimensional frames.
double subspace_distance(const SubspaceFrame& u, const SubspaceFrame& v);

/// Smallest principal angle (transversality of two bundles).
double minimal_angle(const SubspaceFrame& u, const SubspaceFrame& v);

/// U ∩ V from the near-null right singular vectors of [I - P_U; I - P_V].
/// May be zero-dimensional.
SubspaceFrame intersect(const SubspaceFrame& u, const SubspaceFrame& v, double tolerance = 1e-8);

/// E^cu ∩ E^cs; throws VerificationError unless the result has dimension `c`.
SubspaceFrame center_frame(const SubspaceFrame& cu, const SubspaceFrame& cs, int c);

}  // namespace endolab
