#include "endolab/frames.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/QR>
#include <Eigen/SVD>

namespace endolab {

Mat thin_q(const Mat& columns) {
  const auto n = columns.rows();
  const auto k = columns.cols();
  Eigen::HouseholderQR<Mat> qr(columns);
  Mat q = qr.householderQ() * Mat::Identity(n, k);
  // Fix signs so that R has a positive diagonal; keeps frames deterministic.
  const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < k; ++j) {
    if (r(j, j) < 0) q.col(j) *= -1.0;
  }
  return q;
}

SubspaceFrame::SubspaceFrame(const Mat& columns, TorusPoint base) : base_(std::move(base)) {
  if (columns.cols() == 0) {
    basis_ = Mat(columns.rows(), 0);
    return;
  }
  if (columns.cols() > columns.rows()) {
    throw PreconditionError("frame has more columns than the ambient dimension");
  }
  Eigen::JacobiSVD<Mat> svd(columns);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) <= 1e-12 * std::max(1.0, sv(0))) {
    throw PreconditionError("frame columns are linearly dependent");
  }
  basis_ = thin_q(columns);
}

std::vector<double> principal_angles(const Mat& u_in, const Mat& v_in) {
  if (u_in.rows() != v_in.rows()) {
    throw PreconditionError("principal angles between subspaces of different ambient spaces");
  }
  // Arrange dim V <= dim U.
  const bool swap = v_in.cols() > u_in.cols();
  const Mat u = thin_q(swap ? v_in : u_in);
  const Mat v = thin_q(swap ? u_in : v_in);
  const auto k = v.cols();
  std::vector<double> out;
  if (k == 0 || u.cols() == 0) return out;

  Eigen::JacobiSVD<Mat> cos_svd(u.transpose() * v);
  const Mat residual = v - u * (u.transpose() * v);
  Eigen::JacobiSVD<Mat> sin_svd(residual);
  // cosines descend, sines ascend (pad when residual has fewer columns than rows)
  Vec cosines = Vec::Zero(k);
  for (Eigen::Index i = 0; i < std::min<Eigen::Index>(k, cos_svd.singularValues().size()); ++i) {
    cosines(i) = cos_svd.singularValues()(i);
  }
  std::vector<double> sines(static_cast<std::size_t>(k), 0.0);
  const auto& ss = sin_svd.singularValues();
  for (Eigen::Index i = 0; i < ss.size(); ++i) sines[static_cast<std::size_t>(i)] = ss(i);
  std::sort(sines.begin(), sines.end());

  out.reserve(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < k; ++i) {
    const double c = std::clamp(cosines(i), 0.0, 1.0);
    const double s = std::clamp(sines[static_cast<std::size_t>(i)], 0.0, 1.0);
    out.push_back(c * c >= 0.5 ? std::asin(s) : std::acos(c));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> principal_angles(const SubspaceFrame& u, const SubspaceFrame& v) {
  return principal_angles(u.basis(), v.basis());
}

double subspace_distance(const SubspaceFrame& u, const SubspaceFrame& v) {
  if (u.dim() != v.dim()) {
    throw PreconditionError("subspace distance needs equal dimensions (" +
                            std::to_string(u.dim()) + " vs " + std::to_string(v.dim()) + ")");
  }
  const auto angles = principal_angles(u, v);
  return angles.empty() ? 0.0 : angles.back();
}

double minimal_angle(const SubspaceFrame& u, const SubspaceFrame& v) {
  const auto angles = principal_angles(u, v);
  return angles.empty() ? std::numbers::pi / 2 : angles.front();
}

SubspaceFrame intersect(const SubspaceFrame& u, const SubspaceFrame& v, double tolerance) {
  const int n = u.ambient_dim();
  if (v.ambient_dim() != n) throw PreconditionError("intersection of mismatched frames");
  Mat stacked(2 * n, n);
  stacked.topRows(n) = Mat::Identity(n, n) - u.projector();
  stacked.bottomRows(n) = Mat::Identity(n, n) - v.projector();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(stacked), Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  std::vector<Eigen::Index> null_cols;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) < tolerance) null_cols.push_back(i);
  }
  Mat basis(n, static_cast<Eigen::Index>(null_cols.size()));
  for (std::size_t j = 0; j < null_cols.size(); ++j) {
    basis.col(static_cast<Eigen::Index>(j)) = svd.matrixV().col(null_cols[j]);
  }
  return SubspaceFrame(basis, u.base());
}

SubspaceFrame center_frame(const SubspaceFrame& cu, const SubspaceFrame& cs, int c) {
  if (cu.dim() + cs.dim() - cu.ambient_dim() != c) {
    throw PreconditionError("dim E^cu + dim E^cs - n does not equal the center dimension");
  }
  if (c == 0) return SubspaceFrame(Mat(cu.ambient_dim(), 0), cu.base());
  SubspaceFrame out = intersect(cu, cs);
  if (out.dim() != c) {
    throw VerificationError("E^cu ∩ E^cs has dimension " + std::to_string(out.dim()) +
                            ", expected " + std::to_string(c));
  }
  return out;
}

}  // namespace endolab
