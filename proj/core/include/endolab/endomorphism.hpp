#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "endolab/torus.hpp"
#include "endolab/types.hpp"

namespace endolab {

/// Linear part A of a toral endomorphism, with its spectral data computed once.
///
/// Integral matrices define genuine maps of T^n. A real-valued matrix can be
/// wrapped with cocycle_model(); such a "map" is only a carrier for the
/// constant derivative cocycle (diagonal test systems like diag(1/2, 1, 2)) and
/// is not a well-defined self-map of the torus.
class LinearPart {
 public:
  static LinearPart integral(const IntMat& matrix);
  static LinearPart cocycle_model(const Mat& matrix);

  int dim() const { return static_cast<int>(matrix_.rows()); }
  const Mat& matrix() const { return matrix_; }
  const Mat& inverse() const { return inverse_; }
  bool is_integral() const { return integral_; }
  /// Integer entries; throws PreconditionError for cocycle models.
  const IntMat& integer_matrix() const;

  double determinant() const { return determinant_; }
  /// |det A| for integral matrices, 1 for cocycle models.
  int degree() const { return degree_; }

  /// Eigenvalues sorted by increasing modulus.
  const std::vector<std::complex<double>>& eigenvalues() const { return eigenvalues_; }
  bool is_anosov(double tolerance = 1e-9) const;
  /// Bundle dimensions read off the spectrum: s = #{|l| < 1}, u = size of
  /// the top modulus group, c = the rest.
  Dims spectral_dims() const;
  /// Three nonempty modulus groups separated by strict gaps, s below 1 and u above 1.
  bool is_partially_hyperbolic() const;

  /// Columns are unit vectors spanning E^s | E^c | E^u of A (real bases; a
  /// complex pair contributes its real and imaginary parts).
  Mat bundle_basis(const Dims& dims) const;

  /// The points A^{-1} k mod Z^n, sorted lexicographically. Index 0 is the origin.
  const std::vector<Vec>& preimage_offsets() const { return offsets_; }

 private:
  LinearPart() = default;
  void finish();

  Mat matrix_;
  Mat inverse_;
  IntMat integer_;
  bool integral_ = false;
  double determinant_ = 0.0;
  int degree_ = 1;
  std::vector<std::complex<double>> eigenvalues_;
  std::vector<Eigen::Matrix<std::complex<double>, Eigen::Dynamic, 1, 0, kMaxDim, 1>> eigenvectors_;
  std::vector<Vec> offsets_;
};

/// Smooth radial profile psi(t) = (1 - t^2)^2 on [0,1], zero beyond.
double bump_profile(double t);
double bump_profile_slope(double t);
/// K = 1 + sup|psi'| + sup|psi|, so that |phi - id|_{C^1} <= K |theta|.
double bump_c1_constant();

/// Compactly supported rotation w -> R(theta * psi(|w| / r)) w about `center`,
/// in the oriented plane spanned by the orthonormal pair (axis_a, axis_b).
struct RotationBump {
  TorusPoint center;
  double radius = 0.0;
  double angle = 0.0;
  Vec axis_a;
  Vec axis_b;
  /// "explicit" or a symbolic plane such as "uu-s"; kept for serialization.
  std::string plane = "explicit";

  /// phi(center + w) - (center + w) for a displacement w from the center.
  Vec displacement(const Vec& w) const;
  /// D phi at center + w.
  Mat jacobian(const Vec& w) const;
  /// Rotation matrix R(alpha) in the bump plane.
  Mat rotation(double alpha) const;
};

/// One Fourier mode of the additive field: phi_i(x) += amplitude * sin(2 pi <wave, x>).
struct TrigTerm {
  int component = 0;
  IntVec wave;
  double amplitude = 0.0;
};

/// f = A o phi with phi = (id + trig field) o (rotation bumps).
class Endomorphism {
 public:
  explicit Endomorphism(LinearPart linear, std::vector<RotationBump> bumps = {},
                        std::vector<TrigTerm> trig_field = {},
                        std::optional<Dims> dims = std::nullopt);

  int dim() const { return linear_.dim(); }
  int degree() const { return linear_.degree(); }
  const Dims& dims() const { return dims_; }
  const LinearPart& linear() const { return linear_; }
  const std::vector<RotationBump>& bumps() const { return bumps_; }
  const std::vector<TrigTerm>& trig_field() const { return trig_; }
  bool has_perturbation() const { return !bumps_.empty() || !trig_.empty(); }
  /// False for cocycle models, whose evaluate() is only a deterministic stand-in.
  bool is_torus_map() const { return linear_.is_integral(); }

  TorusPoint evaluate(const TorusPoint& x) const;
  Mat derivative(const TorusPoint& x) const;

  /// The periodic lift phi~ of the perturbation, acting on R^n.
  LiftPoint perturb(const LiftPoint& v) const;
  Mat perturbation_jacobian(const LiftPoint& v) const;
  /// f~(v) = A phi~(v), the lift of f to the universal cover.
  LiftPoint lift_evaluate(const LiftPoint& v) const;

  /// Upper bound on |phi - id|_{C^1}: K_psi * max|theta| plus the trig-field bound.
  double c1_distance_bound() const;
  /// Smallest |det Df| over the given points (local diffeomorphism check).
  double min_abs_jacobian(const std::vector<TorusPoint>& points) const;

 private:
  LinearPart linear_;
  std::vector<RotationBump> bumps_;
  std::vector<TrigTerm> trig_;
  Dims dims_;
};

/// Lower bound tau on the distance between distinct points with the same image.
/// Uses the linear offsets and subtracts twice the largest bump radius.
/// Throws PreconditionError when deg f = 1.
double separation_constant(const Endomorphism& f);

/// Minimal torus distance between distinct preimage offsets of the linear part.
double linear_separation(const LinearPart& a);

}  // namespace endolab
