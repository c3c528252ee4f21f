#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "endolab/branch.hpp"
#include "endolab/endomorphism.hpp"
#include "endolab/frames.hpp"

namespace endolab {

enum class CocycleDirection {
  /// orbit = (x_0, ..., x_{k-1}); product Df_{x_{k-1}} ... Df_{x_0}.
  forward,
  /// orbit = (x_0, x_{-1}, ..., x_{-m}); product Df_{x_{-1}} ... Df_{x_{-m}}.
  backward_pushforward,
};

/// The true product is matrix * exp(log_scale).
struct CocycleProduct {
  Mat matrix;
  double log_scale = 0.0;

  Mat value() const;
};

CocycleProduct cocycle_product(const Endomorphism& f, const std::vector<TorusPoint>& orbit,
                               CocycleDirection direction);

/// Deterministic pseudo-random orthonormal n x n frame.
Mat generic_frame(int n, std::uint64_t seed);

struct SplittingOptions {
  int forward_depth = 40;
  int backward_depth = 40;
  int drift_window = 5;
  std::uint64_t seed = 0x5eedf00dULL;
  /// Residual above this triggers a retry of the pushed frames with a new seed.
  double retry_residual = 1e-3;
  int max_retries = 3;
  /// Drift residuals cost a second pass per frame; grid scans turn them off.
  bool residuals = true;
};

struct StableFrames {
  SubspaceFrame s;
  SubspaceFrame cs;
  double residual_s = 0.0;
  double residual_cs = 0.0;
  /// Accumulated log |R_ii| of the inverse cocycle sweep (descending expansion of Df^{-m}).
  std::vector<double> log_growth;
};

/// E^s and E^cs at x from the forward orbit alone, via a backward QR sweep of
/// Df^{-1} starting from a generic frame at f^m(x).
StableFrames stable_and_cs_frames(const Endomorphism& f, const TorusPoint& x,
                                  const SplittingOptions& options = {});

/// The inverse sweep along an explicit forward orbit (x_0, ..., x_M): entry j is
/// the full orthonormal frame at x_j, whose first s (s+c) columns estimate
/// E^s (E^cs) with depth M - j.
std::vector<Mat> inverse_sweep(const Endomorphism& f, const std::vector<TorusPoint>& orbit,
                               const Mat& start, std::vector<double>* log_growth = nullptr);

struct UnstableFrames {
  SubspaceFrame u;
  SubspaceFrame cu;
  double residual_u = 0.0;
  double residual_cu = 0.0;
  std::uint64_t seed_used = 0;
};

/// E^u and E^cu at x_0 by pushing a generic frame forward from x_{-m}.
UnstableFrames unstable_and_cu_frames(const Endomorphism& f, const BackwardOrbit& orbit,
                                      const SplittingOptions& options = {});

/// Pushes the given columns from x_{-m} to x_0 with QR after every step.
SubspaceFrame push_frame(const Endomorphism& f, const BackwardOrbit& orbit, const Mat& initial);

/// Pushes a frame along a forward orbit (x_0, ..., x_k) and returns the frame at x_k.
SubspaceFrame push_forward(const Endomorphism& f, const std::vector<TorusPoint>& orbit,
                           const Mat& initial);

struct SplittingEstimate {
  TorusPoint point;
  Dims dims;
  SubspaceFrame s, c, u, cs, cu;
  double residual_s = 0.0;
  double residual_c = 0.0;
  double residual_u = 0.0;
  double residual_cs = 0.0;
  double residual_cu = 0.0;
  BranchCode code;
  int forward_depth = 0;
  /// Smallest principal angle between any two of E^s, E^c, E^u.
  double transversality = 0.0;
  /// |det [E^s | E^c | E^u]|.
  double spanning_volume = 0.0;

  double max_residual() const;
};

/// Full splitting at x. The u/cu side follows `code` (its length is the backward depth).
SplittingEstimate compute_splitting(const Endomorphism& f, const TorusPoint& x,
                                    const BranchCode& code, const SplittingOptions& options = {});

/// Zero code of the configured backward depth.
BranchCode zero_code(const SplittingOptions& options);

/// E^cs(x_{-k}) computed from forward data and pushed forward k steps along the
/// branch to x_0. Agrees with stable_and_cs_frames(x_0) when E^cs is branch-free.
SubspaceFrame pushed_cs_frame(const Endomorphism& f, const BackwardOrbit& orbit, int push_steps,
                              const SplittingOptions& options = {});

struct AngleSeries {
  std::vector<int> n;
  std::vector<double> angle;
  double slope = 0.0;
  /// Number of samples used for the fit.
  int fitted = 0;
  /// E_1 = E_2 at the start; slope undefined.
  bool degenerate = false;
};

struct AngleDecayOptions {
  int n_max = 60;
  /// Fit window for log(angle) vs n. Below ~1e-9 the angle of unit frames is
  /// rounding-dominated; above ~1e-3 the atan curvature bends the line.
  double fit_floor = 1e-9;
  double fit_ceiling = 1e-3;
  /// Keep pushed center frames inside E^cs along the orbit; otherwise rounding
  /// errors grow at the unstable rate and swamp the center dynamics.
  bool confine_center = true;
  SplittingOptions splitting;
};

/// angle(Df^n E_1, Df^n E_2) for n = 0..n_max and the fitted log-slope.
AngleSeries angle_decay_series(const Endomorphism& f, const TorusPoint& x,
                               const SubspaceFrame& e1, const SubspaceFrame& e2,
                               const AngleDecayOptions& options = {});

struct TransversalityFloor {
  double floor = 0.0;
  TorusPoint witness;
  int grid = 0;
};

/// Minimum over a grid^n lattice of cell centers of the pairwise minimal angles
/// among E^s, E^c, E^u (zero code branch).
TransversalityFloor transversality_floor(const Endomorphism& f, int grid,
                                         const SplittingOptions& options = {});

}  // namespace endolab
