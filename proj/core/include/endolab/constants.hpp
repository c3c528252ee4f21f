#pragma once

#include <optional>
#include <string>
#include <vector>

#include "endolab/splitting.hpp"

namespace endolab {

/// Rates nu < gamma1 <= gamma2 < mu and transient constant C, for dims (s, c, u).
struct HyperbolicityConstants {
  double nu = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double mu = 0.0;
  double C = 1.0;
  Dims dims;

  /// Empty when 0 < nu < gamma1 <= gamma2 < mu, nu < 1 < mu and C >= 1.
  std::string violation() const;
  bool valid() const { return violation().empty(); }
};

struct ConstantsOptions {
  /// Largest n for which Df^n is measured on each bundle.
  int depth = 20;
  /// C is the measured envelope times (1 + slack).
  double envelope_slack = 1e-6;
  SplittingOptions splitting;
};

/// Extremal growth of Df^n on each bundle, n = 0..depth, over all samples.
struct RateEnvelope {
  std::vector<double> s_max, c_max, c_min, u_min;
};

struct ConstantsFit {
  HyperbolicityConstants constants;
  bool valid = false;
  std::string violation;
  RateEnvelope envelope;
  int samples = 0;
};

/// Orthonormal bundle frames at x_0..x_depth along the forward orbit of x
/// (unstable side on the zero branch pushed forward).
struct BundleTrack {
  std::vector<TorusPoint> orbit;
  std::vector<Mat> s, c, u;
};

BundleTrack bundle_track(const Endomorphism& f, const TorusPoint& x, int depth,
                         const SplittingOptions& options = {});

/// Fits exponential rates to the per-n envelopes and takes C as the largest
/// multiplicative excess. Never throws on a bad fit; see `valid`.
ConstantsFit estimate_constants(const Endomorphism& f, const std::vector<TorusPoint>& samples,
                                const ConstantsOptions& options = {});

/// Smallest N with C nu^N < 1 and (C^{-1} mu^N)^2 > 1, or nullopt above max_n.
std::optional<int> minimal_horizon(const HyperbolicityConstants& k, int max_n = 64);

/// G(x) = sum_{j<N} (Df^j_x)^T Df^j_x.
Mat metric_tensor(const Endomorphism& f, const TorusPoint& x, int horizon);

struct AdaptedMetricOptions {
  int max_horizon = 64;
  std::optional<int> forced_horizon;
  SplittingOptions splitting;
};

/// Smallest one-step margin of each inequality over the samples, with witnesses.
struct OneStepMargins {
  double s = 0.0;        // nu' - |Df v^s|'/|v^s|'
  double c_lower = 0.0;  // |Df v^c|'/|v^c|' - gamma1'
  double c_upper = 0.0;  // gamma2' - |Df v^c|'/|v^c|'
  double u = 0.0;        // |Df v^u|'/|v^u|' - mu'
  TorusPoint witness_s, witness_c_lower, witness_c_upper, witness_u;

  double min() const;
};

struct AdaptedMetric {
  TorusPoint x;
  int horizon = 0;
  Mat G;
  /// <v,v> <= <v,v>' <= K <v,v> over the samples.
  double K = 1.0;
  /// Per-bundle extremes of the Rayleigh quotient of G.
  double L_s = 1.0, K_s = 1.0, L_c = 1.0, K_c = 1.0, L_u = 1.0, K_u = 1.0;
  double nu = 0.0, gamma1 = 0.0, gamma2 = 0.0, mu = 0.0;
  bool chain_holds = false;
  OneStepMargins margins;
  int samples = 0;

  /// The one-step bounds are non-strict; exact systems sit on them up to rounding.
  bool holds() const { return chain_holds && margins.min() >= -1e-12; }
};

/// Builds the Birkhoff-sum metric, picks the horizon N and checks the one-step
/// inequalities at every sample. G is reported at x; K and the Rayleigh bounds
/// come from the samples, which should be the points the constants were fitted on.
/// Throws ConvergenceError when no N <= max works.
AdaptedMetric adapted_metric(const Endomorphism& f, const TorusPoint& x,
                             const std::vector<TorusPoint>& samples,
                             const HyperbolicityConstants& constants,
                             const AdaptedMetricOptions& options = {});

/// The derived one-step constants for horizon N from per-bundle Rayleigh bounds.
void derive_adapted_constants(const HyperbolicityConstants& k, AdaptedMetric& m);

}  // namespace endolab
