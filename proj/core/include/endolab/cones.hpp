#pragma once

#include <cstdint>
#include <string>

#include "endolab/splitting.hpp"

namespace endolab {

enum class ConeFamily { s, u, cs, cu };
enum class ConeMetric {
  /// Norms measured in the coordinates of the reference splitting basis.
  adapted,
  /// Euclidean norms, complement taken orthogonal to the cone axis.
  flat,
};
enum class ReferenceSource { linear, computed };

std::string to_string(ConeFamily family);
std::string to_string(ConeMetric metric);
std::string to_string(ReferenceSource source);
ConeMetric parse_cone_metric(const std::string& name);
ReferenceSource parse_reference_source(const std::string& name);

struct ConeField {
  double beta = 0.4;
  ConeFamily family = ConeFamily::u;
  ReferenceSource source = ReferenceSource::linear;
  ConeMetric metric = ConeMetric::adapted;

  ConeField() = default;
  ConeField(double beta, ConeFamily family, ReferenceSource source = ReferenceSource::linear,
            ConeMetric metric = ConeMetric::adapted);
};

/// Unit bases of E^s, E^c, E^u at a point, side by side: [s | c | u].
struct ReferenceSplitting {
  Mat basis;
  Dims dims;
};

/// Columns of the cone coordinates at a point: first the axis E, then the
/// complement F. Norms of a vector v are those of B^{-1} v.
Mat cone_coordinates(const ReferenceSplitting& ref, ConeFamily family, ConeMetric metric);
int cone_axis_dim(const Dims& dims, ConeFamily family);

/// |v_F| <= beta |v_E| with v decomposed in the cone coordinates. Throws on v = 0.
bool in_cone(const ConeField& cone, const ReferenceSplitting& ref, const Vec& v);

struct ConeOptions {
  double beta = 0.4;
  int grid = 32;
  int samples_per_cone = 64;
  ReferenceSource source = ReferenceSource::linear;
  ConeMetric metric = ConeMetric::adapted;
  std::uint64_t seed = 0;
  SplittingOptions splitting;
};

struct MarginEntry {
  double value = 0.0;
  TorusPoint witness;
};

/// Sampling-based evidence for the cone criterion; not an interval-arithmetic proof.
struct Certificate {
  bool pass = false;
  /// beta minus the largest image ratio |w_F| / |w_E| for each family.
  MarginEntry invariance_s, invariance_u, invariance_cs, invariance_cu;
  /// 1 - sup_s, inf_u - 1, inf_cu - sup_s, inf_u - sup_cs.
  MarginEntry rate_s, rate_u, rate_cu, rate_cs;
  /// Measured one-step rates: contraction in s and cs cones, expansion in u and cu cones.
  double sup_s = 0.0, sup_cs = 0.0, inf_u = 0.0, inf_cu = 0.0;
  int grid = 0;
  int dim = 0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  ConeMetric metric = ConeMetric::adapted;
  ReferenceSource source = ReferenceSource::linear;
  int vectors_per_cone = 0;

  double min_margin() const;
};

Certificate verify_cone_conditions(const Endomorphism& f, const ConeOptions& options = {});

/// Boundary samples (y_E, y_F) with |y_F| = beta |y_E| = beta, in cone coordinates.
std::vector<Vec> cone_boundary_samples(int axis_dim, int dim, double beta, int count,
                                       std::uint64_t seed);

}  // namespace endolab
