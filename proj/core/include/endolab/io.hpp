#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "endolab/constants.hpp"
#include "endolab/cones.hpp"
#include "endolab/multiplicity.hpp"
#include "endolab/theorem_d.hpp"

namespace endolab {

/// Invalid input document. `pointer` is the JSON pointer of the offending value.
class ConfigError : public Error {
 public:
  ConfigError(std::string pointer, const std::string& message)
      : Error(message), pointer_(std::move(pointer)) {}
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

/// Serializable description of f = A o phi.
struct MapSpec {
  /// Real entries; integral unless cocycle_model.
  Mat matrix;
  bool cocycle_model = false;
  std::vector<RotationBump> bumps;
  std::vector<TrigTerm> trig_field;
  std::optional<Dims> dims;
  std::optional<DesignPoint> design;
};

Endomorphism build_map(const MapSpec& spec);
MapSpec map_spec_of(const Endomorphism& f, std::optional<DesignPoint> design = std::nullopt);

nlohmann::json to_json(const MapSpec& spec);
/// Strict reader: unknown keys and malformed values raise ConfigError with a
/// pointer below `where`.
MapSpec map_spec_from_json(const nlohmann::json& j, const std::string& where = "");

nlohmann::json to_json(const TorusPoint& p);
TorusPoint point_from_json(const nlohmann::json& j, const std::string& where, int dim = 0);
nlohmann::json to_json(const SubspaceFrame& frame);
nlohmann::json to_json(const Dims& d);
nlohmann::json to_json(const SplittingEstimate& est);
nlohmann::json to_json(const HyperbolicityConstants& k);
nlohmann::json to_json(const ConstantsFit& fit);
nlohmann::json to_json(const AdaptedMetric& m);
nlohmann::json to_json(const MultiplicityReport& report);
nlohmann::json to_json(const Certificate& cert);
nlohmann::json to_json(const DesignPoint& design);
nlohmann::json to_json(const DesignReport& report);
nlohmann::json to_json(const AngleSeries& series);

/// CSV rows (depth, x0..x{n-1}) of a backward orbit.
void write_orbit_csv(std::ostream& out, const BackwardOrbit& orbit);
/// CSV rows (n, angle, log_angle).
void write_angles_csv(std::ostream& out, const AngleSeries& series);

}  // namespace endolab
