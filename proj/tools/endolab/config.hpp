#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include <endolab/io.hpp>

namespace endolab::cli {

inline constexpr int kSchemaVersion = 1;

std::vector<std::string> kinds();

/// A subspace given either as explicit spanning vectors or as a bundle along a branch.
struct DirectionSpec {
  std::vector<Vec> vectors;
  std::string bundle;  // s, c, u, cs or cu
  std::optional<BranchCode> code;
};

struct SplittingParams {
  std::optional<TorusPoint> point;
  std::optional<BranchCode> code;
  double tolerance = 1e-6;
  std::vector<int> sweep;  // empty: 10, 15, ..., backward depth
};

struct AnglesParams {
  std::optional<TorusPoint> point;
  std::optional<DirectionSpec> e1, e2;
  AngleDecayOptions options;
  int constant_samples = 64;
};

struct MultiplicityParams {
  std::optional<TorusPoint> point;
  Sigma sigma = Sigma::cu;
  int depth = 40;
  std::vector<int> depths;  // empty: 10, 20, ..., depth
  std::size_t budget = 64;
  double threshold = 1e-3;
  bool witnesses = true;
  int iterates = 3;
};

struct PerturbParams {
  double theta = 0.2;
  int depth = 40;
  bool certify = true;
  int grid = 16;
  double beta = 0.4;
  double min_displacement = 0.1;
  double triple_tolerance = 1e-3;
  int max_attempts = 100000;
};

struct ConeParams {
  double beta = 0.4;
  int grid = 32;
  int samples = 64;
  ReferenceSource source = ReferenceSource::linear;
  ConeMetric metric = ConeMetric::adapted;
};

struct ConstantsParams {
  int samples = 64;
  int depth = 20;
  double slack = 1e-6;
  bool adapted = true;
  int max_horizon = 64;
  bool include_design = true;
};

struct OrbitMetricParams {
  int depth = 10;
  int orbits = 8;
};

struct ExperimentConfig {
  int version = kSchemaVersion;
  std::string kind;  // empty when the file does not pin one
  std::string preset;
  MapSpec map;
  std::uint64_t seed = 1;
  SplittingOptions splitting;
  SplittingParams splitting_run;
  AnglesParams angles;
  MultiplicityParams multiplicity;
  PerturbParams perturb;
  ConeParams cones;
  ConstantsParams constants;
  OrbitMetricParams orbit_metric;
  /// The document as read, used for hashing.
  nlohmann::json document;
};

/// Strict reader. Throws ConfigError with a JSON pointer on any problem.
ExperimentConfig parse_config(const nlohmann::json& j);

/// Reads and parses a file; errors come back as "path:line: pointer: message".
ExperimentConfig load_config(const std::string& path);

/// FNV-1a 64 of the compact dump of the document with the effective seed, in hex.
std::string config_hash(const ExperimentConfig& config);

/// A ready-to-run config for a named preset.
nlohmann::json preset_config(const std::string& name);

}  // namespace endolab::cli
