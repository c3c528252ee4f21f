#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "endolab/splitting.hpp"

namespace endolab {

enum class Sigma { c, u, cu };

std::string to_string(Sigma sigma);
Sigma parse_sigma(const std::string& name);

struct MultiplicityOptions {
  int depth = 40;
  std::size_t code_budget = 64;
  double cluster_threshold = 1e-3;
  std::uint64_t seed = 0;
  /// When nonempty these codes are used instead of an enumeration.
  std::vector<BranchCode> codes;
  SplittingOptions splitting;
};

struct DirectionCluster {
  SubspaceFrame representative;
  std::vector<BranchCode> witnesses;
};

struct MultiplicityReport {
  TorusPoint x;
  Sigma sigma = Sigma::cu;
  int depth = 0;
  int codes_tried = 0;
  std::vector<DirectionCluster> clusters;
  /// Smallest subspace distance between frames in different clusters; empty with one cluster.
  std::optional<double> min_inter_cluster_angle;

  int cluster_count() const { return static_cast<int>(clusters.size()); }
};

/// The sigma-direction at x along the backward branch `code`.
SubspaceFrame sigma_frame(const Endomorphism& f, const TorusPoint& x, Sigma sigma,
                          const BranchCode& code, const SplittingOptions& options = {});

/// Single-linkage clusters of the sigma-frames over the enumerated codes.
MultiplicityReport count_directions(const Endomorphism& f, const TorusPoint& x, Sigma sigma,
                                    const MultiplicityOptions& options = {});

/// Codes at f(x) whose orbits pass through x and then follow `codes`.
std::vector<BranchCode> pushed_codes(const Endomorphism& f, const TorusPoint& x,
                                     const std::vector<BranchCode>& codes);

}  // namespace endolab
