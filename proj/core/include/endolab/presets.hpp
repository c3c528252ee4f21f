#pragma once

#include <string>
#include <vector>

#include "endolab/io.hpp"

namespace endolab {

std::vector<std::string> preset_names();

/// Map spec of a named preset; theorem-d-t3 is rebuilt deterministically from
/// the companion matrix of x^3 - 4x^2 + x + 3 with theta = 0.2.
MapSpec preset_map(const std::string& name);

/// Companion matrix of x^3 - 4x^2 + x + 3.
IntMat companion_deg3();

/// Seed used for the theorem-d-t3 preset.
inline constexpr std::uint64_t kTheoremDSeed = 20240611;

}  // namespace endolab
