#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "endolab/config.hpp"

namespace endolab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitGate = 2;

/// Re-seeds every random stream of the config.
void apply_seed(ExperimentConfig& config, std::uint64_t seed);

/// Runs one experiment, writing files into `out`; returns the exit code.
/// Numerical failures propagate as exceptions.
int run_experiment(const std::string& kind, const ExperimentConfig& config,
                   const std::filesystem::path& out, std::ostream& log);

/// Load, run and map every failure to an exit code.
int run(const std::string& kind, const std::string& config_path,
        std::optional<std::uint64_t> seed, const std::string& out_dir, std::ostream& log,
        std::ostream& err);

}  // namespace endolab::cli
