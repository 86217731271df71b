#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mfsg/io.hpp"

namespace mfsg {

struct RunConfig {
    enum class Potential { log_prob, constant, lyapunov };

    std::vector<RationalMap> maps;
    std::vector<double> probabilities;
    Potential potential = Potential::log_prob;
    std::vector<double> constants;  // for Potential::constant

    double beta_min = -4.0, beta_max = 4.0;
    int beta_steps = 33;
    std::optional<int> depth;  // empty = auto

    std::size_t julia_target_count = 20000;
    std::uint64_t rng_seed = 1;
    int expansion_depth = 8, expansion_samples = 256;

    Window window{-4.0, 4.0, -4.0, 4.0};
    int width = 256, height = 256;
    std::uint32_t samples = 0;  // 0 = fixed-point iteration
    double escape_radius = 0.0;
    std::vector<TrapRegion> traps;
    double tol = 1e-6;

    bool holder = false;  // a holder section was given
    std::size_t holder_points = 200;
    double holder_r0 = 0.0;  // 0 = twice the pixel pitch
    double holder_ratio = 1.4;
    int holder_count = 10;

    std::size_t bound_sequences = 1000;
    int bound_seq_len = 40;

    std::string output_dir = "out";
    // Hex FNV-1a of the canonical config text, output_dir excluded.
    std::string digest;

    MultiMap multimap() const { return MultiMap(maps); }
    HolderFamily psi() const;
    /// Per-map constants c_i of psi.
    std::vector<double> psi_constants() const;
    std::vector<double> betas() const;
};

const char* potential_name(RunConfig::Potential p);

/// Validates and fills defaults; throws ConfigError naming the field path.
RunConfig parse_config(const Json& j);
/// Reads and parses a file; JSON syntax errors report line and column.
RunConfig load_config(const std::string& path);

}  // namespace mfsg
