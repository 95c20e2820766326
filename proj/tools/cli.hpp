#pragma once

#include "steklov/optimizer.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace steklov::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitSolverFailure = 2;
inline constexpr int kExitConfigError = 3;

struct RunConfig {
    std::string mode = "optimize-convex";
    std::vector<std::size_t> ks{1};
    std::size_t n_angles = 200;
    double diameter = 2.0;
    double mesh_h_factor = 0.05;
    int max_iters = 500;
    double tol = 1e-7;
    std::uint64_t seed = 0;
    int restarts = 3;
    /// "disk" or "file:<path>" (a polyline CSV).
    std::string initial = "disk";
    std::string out_dir;
    int jobs = 1;
    bool verbose = false;

    /// Throws ConfigError naming the offending key.
    void validate() const;
    OptimOptions options(std::size_t k) const;
    /// Everything but out_dir, jobs and verbose, which do not affect results.
    nlohmann::json to_json(std::size_t k) const;
};

/// Defaults, then the optional --config file, then flags. The config file has
/// "key = value" lines with '#' comments; keys are the flag names with or
/// without the dashes turned into underscores, and unknown keys are rejected.
/// When out_dir is not given, STEKLOV_OUT_DIR and then "steklov_out" are used.
/// Throws ConfigError; throws HelpRequested for --help.
RunConfig parse_config(const std::vector<std::string>& args);

struct HelpRequested {
    std::string text;
};

/// Runs every k of the config (fanned out over `jobs` threads when there are
/// several, each writing into out_dir/k<k>) and returns the process exit code.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// parse_config + run with the exit code contract applied to parse errors.
int main(int argc, char** argv);

} // namespace steklov::cli
