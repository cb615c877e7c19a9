#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace fbp {

inline constexpr const char* kVersion = "fbp 1.0.0";

struct RunOptions {
    std::string command;
    std::string config_path;  // empty: built-in defaults
    std::optional<std::string> out_dir;
    std::optional<long long> seed;
    std::vector<std::string> overrides;
    // viscosity-check flags
    std::optional<double> margin;
    std::optional<double> slack;
    std::optional<int> profiles;
};

/// Exit codes: 0 success, 2 invalid configuration or input, 3 solve did not
/// converge (artifacts still written), 4 internal invariant breach.
int run(const RunOptions& options, std::ostream& log);

}  // namespace fbp
