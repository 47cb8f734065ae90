#pragma once

#include "rheston/params.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace rheston {

// Parsed contents of a solver config file. The file format is flat
// `key = value` lines with `#` comments; keys are the ModelParams field
// names plus `q_exponent` and `psi_expected`. Unknown keys are an error.
struct SolverConfig {
    ModelParams params;
    double q_exponent = 2.01;
    std::optional<double> psi_expected;
};

// Throws ConfigError on malformed input or unknown keys, InvalidParams when
// the resulting parameters violate a raw invariant or the psi consistency
// assertion.
SolverConfig parse_config(std::string_view text);

SolverConfig load_config(const std::string& path);

} // namespace rheston
