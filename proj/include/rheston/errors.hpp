#pragma once

#include <stdexcept>
#include <string>

namespace rheston {

struct InvalidParams : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ZeroDenominator : std::domain_error {
    using std::domain_error::domain_error;
};

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Strategy evaluation requested closer to the horizon than the guard allows;
// the consumption-wealth ratio diverges there.
struct TerminalSingularity : std::domain_error {
    using std::domain_error::domain_error;
};

struct StepTooLarge : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct InstabilityDetected : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AdmissibilityViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace rheston
