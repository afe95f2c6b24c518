#pragma once

#include <stdexcept>
#include <string>

namespace entsim {

// Malformed or inconsistent user input (config files, CLI values, topology wiring).
// The CLI maps this (and std::domain_error / std::invalid_argument from parameter
// validation) to exit code 2.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical integration failed its accuracy or state-validity checks. Exit code 3.
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Filesystem / serialization failure. Exit code 4.
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Internal invariant violation in the control-protocol state machine. A bug,
// not a user error; derives from logic_error on purpose.
struct protocol_error : std::logic_error {
    using std::logic_error::logic_error;
};

} // namespace entsim
