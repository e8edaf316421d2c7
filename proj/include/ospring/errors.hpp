#pragma once

#include <stdexcept>
#include <string>

namespace ospring {

// Bad user input: malformed file, missing key, out-of-range value.
// CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Well-formed input that the physics rejects: no detuning root in the
// search interval, loop-gain singularity, instability where stability is
// required. CLI maps this to exit code 1.
struct PhysicsError : std::runtime_error {
    explicit PhysicsError(const std::string& what) : std::runtime_error(what) {}
};

// Internal numerical guard tripped (pole proximity, non-finite result).
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ospring
