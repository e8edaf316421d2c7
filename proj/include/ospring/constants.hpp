#pragma once

namespace ospring {

// CODATA-2018 values. Overridable per config file for cross-checks against
// published numbers computed with rounded constants; every report header
// echoes the values actually used.
struct PhysicalConstants {
    double hbar = 1.054571817e-34;  // J s
    double k_b = 1.380649e-23;      // J / K
    double c = 299792458.0;         // m / s
};

inline constexpr const char* constants_version = "CODATA-2018";

void validate(const PhysicalConstants& pc);

}  // namespace ospring
