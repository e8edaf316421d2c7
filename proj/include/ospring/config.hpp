#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ospring/params.hpp"

namespace ospring {

struct KernelInput {
    std::string kind = "off";  // off | flat | rational | ideal
    double gain = 0.0;
    std::vector<double> zeros_hz;  // s-plane values / 2pi
    std::vector<double> poles_hz;
};

// Parsed file contents before derivation.  Frequencies in Hz, loss in ppm;
// sweeps mutate these leaves and re-derive.
struct ConfigInput {
    PhysicalConstants constants;
    double mass_kg = 0.0;
    double f_m_hz = 0.0;
    double q = 0.0;
    double t_env_k = 0.0;
    std::vector<OpticalFieldInput> fields;  // SI fields filled at parse time
    double eta = 1.0;
    KernelInput kernel;
};

struct SystemConfig {
    PhysicalConstants constants;
    MechanicalOscillator mech;
    std::vector<OpticalField> fields;
    Detector det;
    FeedbackKernel kernel;
    std::uint64_t hash = 0;  // FNV-1a over the canonical serialization
    std::vector<std::string> warnings;

    const OpticalField& field(const std::string& label) const;
};

ConfigInput parse_config_text(const std::string& text);
ConfigInput parse_config_file(const std::string& path);

// Canonical serialization: full-precision floats, fixed key order.  Parsing
// the output reproduces every derived quantity bit-identically.
std::string to_config_text(const ConfigInput& in);

SystemConfig derive(const ConfigInput& in);

// Mutable numeric leaves addressed as "oscillator.q", "field.<label>.power_w",
// "detector.eta", "feedback.gain".  Throws ConfigError on unknown paths.
double get_leaf(const ConfigInput& in, const std::string& path);
void set_leaf(ConfigInput& in, const std::string& path, double value);

std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace ospring
