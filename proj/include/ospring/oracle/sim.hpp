#pragma once

#include <cstdint>
#include <vector>

#include "ospring/config.hpp"

namespace ospring::oracle {

enum class Scheme { euler_maruyama };

struct TrajectoryConfig {
    double dt = 0.0;        // s
    double duration = 0.0;  // s, recorded span (after burn_in)
    std::uint64_t seed = 0;
    Scheme scheme = Scheme::euler_maruyama;
    int decimate = 1;       // record every Nth step
    double burn_in = 0.0;   // s discarded before recording
    double x0 = 0.0;        // m
    double p0 = 0.0;        // kg m/s
    bool noise = true;      // false: homogeneous (decay/growth) probe
};

struct SimResult {
    double sample_dt = 0.0;           // dt * decimate
    std::vector<double> x;            // m
    std::vector<double> p;            // kg m/s
    std::vector<double> photocurrent; // dP/(sqrt(2) a_in) of the first field
    bool unstable = false;
    double t_unstable = -1.0;         // s, when the guard tripped
};

// Quasi-classical time-domain integration of the full model: one complex
// cavity mode per field, the mechanical oscillator, thermal force, and the
// per-field amplitude feedback loop.  The measured power fluctuation comes
// from the time-domain reflection a_out = -a_in_loop + sqrt(2 gamma) a, so
// loss, position signal, and loop bandwidth enter with no further
// approximation.  The instantaneous (prompt-reflection) part of the loop is
// solved algebraically each step; the cavity-mediated part integrates.
SimResult simulate(const SystemConfig& cfg, const TrajectoryConfig& traj);

}  // namespace ospring::oracle
