#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ospring/config.hpp"

namespace ospring {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

// Desk-scale double-spring system used by the time-domain cross-checks:
// gamma/2pi = 20 kHz, detunings {+1, -sqrt(3)} gamma, ~20 uW circulating,
// omega_os/2pi = 1 kHz net, omega_m/2pi = 100 Hz, Q = 10, m = 1 ug.
ConfigInput desk_input();

// Published proposal parameter set (250 ng mirror, 1 mm cavity, 20/4 MHz
// linewidths, 390/16 mW); wavelength is a required input, not part of the
// published table.
ConfigInput reference_input(double wavelength_m = 1.064e-6);

// Frequency-domain vs time-domain cross-validation suite:
//  (a) thermal-only equipartition at three temperatures,
//  (b) open-loop displacement PSD vs |chi_eff|^2 (S_F + S_th),
//  (c) closed-loop radiation-pressure suppression vs the residual spectrum,
//  (d) stability verdicts vs homogeneous growth/decay, random parameters,
//  (e) step-halving convergence of the integrator.
// on_result fires as each check lands (for progress printing).
std::vector<CheckResult> verify_suite(
    int threads,
    const std::function<void(const CheckResult&)>& on_result = nullptr);

}  // namespace ospring
