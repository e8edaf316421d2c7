#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ospring/config.hpp"
#include "ospring/feedback.hpp"

namespace ospring {

// Single-sided thermal force density 4 m gamma_m k_B T (viscous damping).
double thermal_force_spectrum(const MechanicalOscillator& mech,
                              const PhysicalConstants& pc);

enum class BudgetMode { open, ideal_closed };

struct BudgetRow {
    double omega = 0.0;
    double sx_thermal = 0.0;              // m^2/Hz
    std::vector<double> sx_rp;            // per field, m^2/Hz
    double sx_total = 0.0;
    cplx chi_inv;                         // the susceptibility used
};

BudgetRow displacement_spectrum(const SystemConfig& cfg, double omega,
                                BudgetMode mode);

struct FieldSummary {
    std::string label;
    double t_res = 0.0;        // K, infinite-gain residual temperature
    double required_gain = 0.0;
    double gamma_os = 0.0;     // rad/s
    double omega_os_sq = 0.0;  // rad^2/s^2 (signed)
};

struct TemperatureReport {
    double t_env = 0.0;
    double omega_new = 0.0;   // rad/s, sqrt(omega_m^2 + omega_os^2)
    double omega_os = 0.0;    // rad/s, stacked spring frequency
    double q_eff = 0.0;       // omega_new / gamma_m
    double threshold_t = 0.0; // K, ground state reachable below this
    double n_bar_over_q = 0.0;
    bool stable = false;
    bool loop_closed = false;
    std::vector<FieldSummary> fields;
    std::vector<std::string> notes;
};

// Evaluated with the config's kernel: off -> open-loop stability, otherwise
// the closed-loop quadratic form.  Unstable configs still produce a report,
// flagged, with the per-field required gains attached.
TemperatureReport temperature_report(const SystemConfig& cfg);

}  // namespace ospring
