#pragma once

#include <span>

#include "ospring/cavity.hpp"
#include "ospring/params.hpp"

namespace ospring {

// chi^-1(omega) = -m (omega^2 + i*gamma*omega - omega_sq).  Valid whenever
// the total spring is frequency-local (bare, approx open loop, ideal/flat
// closed loop).
struct QuadraticForm {
    double mass = 0.0;
    double gamma = 0.0;     // rad/s total damping
    double omega_sq = 0.0;  // rad^2/s^2 total rigidity / mass

    cplx chi_inv(double omega) const {
        return cplx(-mass * (omega * omega - omega_sq),
                    -mass * gamma * omega);
    }
};

enum class Provenance { bare, open_loop, closed_loop };

struct Susceptibility {
    cplx chi_inv;  // N/m
    Provenance provenance = Provenance::bare;
};

// Springs add: independent fields push on the same coordinate.
cplx combine_springs(std::span<const OpticalField> fields, double omega,
                     Mode mode);

SpringCoefficient combine_springs_approx(std::span<const OpticalField> fields);

QuadraticForm bare_form(const MechanicalOscillator& mech);
QuadraticForm open_loop_form(const MechanicalOscillator& mech,
                             std::span<const OpticalField> fields);

Susceptibility effective_susceptibility(const MechanicalOscillator& mech,
                                        std::span<const OpticalField> fields,
                                        double omega, Mode mode);

// Equal-bandwidth damping cancellation: for |omega_osB/omega_osR| = kappa > 1
// and shared half-linewidth gamma, the blue detuning that cancels the red
// field's optical damping satisfies
//   Delta_B^2 = (kappa^2 - 1) gamma^2 + kappa^2 Delta_R^2.
double solve_detuning(double kappa, double gamma, double delta_r);

struct DetuningSolution {
    double delta_b = 0.0;     // rad/s, blue branch (negative)
    double residual_im = 0.0; // Im K_tot at the root, N/m
    double omega_ref = 0.0;   // rad/s frequency the Im was evaluated at
    int iterations = 0;
};

// Numeric generalization for unequal bandwidths: root of the combined
// Im K(omega_ref) over Delta_B < 0, bisection bracket then secant polish.
// In approx mode the damping bracket is frequency-independent; in exact
// mode omega_ref is iterated to the resulting spring frequency.
DetuningSolution solve_detuning_general(const OpticalField& blue_template,
                                        const OpticalField& red,
                                        const MechanicalOscillator& mech,
                                        Mode mode = Mode::approx);

struct StabilityResult {
    bool stable = false;
    cplx pole_plus;   // rad/s, roots of chi_inv in the lower half plane
    cplx pole_minus;  // when stable
};

// Both poles of 1/chi_inv damped iff gamma > 0 AND omega_sq > 0.
StabilityResult stability(const QuadraticForm& form);

}  // namespace ospring
