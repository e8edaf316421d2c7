#pragma once

#include <complex>
#include <string>
#include <vector>

#include "ospring/constants.hpp"

namespace ospring {

using cplx = std::complex<double>;

// Viscous-damping oscillator: gamma_m is fixed, independent of frequency.
struct MechanicalOscillator {
    double mass = 0.0;     // kg
    double omega_m = 0.0;  // rad/s
    double q_factor = 0.0;
    double gamma_m = 0.0;  // rad/s
    double t_env = 0.0;    // K

    // omega_m is re-rounded to gamma_m * q so the stored triple satisfies
    // gamma_m * q == omega_m bit-exactly (at most 1 ulp from the input).
    static MechanicalOscillator make(double mass, double omega_m, double q,
                                     double t_env);
};

struct OpticalFieldInput {
    std::string label;
    double length = 0.0;      // m
    double wavelength = 0.0;  // m, required: carrier is not derivable from
                              // the mechanical/cavity numbers alone
    double gamma = 0.0;       // rad/s, input-coupling half-linewidth
    double detuning = 0.0;    // rad/s, Delta = omega_c - omega_0 (blue < 0)
    double epsilon = 0.0;     // fractional round-trip power loss
    double p_circ = 0.0;      // W, circulating power
    double v1_density = 1.0;  // classical amplitude-noise multiplier (>= 1)
};

// Input parameters plus everything derived from them.  hbar is captured at
// derivation time so coupling formulas do not need a constants argument.
struct OpticalField {
    OpticalFieldInput in;
    double omega0 = 0.0;      // rad/s carrier
    double g0 = 0.0;          // rad/(s m), omega0 / L
    double gamma_eps = 0.0;   // rad/s, c*eps/(4L)
    double gamma_tot = 0.0;   // rad/s, gamma + gamma_eps
    double n_circ = 0.0;      // intracavity photon number
    cplx a_bar;               // steady amplitude, |a_bar|^2 = n_circ
    double a_in_bar = 0.0;    // input amplitude, real positive, sqrt(1/s)
    double p_in = 0.0;        // W, implied input power
    double hbar = 0.0;

    double gamma() const { return in.gamma; }
    double detuning() const { return in.detuning; }
    double length() const { return in.length; }
    // 2*hbar*g0^2*n_circ: the stiffness scale every spring formula shares.
    // n_circ enters as a bare factor so power rescaling is exact.
    double stiffness_scale() const { return 2.0 * hbar * g0 * g0 * n_circ; }
};

struct Detector {
    double eta = 1.0;  // quantum efficiency in [0, 1]
};

enum class KernelKind { off, flat, rational, ideal };

// Loop filter acting on the normalized photocurrent.  Rational kernels are
// specified by s-plane zeros/poles (rad/s) and evaluated at s = -i*omega.
struct FeedbackKernel {
    KernelKind kind = KernelKind::off;
    double gain = 0.0;
    std::vector<cplx> zeros;
    std::vector<cplx> poles;

    cplx eval(double omega) const;
    bool realizable() const;  // simulable: off, flat, or stable proper rational
};

OpticalField derive_field(const OpticalFieldInput& in,
                          const PhysicalConstants& pc,
                          std::vector<std::string>* warnings = nullptr);

// Free spectral range over full linewidth: (pi*c/L) / (2*gamma).
double finesse(const OpticalField& f, const PhysicalConstants& pc);

// Thermal decoherence per coherent oscillation, k_B T / (hbar omega Q).
// Ground state is reachable (barely) when this falls below 1.
double decoherence_ratio(double t_kelvin, double omega, double q,
                         const PhysicalConstants& pc);

// Temperature at which decoherence_ratio == 1.
double ground_state_threshold(double omega, double q,
                              const PhysicalConstants& pc);

}  // namespace ospring
