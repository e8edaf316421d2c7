#pragma once

#include "ospring/noise.hpp"
#include "ospring/params.hpp"

namespace ospring {

// exact: full frequency dependence of the cavity response (loss via
// gamma_tot).  approx: leading order in omega/(gamma, |Delta|) with the
// first-order loss correction; this is the regime the loop algebra lives in.
enum class Mode { exact, approx };

// Frequency-local decomposition K(omega) ~= stiffness - i*omega*damping.
// stiffness = m*omega_os^2 [N/m], damping = m*Gamma_os [kg/s].
struct SpringCoefficient {
    double stiffness = 0.0;
    double damping = 0.0;

    cplx at(double omega) const {
        return cplx(stiffness, -damping * omega);
    }
    double omega_os_sq(double mass) const { return stiffness / mass; }
    double gamma_os(double mass) const { return damping / mass; }
};

// Optical spring K(omega) = 2 hbar g0^2 n Delta / D(omega) with
// D = (omega - Delta + i gamma_tot)(omega + Delta + i gamma_tot).
cplx spring_exact(const OpticalField& f, double omega);

// Low-frequency limit: stiffness includes the first-order loss correction
// (1 - 4 gamma gamma_eps / (gamma^2 + Delta^2)); damping is
// m*Gamma_os = 4 hbar g0^2 n gamma Delta / (gamma^2 + Delta^2)^2.
// Blue detuning (Delta < 0): positive stiffness, negative damping.
SpringCoefficient spring_approx(const OpticalField& f);

// Radiation-pressure force on the mirror as a combination of the field's
// vacuum channels (v1, v2 and, for lossy cavities, v1p, v2p).
NoiseVector force_noise(const OpticalField& f, double omega, Mode mode);

// Closed form for the lossless force-noise density,
//   S_F = 4 hbar^2 g0^2 n gamma (gamma^2 + omega^2 + Delta^2)
//         / ([(omega-Delta)^2 + gamma^2][(omega+Delta)^2 + gamma^2]).
// Evaluates the field as if epsilon were zero.
double force_spectrum_exact(const OpticalField& f, double omega);

// Lossy variant: gamma -> gamma_tot inside the response, times the loss-port
// multiplicity (1 + gamma_eps/gamma).  Equals the density of the exact
// force_noise vector.
double force_spectrum_exact_lossy(const OpticalField& f, double omega);

// Reflection off the input port: a_out = r_in a_in + r_loss a_in' + c_x x.
struct IORelation {
    cplx r_in;
    cplx r_loss;
    cplx c_x;  // sqrt(1/s)/m
};

IORelation input_output(const OpticalField& f, double omega, Mode mode);

}  // namespace ospring
