#pragma once

#include <span>

#include "ospring/noise.hpp"
#include "ospring/spring.hpp"

namespace ospring {

// Power fluctuation at the detector in units where the shot-noise term is
// sqrt(2) a_in v1: noise part plus a position-signal coefficient.
struct PhotocurrentVector {
    NoiseVector noise;
    cplx c_x = 0.0;  // sqrt(1/s)/m... measured dP per unit displacement
};

PhotocurrentVector photocurrent(const OpticalField& f, const Detector& det,
                                double omega);

// Susceptibility correction per looped field:
//   FB(omega) = 4 hbar g0^2 n gamma Delta (2 gamma_eps - i omega)
//               / (gamma^2 + Delta^2)^2,
// subtracted as FB * K_c/(1+K_c) when the loop closes.
cplx feedback_term(const OpticalField& f, double omega);

struct ClosedLoopResult {
    cplx chi_inv_closed;
    NoiseVector residual_force;
    KernelKind kernel_kind = KernelKind::off;
};

// Close one field's amplitude loop inside a stack.  chi_inv_closed carries
// the whole stack's springs; residual_force is this field's remaining
// radiation-pressure drive.  kind == off returns the open-loop pair
// unchanged; kind == ideal takes the infinite-gain limit analytically.
ClosedLoopResult close_loop(const OpticalField& f,
                            const MechanicalOscillator& mech,
                            std::span<const OpticalField> stack,
                            const Detector& det, const FeedbackKernel& kernel,
                            double omega);

struct StackClosedLoop {
    cplx chi_inv;
    std::vector<NoiseVector> residuals;  // one per field
};

// Same kernel applied to every field's loop.
StackClosedLoop close_loop_stack(const MechanicalOscillator& mech,
                                 std::span<const OpticalField> fields,
                                 const Detector& det,
                                 const FeedbackKernel& kernel, double omega);

// Quadratic closed-loop form (off/flat/ideal kernels only): the loop removes
// optical damping by the gain fraction and restores the lossless rigidity.
QuadraticForm closed_loop_form(const MechanicalOscillator& mech,
                               std::span<const OpticalField> fields,
                               const FeedbackKernel& kernel);

// Infinite-gain residual force density,
//   S_F = (4 hbar^2 g0^2 gamma n / (gamma^2+Delta^2)) *
//         [gamma_eps/gamma + (1-eta) + omega^2 Delta^2/(gamma^2+Delta^2)^2].
double residual_spectrum(const OpticalField& f, const Detector& det,
                         double omega);

// Effective temperature the residual drive thermalizes the oscillator to:
// S_F(omega_eval) / (4 m gamma_m k_B).
double residual_temperature(const OpticalField& f,
                            const MechanicalOscillator& mech,
                            const Detector& det, double omega_eval,
                            const PhysicalConstants& pc);

// Loop gain needed before feedback beats the optical anti-damping.
double required_gain(double gamma_os, double gamma_m);

}  // namespace ospring
