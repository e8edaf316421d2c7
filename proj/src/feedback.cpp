#include "ospring/feedback.hpp"

#include <cmath>

#include "ospring/errors.hpp"

namespace ospring {

PhotocurrentVector photocurrent(const OpticalField& f, const Detector& det,
                                double omega) {
    const double g = f.gamma();
    const double ge = f.gamma_eps;
    const double d = f.detuning();
    const double l2 = g * g + d * d;
    const double shot = std::sqrt(2.0) * f.a_in_bar;

    PhotocurrentVector pc;
    pc.noise.omega = omega;
    pc.noise.set({ChannelKind::v1, f.in.label}, shot);
    if (ge > 0.0) {
        const double loss = 2.0 * std::sqrt(2.0 * g * ge) * f.a_in_bar / l2;
        pc.noise.set({ChannelKind::v1p, f.in.label}, loss * g);
        pc.noise.set({ChannelKind::v2p, f.in.label}, -loss * d);
    }
    if (det.eta < 1.0) {
        pc.noise.set({ChannelKind::det, f.in.label},
                     shot * std::sqrt(1.0 - det.eta));
    }
    pc.c_x = -2.0 * f.g0 * f.n_circ * d * cplx(2.0 * ge, -omega) / l2;
    return pc;
}

cplx feedback_term(const OpticalField& f, double omega) {
    // m Gamma_os (2 gamma_eps - i omega): the damping plus the rigidity the
    // loss port denies the loop.
    const double m_gamma_os = spring_approx(f).damping;
    return m_gamma_os * cplx(2.0 * f.gamma_eps, -omega);
}

namespace {

struct LoopGain {
    cplx kappa = 0.0;   // K_c / (1 + K_c)
    cplx k_c = 0.0;
    bool ideal = false;
    bool open = false;  // kernel off or zero gain
};

LoopGain loop_gain(const FeedbackKernel& kernel, double omega) {
    LoopGain lg;
    switch (kernel.kind) {
        case KernelKind::off:
            lg.open = true;
            return lg;
        case KernelKind::ideal:
            lg.ideal = true;
            lg.kappa = 1.0;
            return lg;
        case KernelKind::flat:
        case KernelKind::rational:
            lg.k_c = kernel.eval(omega);
            break;
    }
    if (lg.k_c == cplx(0.0, 0.0)) {
        lg.open = true;
        return lg;
    }
    const cplx denom = 1.0 + lg.k_c;
    if (std::abs(denom) < 1e-12 * (1.0 + std::abs(lg.k_c)))
        throw PhysicsError("feedback gain at -1 makes the loop singular");
    lg.kappa = lg.k_c / denom;
    return lg;
}

// Remaining radiation-pressure drive on the mirror after the loop swallows
// the amplitude quadrature by K_c/(1+K_c).
NoiseVector residual(const OpticalField& f, const Detector& det, double omega,
                     const LoopGain& lg) {
    if (lg.open) return force_noise(f, omega, Mode::approx);

    const double g = f.gamma();
    const double ge = f.gamma_eps;
    const double d = f.detuning();
    const double l2 = g * g + d * d;
    const double pref =
        2.0 * f.hbar * f.g0 * std::sqrt(g) * std::sqrt(f.n_circ) /
        std::sqrt(l2);

    NoiseVector v;
    v.omega = omega;
    const NoiseChannel v1{ChannelKind::v1, f.in.label};
    const NoiseChannel v2{ChannelKind::v2, f.in.label};
    const NoiseChannel v1p{ChannelKind::v1p, f.in.label};
    const NoiseChannel v2p{ChannelKind::v2p, f.in.label};
    const NoiseChannel nd{ChannelKind::det, f.in.label};

    if (lg.ideal) {
        v.set(v1, 0.0);
        v.set(v2, -pref * cplx(0.0, omega * d / l2));
        if (ge > 0.0) {
            v.set(v1p, pref * std::sqrt(ge / g) * (g * g - d * d) / l2);
            v.set(v2p, -pref * 2.0 * std::sqrt(ge * g) * d / l2);
        }
        if (det.eta < 1.0) v.set(nd, pref * std::sqrt(1.0 - det.eta));
        return v;
    }

    const cplx kc = lg.k_c;
    const cplx denom = 1.0 + kc;
    v.set(v1, -pref / denom);
    v.set(v2, -pref * cplx(0.0, omega * d / l2));
    if (ge > 0.0) {
        v.set(v1p, pref * std::sqrt(ge / g) *
                       (((kc - 1.0) / denom) * (g * g) - d * d) / l2);
        v.set(v2p, -pref * 2.0 * std::sqrt(ge * g) * d * kc / (denom * l2));
    }
    if (det.eta < 1.0)
        v.set(nd, pref * std::sqrt(1.0 - det.eta) * kc / denom);
    return v;
}

}  // namespace

ClosedLoopResult close_loop(const OpticalField& f,
                            const MechanicalOscillator& mech,
                            std::span<const OpticalField> stack,
                            const Detector& det, const FeedbackKernel& kernel,
                            double omega) {
    ClosedLoopResult r;
    r.kernel_kind = kernel.kind;
    const LoopGain lg = loop_gain(kernel, omega);
    const cplx chi_open = open_loop_form(mech, stack).chi_inv(omega);
    r.chi_inv_closed =
        lg.open ? chi_open : chi_open - feedback_term(f, omega) * lg.kappa;
    r.residual_force = residual(f, det, omega, lg);
    return r;
}

StackClosedLoop close_loop_stack(const MechanicalOscillator& mech,
                                 std::span<const OpticalField> fields,
                                 const Detector& det,
                                 const FeedbackKernel& kernel, double omega) {
    StackClosedLoop out;
    const LoopGain lg = loop_gain(kernel, omega);
    out.chi_inv = open_loop_form(mech, fields).chi_inv(omega);
    for (const auto& f : fields) {
        if (!lg.open) out.chi_inv -= feedback_term(f, omega) * lg.kappa;
        out.residuals.push_back(residual(f, det, omega, lg));
    }
    return out;
}

QuadraticForm closed_loop_form(const MechanicalOscillator& mech,
                               std::span<const OpticalField> fields,
                               const FeedbackKernel& kernel) {
    double one_minus_kappa = 1.0;
    double kappa = 0.0;
    switch (kernel.kind) {
        case KernelKind::off:
            break;
        case KernelKind::ideal:
            one_minus_kappa = 0.0;
            kappa = 1.0;
            break;
        case KernelKind::flat: {
            const double g = kernel.gain;
            if (std::abs(1.0 + g) < 1e-12 * (1.0 + std::abs(g)))
                throw PhysicsError(
                    "feedback gain at -1 makes the loop singular");
            one_minus_kappa = 1.0 / (1.0 + g);
            kappa = g / (1.0 + g);
            break;
        }
        case KernelKind::rational:
            throw PhysicsError(
                "closed_loop_form needs a frequency-flat kernel "
                "(off, flat, or ideal)");
    }

    QuadraticForm q = bare_form(mech);
    for (const auto& f : fields) {
        const SpringCoefficient k = spring_approx(f);
        // (1 - kappa) applied per field keeps the ideal limit exact: the
        // optical damping never enters the sum at all.
        q.gamma += k.gamma_os(mech.mass) * one_minus_kappa;
        q.omega_sq += k.omega_os_sq(mech.mass) -
                      2.0 * kappa * k.gamma_os(mech.mass) * f.gamma_eps;
    }
    return q;
}

double residual_spectrum(const OpticalField& f, const Detector& det,
                         double omega) {
    const double g = f.gamma();
    const double d = f.detuning();
    const double l2 = g * g + d * d;
    const double pref_sq = 2.0 * f.hbar * f.stiffness_scale() * g / l2;
    return pref_sq * (f.gamma_eps / g + (1.0 - det.eta) +
                      omega * omega * d * d / (l2 * l2));
}

double residual_temperature(const OpticalField& f,
                            const MechanicalOscillator& mech,
                            const Detector& det, double omega_eval,
                            const PhysicalConstants& pc) {
    if (!(mech.gamma_m > 0.0))
        throw PhysicsError("residual_temperature needs mechanical damping");
    return residual_spectrum(f, det, omega_eval) /
           (4.0 * mech.mass * mech.gamma_m * pc.k_b);
}

double required_gain(double gamma_os, double gamma_m) {
    if (!(gamma_m > 0.0))
        throw PhysicsError("required_gain needs gamma_m > 0");
    return std::abs(gamma_os) / gamma_m;
}

}  // namespace ospring
