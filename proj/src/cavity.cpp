#include "ospring/cavity.hpp"

#include <cmath>

namespace ospring {

namespace {

// D(omega) = (omega - Delta + i gamma_tot)(omega + Delta + i gamma_tot).
// D(0) = -(Delta^2 + gamma_tot^2), so K(0) has the sign of -Delta.
cplx response_denominator(const OpticalField& f, double omega) {
    const double gt = f.gamma_tot;
    const double d = f.detuning();
    return cplx(omega - d, gt) * cplx(omega + d, gt);
}

}  // namespace

cplx spring_exact(const OpticalField& f, double omega) {
    return f.stiffness_scale() * f.detuning() / response_denominator(f, omega);
}

SpringCoefficient spring_approx(const OpticalField& f) {
    const double g = f.gamma();
    const double d = f.detuning();
    const double l2 = g * g + d * d;
    const double scale = f.stiffness_scale();  // 2 hbar g0^2 n
    SpringCoefficient k;
    k.stiffness = -scale * d / l2 * (1.0 - 4.0 * g * f.gamma_eps / l2);
    k.damping = 2.0 * scale * g * d / (l2 * l2);
    return k;
}

NoiseVector force_noise(const OpticalField& f, double omega, Mode mode) {
    const double g = f.gamma();
    const double ge = f.gamma_eps;
    const double gt = f.gamma_tot;
    const double d = f.detuning();
    const double root_n = std::sqrt(f.n_circ);

    NoiseVector v;
    v.omega = omega;
    const NoiseChannel v1{ChannelKind::v1, f.in.label};
    const NoiseChannel v2{ChannelKind::v2, f.in.label};
    const NoiseChannel v1p{ChannelKind::v1p, f.in.label};
    const NoiseChannel v2p{ChannelKind::v2p, f.in.label};

    if (mode == Mode::approx) {
        const double l2 = g * g + d * d;
        const double pref = 2.0 * f.hbar * f.g0 * std::sqrt(g) * root_n /
                            std::sqrt(l2);
        v.set(v1, -pref);
        v.set(v2, -pref * cplx(0.0, omega * d / l2));
        if (ge > 0.0) v.set(v1p, -pref * std::sqrt(ge / g));
        return v;
    }

    const cplx dd = response_denominator(f, omega);
    const double pref = 2.0 * f.hbar * f.g0 * std::sqrt(g) * root_n /
                        std::sqrt(gt * gt + d * d);
    const cplx c1 = pref * cplx(gt * gt + d * d, -gt * omega) / dd;
    const cplx c2 = pref * cplx(0.0, d * omega) / dd;
    v.set(v1, c1);
    v.set(v2, c2);
    if (ge > 0.0) {
        const double r = std::sqrt(ge / g);
        v.set(v1p, r * c1);
        v.set(v2p, r * c2);
    }
    return v;
}

double force_spectrum_exact(const OpticalField& f, double omega) {
    const double g = f.gamma();
    const double d = f.detuning();
    const double num = 2.0 * f.hbar * f.stiffness_scale() * g *
                       (g * g + omega * omega + d * d);
    const double dm = ((omega - d) * (omega - d) + g * g) *
                      ((omega + d) * (omega + d) + g * g);
    return num / dm;
}

double force_spectrum_exact_lossy(const OpticalField& f, double omega) {
    const double gt = f.gamma_tot;
    const double d = f.detuning();
    const double num = 2.0 * f.hbar * f.stiffness_scale() * f.gamma() *
                       (gt * gt + omega * omega + d * d);
    const double dm = ((omega - d) * (omega - d) + gt * gt) *
                      ((omega + d) * (omega + d) + gt * gt);
    return (1.0 + f.gamma_eps / f.gamma()) * num / dm;
}

IORelation input_output(const OpticalField& f, double omega, Mode mode) {
    const double g = f.gamma();
    const double ge = f.gamma_eps;
    const double gt = f.gamma_tot;
    const double d = f.detuning();

    IORelation io;
    if (mode == Mode::approx) {
        const cplx den(d, -g);
        io.r_in = -cplx(d, g) / den;
        io.r_loss = 0.0;
        io.c_x = -std::sqrt(2.0 * g) * f.g0 * f.a_bar / den;
        return io;
    }
    const cplx den(omega - d, gt);
    io.r_in = -cplx(omega - d, -(g - ge)) / den;
    io.r_loss = cplx(0.0, 2.0 * std::sqrt(g * ge)) / den;
    io.c_x = std::sqrt(2.0 * g) * f.g0 * f.a_bar / den;
    return io;
}

}  // namespace ospring
