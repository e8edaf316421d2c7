#include "ospring/params.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include "ospring/detail/strfmt.hpp"

#include "ospring/errors.hpp"

namespace ospring {

void validate(const PhysicalConstants& pc) {
    if (!(pc.hbar > 0.0) || !(pc.k_b > 0.0) || !(pc.c > 0.0)) {
        throw ConfigError("physical constants must be positive");
    }
}

MechanicalOscillator MechanicalOscillator::make(double mass, double omega_m,
                                                double q, double t_env) {
    if (!(mass > 0.0)) throw ConfigError("oscillator mass must be positive");
    if (!(omega_m > 0.0)) throw ConfigError("omega_m must be positive");
    if (!(q > 0.0)) throw ConfigError("Q must be positive");
    if (t_env < 0.0) throw ConfigError("environment temperature must be >= 0");
    MechanicalOscillator m;
    m.mass = mass;
    m.q_factor = q;
    m.gamma_m = omega_m / q;
    // Re-round omega_m so gamma_m * q == omega_m holds bit-exactly.
    m.omega_m = m.gamma_m * q;
    m.t_env = t_env;
    return m;
}

cplx FeedbackKernel::eval(double omega) const {
    switch (kind) {
        case KernelKind::off:
            return 0.0;
        case KernelKind::flat:
            return gain;
        case KernelKind::rational: {
            const cplx s(0.0, -omega);
            cplx k = gain;
            for (const auto& z : zeros) k *= s - z;
            for (const auto& p : poles) k /= s - p;
            return k;
        }
        case KernelKind::ideal:
            throw PhysicsError(
                "ideal kernel has no finite transfer value; callers take the "
                "infinite-gain limit analytically");
    }
    return 0.0;
}

bool FeedbackKernel::realizable() const {
    switch (kind) {
        case KernelKind::off:
        case KernelKind::flat:
            return true;
        case KernelKind::rational:
            return poles.size() >= zeros.size() &&
                   std::ranges::all_of(poles,
                                       [](cplx p) { return p.real() < 0.0; });
        case KernelKind::ideal:
            return false;
    }
    return false;
}

OpticalField derive_field(const OpticalFieldInput& in,
                          const PhysicalConstants& pc,
                          std::vector<std::string>* warnings) {
    validate(pc);
    if (in.label.empty()) throw ConfigError("field label must be non-empty");
    if (!(in.length > 0.0))
        throw ConfigError("field '" + in.label + "': length must be positive");
    if (!(in.wavelength > 0.0))
        throw ConfigError("field '" + in.label +
                          "': wavelength_m is required and must be positive");
    if (!(in.gamma > 0.0))
        throw ConfigError("field '" + in.label + "': gamma must be positive");
    if (in.epsilon < 0.0 || in.epsilon >= 1.0)
        throw ConfigError("field '" + in.label + "': loss must be in [0, 1)");
    if (in.p_circ < 0.0)
        throw ConfigError("field '" + in.label + "': power must be >= 0");
    if (in.v1_density < 1.0)
        throw ConfigError("field '" + in.label +
                          "': amplitude noise factor must be >= 1");

    OpticalField f;
    f.in = in;
    f.hbar = pc.hbar;
    f.omega0 = 2.0 * M_PI * pc.c / in.wavelength;
    f.g0 = f.omega0 / in.length;
    f.gamma_eps = pc.c * in.epsilon / (4.0 * in.length);
    f.gamma_tot = in.gamma + f.gamma_eps;
    // Circulating power over the stored energy per photon round trip:
    // n = 2 L P / (hbar omega0 c).
    f.n_circ = 2.0 * in.length * in.p_circ / (pc.hbar * f.omega0 * pc.c);
    // Steady amplitude carries the cavity-response phase; the input field
    // is taken real positive.
    const cplx u = std::sqrt(2.0 * in.gamma) /
                   cplx(f.gamma_tot, in.detuning);
    f.a_bar = std::sqrt(f.n_circ) * u / std::abs(u);
    f.a_in_bar = std::sqrt(f.n_circ *
                           (f.gamma_tot * f.gamma_tot +
                            in.detuning * in.detuning) /
                           (2.0 * in.gamma));
    f.p_in = pc.hbar * f.omega0 * f.a_in_bar * f.a_in_bar;

    if (warnings) {
        std::string lower = in.label;
        std::ranges::transform(lower, lower.begin(),
                               [](unsigned char ch) { return std::tolower(ch); });
        if (lower.find("blue") != std::string::npos && in.detuning > 0.0) {
            warnings->push_back(detail::strfmt(
                "field '%s' is labeled blue but has detuning > 0 "
                "(blue means Delta < 0 here)", in.label.c_str()));
        }
        if (lower.find("red") != std::string::npos && in.detuning < 0.0) {
            warnings->push_back(detail::strfmt(
                "field '%s' is labeled red but has detuning < 0",
                in.label.c_str()));
        }
    }
    return f;
}

double finesse(const OpticalField& f, const PhysicalConstants& pc) {
    return (M_PI * pc.c / f.in.length) / (2.0 * f.in.gamma);
}

double decoherence_ratio(double t_kelvin, double omega, double q,
                         const PhysicalConstants& pc) {
    if (!(omega > 0.0) || !(q > 0.0)) {
        throw ConfigError("decoherence ratio needs omega > 0 and Q > 0");
    }
    return pc.k_b * t_kelvin / (pc.hbar * omega * q);
}

double ground_state_threshold(double omega, double q,
                              const PhysicalConstants& pc) {
    return pc.hbar * omega * q / pc.k_b;
}

}  // namespace ospring
