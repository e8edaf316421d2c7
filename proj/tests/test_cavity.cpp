#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "ospring/cavity.hpp"
#include "ospring/errors.hpp"
#include "ospring/oracle/rng.hpp"
#include "ospring/params.hpp"

using namespace ospring;

namespace {

constexpr double two_pi = 2.0 * 3.14159265358979323846;

OpticalFieldInput table_blue() {
    OpticalFieldInput in;
    in.label = "blue";
    in.length = 1e-3;
    in.wavelength = 1.064e-6;
    in.gamma = two_pi * 20e6;
    in.detuning = -two_pi * 20e6;
    in.epsilon = 30e-6;
    in.p_circ = 0.390;
    return in;
}

OpticalFieldInput table_red() {
    OpticalFieldInput in;
    in.label = "red";
    in.length = 1e-3;
    in.wavelength = 1.064e-6;
    in.gamma = two_pi * 4e6;
    in.detuning = two_pi * 4e6;
    in.epsilon = 30e-6;
    in.p_circ = 0.016;
    return in;
}

// Independent long-double evaluation with the complex division rationalized
// by hand, so it shares no arithmetic path with the library:
//   K = S / D,  D = (w + i*gt)^2 - d^2,  S = 2 hbar g0^2 n d.
struct Kld {
    long double re, im;
};

Kld spring_oracle(const OpticalField& f, double omega) {
    const long double g0 = f.g0;
    const long double n = f.n_circ;
    const long double d = f.in.detuning;
    const long double gt = f.gamma_tot;
    const long double w = omega;
    const long double s = 2.0L * static_cast<long double>(f.hbar) * g0 * g0 *
                          n * d;
    const long double dre = w * w - gt * gt - d * d;
    const long double dim = 2.0L * w * gt;
    const long double m2 = dre * dre + dim * dim;
    return {s * dre / m2, -s * dim / m2};
}

double rel_err(cplx got, Kld want) {
    const long double scale =
        std::max(std::hypot(want.re, want.im), 1e-300L);
    const long double dre = static_cast<long double>(got.real()) - want.re;
    const long double dim = static_cast<long double>(got.imag()) - want.im;
    return static_cast<double>(std::hypot(dre, dim) / scale);
}

std::vector<double> log_omegas(double lo, double hi, int n) {
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i)
        w[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
    return w;
}

}  // namespace

TEST_CASE("exact spring matches an independent high-precision evaluation") {
    const PhysicalConstants pc;
    const OpticalField blue = derive_field(table_blue(), pc);

    // frozen spot values computed for the blue field at 50-digit precision
    struct Spot {
        double f_hz, re, im;
    };
    const Spot spots[] = {
        {1e5, 36.003708203996177, 0.17999244615534702},
        {5e6, 34.828255679686047, 8.9813862511810097},
        {40e6, -7.0454017295740022, 14.606611329126748},
    };
    for (const auto& s : spots) {
        const cplx k = spring_exact(blue, two_pi * s.f_hz);
        const double scale = std::abs(cplx(s.re, s.im));
        CHECK(std::abs(k.real() - s.re) <= 1e-12 * scale);
        CHECK(std::abs(k.imag() - s.im) <= 1e-12 * scale);
    }

    const OpticalField red = derive_field(table_red(), pc);
    for (const OpticalField& f : {blue, red}) {
        for (const double w : log_omegas(1e2, 1e9, 50)) {
            CHECK(rel_err(spring_exact(f, w), spring_oracle(f, w)) <= 1e-13);
        }
    }
}

TEST_CASE("low-frequency decomposition converges to the exact spring") {
    const PhysicalConstants pc;
    OpticalFieldInput in = table_blue();
    in.epsilon = 0.0;
    const OpticalField f = derive_field(in, pc);
    const double l2 =
        f.gamma() * f.gamma() + f.detuning() * f.detuning();
    const SpringCoefficient k = spring_approx(f);

    for (const double frac : {1e-3, 3e-3, 1e-2, 3e-2}) {
        const double w = frac * f.gamma();
        const cplx exact = spring_exact(f, w);
        const double diff = std::abs(k.at(w) - exact);
        // leading truncation is O(omega^2 / (gamma^2 + Delta^2))
        CHECK(diff / std::abs(exact) <= 10.0 * w * w / l2);
    }

    // with loss, the first-order correction is what the stiffness keeps
    OpticalFieldInput lossy = table_blue();
    const OpticalField fl = derive_field(lossy, pc);
    const double l2l =
        fl.gamma() * fl.gamma() + fl.detuning() * fl.detuning();
    const double want =
        1.0 - 4.0 * fl.gamma() * fl.gamma_eps / l2l;
    CHECK(spring_approx(fl).stiffness / k.stiffness ==
          doctest::Approx(want).epsilon(1e-12));
    // damping keeps the input-coupler rate only
    CHECK(spring_approx(fl).damping ==
          doctest::Approx(4.0 * fl.hbar * fl.g0 * fl.g0 * fl.n_circ *
                          fl.gamma() * fl.detuning() / (l2l * l2l))
              .epsilon(1e-12));
}

TEST_CASE("spring sign follows the detuning") {
    const PhysicalConstants pc;
    const OpticalField blue = derive_field(table_blue(), pc);
    const OpticalField red = derive_field(table_red(), pc);

    CHECK(spring_approx(blue).stiffness > 0.0);
    CHECK(spring_approx(blue).damping < 0.0);
    CHECK(spring_approx(red).stiffness < 0.0);
    CHECK(spring_approx(red).damping > 0.0);
    CHECK(spring_exact(blue, 1.0).real() > 0.0);
    CHECK(spring_exact(red, 1.0).real() < 0.0);
}

TEST_CASE("force noise coefficients reproduce the closed-form density") {
    const PhysicalConstants pc;
    oracle::Xoshiro256 rng(2024);

    for (int trial = 0; trial < 20; ++trial) {
        OpticalFieldInput in;
        in.label = "t";
        in.length = 1e-3;
        in.wavelength = 1.064e-6;
        in.gamma = two_pi * std::pow(10.0, 4.0 + 4.0 * rng.uniform());
        const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        in.detuning = sign * in.gamma * (0.3 + 2.7 * rng.uniform());
        // loss rate up to half the coupler rate
        in.epsilon =
            0.5 * rng.uniform() * in.gamma * 4.0 * in.length / pc.c;
        in.p_circ = 1e-3 * std::pow(10.0, 3.0 * rng.uniform());
        const OpticalField f = derive_field(in, pc);

        for (int j = 0; j < 5; ++j) {
            const double w = f.gamma() * 5.0 * rng.uniform();
            const double direct =
                spectral_density(force_noise(f, w, Mode::exact));
            const double closed = force_spectrum_exact_lossy(f, w);
            CHECK(std::abs(direct - closed) <= 1e-12 * closed);
        }
    }

    // the lossless closed form is the epsilon = 0 limit of the lossy one,
    // and a lossy cavity drives the mirror exactly like a lossless cavity
    // of the same total linewidth and photon number (loss-port multiplicity
    // times the broadened response collapses to gamma -> gamma_tot)
    OpticalFieldInput in = table_blue();
    in.epsilon = 0.0;
    const OpticalField f0 = derive_field(in, pc);
    const OpticalField fl = derive_field(table_blue(), pc);
    OpticalFieldInput eq_in = table_blue();
    eq_in.epsilon = 0.0;
    eq_in.gamma = fl.gamma_tot;  // n_circ is coupling-independent at fixed P
    const OpticalField feq = derive_field(eq_in, pc);
    for (const double w : log_omegas(1e3, 1e9, 20)) {
        CHECK(force_spectrum_exact(f0, w) ==
              doctest::Approx(force_spectrum_exact_lossy(f0, w))
                  .epsilon(1e-12));
        CHECK(force_spectrum_exact_lossy(fl, w) ==
              doctest::Approx(force_spectrum_exact(feq, w)).epsilon(1e-12));
    }
}

TEST_CASE("quantum backaction spot value") {
    const PhysicalConstants pc;
    const OpticalField blue = derive_field(table_blue(), pc);
    CHECK(force_spectrum_exact_lossy(blue, two_pi * 1e5) ==
          doctest::Approx(7.7297596104674056e-33).epsilon(1e-12));
}

TEST_CASE("power rescaling is exact") {
    const PhysicalConstants pc;
    const OpticalField f1 = derive_field(table_blue(), pc);
    OpticalFieldInput doubled = table_blue();
    doubled.p_circ *= 2.0;
    const OpticalField f2 = derive_field(doubled, pc);

    CHECK(f2.n_circ == 2.0 * f1.n_circ);
    CHECK(f2.stiffness_scale() == 2.0 * f1.stiffness_scale());
    for (const double w : log_omegas(1e3, 1e9, 24)) {
        CHECK(spring_exact(f2, w) == 2.0 * spring_exact(f1, w));
        CHECK(force_spectrum_exact_lossy(f2, w) ==
              2.0 * force_spectrum_exact_lossy(f1, w));
    }
    const SpringCoefficient k1 = spring_approx(f1);
    const SpringCoefficient k2 = spring_approx(f2);
    CHECK(k2.stiffness == 2.0 * k1.stiffness);
    CHECK(k2.damping == 2.0 * k1.damping);
}

TEST_CASE("input reflection conserves photons") {
    const PhysicalConstants pc;
    oracle::Xoshiro256 rng(77);

    OpticalFieldInput in = table_blue();
    in.epsilon = 0.0;
    const OpticalField lossless = derive_field(in, pc);
    const OpticalField lossy = derive_field(table_blue(), pc);

    for (int i = 0; i < 20; ++i) {
        const double w = lossy.gamma() * 10.0 * rng.uniform();
        const IORelation r0 = input_output(lossless, w, Mode::exact);
        CHECK(std::abs(std::abs(r0.r_in) - 1.0) <= 1e-12);
        CHECK(std::abs(r0.r_loss) == 0.0);

        // with a loss port the two outputs share the photon flux
        const IORelation rl = input_output(lossy, w, Mode::exact);
        CHECK(std::norm(rl.r_in) + std::norm(rl.r_loss) ==
              doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(rl.r_in) < 1.0);
    }

    // approx mode: the reflection phasor is frequency-flat and unimodular
    const IORelation ra = input_output(lossless, 0.0, Mode::approx);
    CHECK(std::abs(std::abs(ra.r_in) - 1.0) <= 1e-12);
}
