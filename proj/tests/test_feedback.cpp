#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "ospring/errors.hpp"
#include "ospring/feedback.hpp"
#include "ospring/oracle/rng.hpp"
#include "ospring/verify.hpp"

using namespace ospring;

namespace {

constexpr double two_pi = 2.0 * 3.14159265358979323846;

SystemConfig desk() { return derive(desk_input()); }

FeedbackKernel flat(double gain) {
    FeedbackKernel k;
    k.kind = KernelKind::flat;
    k.gain = gain;
    return k;
}

FeedbackKernel ideal() {
    FeedbackKernel k;
    k.kind = KernelKind::ideal;
    return k;
}

cplx coeff(const NoiseVector& v, ChannelKind kind, const std::string& id) {
    return v.get(NoiseChannel{kind, id});
}

}  // namespace

TEST_CASE("photocurrent carries shot, loss, and detector channels") {
    const SystemConfig cfg = desk();
    const OpticalField& f = cfg.field("blue");
    const double w = two_pi * 500.0;

    const PhotocurrentVector pc = photocurrent(f, cfg.det, w);
    const cplx v1 = coeff(pc.noise, ChannelKind::v1, "blue");
    CHECK(v1.real() ==
          doctest::Approx(std::sqrt(2.0) * f.a_in_bar).epsilon(1e-14));
    CHECK(v1.imag() == 0.0);

    // eta = 0.9: detector vacuum enters at one tenth the shot power
    const cplx nd = coeff(pc.noise, ChannelKind::det, "blue");
    CHECK(std::norm(nd) / std::norm(v1) ==
          doctest::Approx(1.0 - cfg.det.eta).epsilon(1e-12));

    // loss-port vacuum leaks into the measurement
    CHECK(std::abs(coeff(pc.noise, ChannelKind::v1p, "blue")) > 0.0);
    CHECK(std::abs(coeff(pc.noise, ChannelKind::v2p, "blue")) > 0.0);

    // position transduction: -2 g0 n Delta (2 gamma_eps - i omega) / l2
    const double l2 = f.gamma() * f.gamma() + f.detuning() * f.detuning();
    const cplx want = -2.0 * f.g0 * f.n_circ * f.detuning() *
                      cplx(2.0 * f.gamma_eps, -w) / l2;
    CHECK(std::abs(pc.c_x - want) <= 1e-12 * std::abs(want));

    // a perfect detector has no vacuum port of its own
    const PhotocurrentVector perfect = photocurrent(f, Detector{1.0}, w);
    CHECK(coeff(perfect.noise, ChannelKind::det, "blue") == cplx(0.0, 0.0));
}

TEST_CASE("feedback term is the loop's handle on the susceptibility") {
    const SystemConfig cfg = desk();
    for (const auto& f : cfg.fields) {
        for (const double w : {0.0, 1e3, 1e5}) {
            const double mg = spring_approx(f).damping;
            const cplx want = mg * cplx(2.0 * f.gamma_eps, -w);
            CHECK(feedback_term(f, w) == want);
        }
    }
}

TEST_CASE("open kernel leaves the force noise untouched") {
    const SystemConfig cfg = desk();
    const OpticalField& f = cfg.field("blue");
    const double w = two_pi * 800.0;

    FeedbackKernel off;
    const ClosedLoopResult r =
        close_loop(f, cfg.mech, cfg.fields, cfg.det, off, w);
    CHECK(r.chi_inv_closed == open_loop_form(cfg.mech, cfg.fields).chi_inv(w));

    const NoiseVector want = force_noise(f, w, Mode::approx);
    REQUIRE(r.residual_force.coeffs.size() == want.coeffs.size());
    for (const auto& [ch, c] : want.coeffs)
        CHECK(r.residual_force.get(ch) == c);

    // zero flat gain is the same loop
    const ClosedLoopResult r0 =
        close_loop(f, cfg.mech, cfg.fields, cfg.det, flat(0.0), w);
    CHECK(r0.chi_inv_closed == r.chi_inv_closed);
    CHECK(r0.residual_force.get(NoiseChannel{ChannelKind::v1, "blue"}) ==
          want.get(NoiseChannel{ChannelKind::v1, "blue"}));
}

TEST_CASE("flat-gain residual scales as one over one plus gain") {
    const SystemConfig cfg = desk();
    const OpticalField& f = cfg.field("blue");
    const double w = two_pi * 1200.0;
    const NoiseChannel v1{ChannelKind::v1, "blue"};
    const NoiseChannel nd{ChannelKind::det, "blue"};

    const auto res = [&](double gain) {
        return close_loop(f, cfg.mech, cfg.fields, cfg.det, flat(gain), w)
            .residual_force;
    };
    const NoiseVector r9 = res(9.0);
    const NoiseVector r99 = res(99.0);

    // v1 coefficient: -pref / (1 + K_c)
    CHECK(r9.get(v1).real() / r99.get(v1).real() ==
          doctest::Approx(100.0 / 10.0).epsilon(1e-12));
    // detector channel: pref sqrt(1-eta) K_c / (1 + K_c)
    CHECK(r9.get(nd).real() / r99.get(nd).real() ==
          doctest::Approx((9.0 / 10.0) / (99.0 / 100.0)).epsilon(1e-12));

    // gain -1 makes the loop singular
    CHECK_THROWS_AS(res(-1.0), PhysicsError);
    CHECK_THROWS_AS(closed_loop_form(cfg.mech, cfg.fields, flat(-1.0)),
                    PhysicsError);
}

TEST_CASE("stacked closed loop agrees with the quadratic form") {
    const SystemConfig cfg = desk();
    for (const double gain : {1.0, 100.0, 1e6}) {
        const FeedbackKernel k = flat(gain);
        const QuadraticForm form = closed_loop_form(cfg.mech, cfg.fields, k);
        for (const double w : {two_pi * 50.0, two_pi * 1e3, two_pi * 2e4}) {
            const StackClosedLoop s =
                close_loop_stack(cfg.mech, cfg.fields, cfg.det, k, w);
            CHECK(std::abs(s.chi_inv - form.chi_inv(w)) <=
                  1e-12 * std::abs(form.chi_inv(w)));
            CHECK(s.residuals.size() == cfg.fields.size());
        }
    }
}

TEST_CASE("ideal loop removes the optical damping exactly") {
    const SystemConfig cfg = desk();
    const QuadraticForm form = closed_loop_form(cfg.mech, cfg.fields, ideal());
    CHECK(form.gamma == cfg.mech.gamma_m);

    // the loop also restores the lossless rigidity of each spring
    double want_sq = cfg.mech.omega_m * cfg.mech.omega_m;
    for (const auto& f : cfg.fields) {
        OpticalFieldInput in = f.in;
        in.epsilon = 0.0;
        want_sq += spring_approx(derive_field(in, cfg.constants))
                       .omega_os_sq(cfg.mech.mass);
    }
    CHECK(form.omega_sq == doctest::Approx(want_sq).epsilon(1e-13));

    // amplitude-quadrature drive is gone from the residual
    const ClosedLoopResult r = close_loop(cfg.field("blue"), cfg.mech,
                                          cfg.fields, cfg.det, ideal(),
                                          two_pi * 1e3);
    CHECK(r.residual_force.get(NoiseChannel{ChannelKind::v1, "blue"}) ==
          cplx(0.0, 0.0));
}

TEST_CASE("infinite-gain residual density matches the closed form") {
    const SystemConfig cfg = desk();
    oracle::Xoshiro256 rng(4711);
    for (const auto& f : cfg.fields) {
        for (int i = 0; i < 100; ++i) {
            const double w =
                two_pi * std::pow(10.0, 1.0 + 5.0 * rng.uniform());
            const ClosedLoopResult r =
                close_loop(f, cfg.mech, cfg.fields, cfg.det, ideal(), w);
            const double direct = spectral_density(r.residual_force);
            const double closed = residual_spectrum(f, cfg.det, w);
            CHECK(std::abs(direct - closed) <= 1e-10 * closed);
        }
    }
}

TEST_CASE("rational kernels close the loop per frequency only") {
    const SystemConfig cfg = desk();
    FeedbackKernel k;
    k.kind = KernelKind::rational;
    k.gain = 100.0;
    k.poles = {cplx(-two_pi * 1e4, 0.0)};

    CHECK_THROWS_AS(closed_loop_form(cfg.mech, cfg.fields, k), PhysicsError);

    // at low frequency the filter still has most of its gain and the loop
    // behaves like the flat case evaluated there
    const double w = two_pi * 100.0;
    const ClosedLoopResult r =
        close_loop(cfg.field("blue"), cfg.mech, cfg.fields, cfg.det, k, w);
    CHECK(r.kernel_kind == KernelKind::rational);
    const cplx open = open_loop_form(cfg.mech, cfg.fields).chi_inv(w);
    CHECK(std::abs(r.chi_inv_closed - open) > 0.0);
}

TEST_CASE("residual temperature and required gain bookkeeping") {
    const SystemConfig cfg = desk();
    const OpticalField& f = cfg.field("blue");
    const double w = two_pi * 1e3;

    const double t = residual_temperature(f, cfg.mech, cfg.det, w,
                                          cfg.constants);
    const double want = residual_spectrum(f, cfg.det, w) /
                        (4.0 * cfg.mech.mass * cfg.mech.gamma_m *
                         cfg.constants.k_b);
    CHECK(t == doctest::Approx(want).epsilon(1e-15));
    CHECK(t > 0.0);

    const double g_os = spring_approx(f).gamma_os(cfg.mech.mass);
    CHECK(required_gain(g_os, cfg.mech.gamma_m) ==
          doctest::Approx(std::abs(g_os) / cfg.mech.gamma_m).epsilon(1e-15));
    CHECK_THROWS_AS(required_gain(1.0, 0.0), PhysicsError);

    MechanicalOscillator frozen = cfg.mech;
    frozen.gamma_m = 0.0;
    CHECK_THROWS_AS(
        residual_temperature(f, frozen, cfg.det, w, cfg.constants),
        PhysicsError);
}
