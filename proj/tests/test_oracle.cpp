#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "ospring/errors.hpp"
#include "ospring/oracle/compare.hpp"
#include "ospring/oracle/rng.hpp"
#include "ospring/oracle/sim.hpp"
#include "ospring/oracle/welch.hpp"
#include "ospring/verify.hpp"

using namespace ospring;
using oracle::SpectrumEstimate;

namespace {

constexpr double two_pi = 2.0 * 3.14159265358979323846;

// 1 ug oscillator at 1 kHz, Q = 2: relaxes in fractions of a millisecond,
// so equilibrium statistics converge in well under a second of model time.
ConfigInput bare_input() {
    ConfigInput in;
    in.mass_kg = 1e-9;
    in.f_m_hz = 1000.0;
    in.q = 2.0;
    in.t_env_k = 300.0;
    return in;
}

double mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) /
           static_cast<double>(v.size());
}

double variance(const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (const double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("welch psd of unit-density white noise is flat at one") {
    const double dt = 1e-3;
    const std::size_t n = 1u << 17;
    // sigma^2 = 1/(2 dt) makes the single-sided density exactly 1
    const double sigma = std::sqrt(1.0 / (2.0 * dt));
    oracle::Xoshiro256 rng(42);
    std::vector<double> x(n);
    for (auto& v : x) v = sigma * rng.normal();

    const SpectrumEstimate est = oracle::psd_welch(x, dt, 1u << 12);
    CHECK(est.n_segments == 63);
    CHECK(est.df == doctest::Approx(1.0 / (4096.0 * dt)).epsilon(1e-12));

    CHECK(mean(est.psd) == doctest::Approx(1.0).epsilon(0.02));
    CHECK(est.ts_variance ==
          doctest::Approx(1.0 / (2.0 * dt)).epsilon(0.02));
    CHECK(est.psd_integral / est.ts_variance ==
          doctest::Approx(1.0).epsilon(0.05));

    // per-bin scatter tracks 1/sqrt(n_segments)
    std::vector<double> rs = est.rel_std;
    std::nth_element(rs.begin(), rs.begin() + rs.size() / 2, rs.end());
    const double median = rs[rs.size() / 2];
    CHECK(median > 0.08);
    CHECK(median < 0.20);

    CHECK(est.freq.front() == 0.0);
    CHECK(est.freq.back() == doctest::Approx(0.5 / dt).epsilon(1e-12));
}

TEST_CASE("fft recovers a pure tone") {
    const std::size_t n = 1024;
    std::vector<double> re(n), im(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        re[i] = std::cos(two_pi * 5.0 * static_cast<double>(i) /
                         static_cast<double>(n));
    oracle::fft_pow2(re, im);

    const auto mag = [&](std::size_t k) { return std::hypot(re[k], im[k]); };
    CHECK(mag(5) == doctest::Approx(512.0).epsilon(1e-9));
    CHECK(mag(n - 5) == doctest::Approx(512.0).epsilon(1e-9));
    CHECK(mag(0) <= 1e-9 * 512.0);
    CHECK(mag(17) <= 1e-9 * 512.0);
}

TEST_CASE("spectral estimators reject malformed input") {
    std::vector<double> x(4096, 0.0);
    CHECK_THROWS_AS(oracle::psd_welch(x, 1e-3, 1000), NumericalError);
    CHECK_THROWS_AS(oracle::psd_welch(x, 0.0, 1024), NumericalError);
    std::vector<double> tiny(128, 0.0);
    CHECK_THROWS_AS(oracle::psd_welch(tiny, 1e-3, 1024), NumericalError);

    std::vector<double> re(6, 0.0), im(6, 0.0);
    CHECK_THROWS_AS(oracle::fft_pow2(re, im), NumericalError);
}

TEST_CASE("banded rebin averages empirical and analytic identically") {
    SpectrumEstimate est;
    const int n = 4000;
    for (int i = 0; i <= n; ++i) {
        const double f = static_cast<double>(i);
        est.freq.push_back(f);
        est.psd.push_back(f * f);
        est.rel_std.push_back(0.01);
    }
    est.df = 1.0;
    est.n_segments = 10;

    const auto cmp = oracle::log_rebin(
        est, [](double f) { return f * f; }, 10.0, 1000.0, 4);
    REQUIRE(cmp.empirical.freq.size() == cmp.analytic.size());
    REQUIRE(!cmp.analytic.empty());
    for (std::size_t i = 0; i < cmp.analytic.size(); ++i) {
        CHECK(cmp.empirical.psd[i] ==
              doctest::Approx(cmp.analytic[i]).epsilon(1e-14));
        CHECK(cmp.empirical.freq[i] >= 10.0);
        CHECK(cmp.empirical.freq[i] <= 1000.0);
        CHECK(cmp.empirical.rel_std[i] < 0.01);
    }
}

TEST_CASE("compare skips bins whose estimate is too noisy") {
    SpectrumEstimate est;
    std::vector<double> analytic;
    for (int i = 0; i < 100; ++i) {
        est.freq.push_back(static_cast<double>(i + 1));
        est.psd.push_back(1.0);
        est.rel_std.push_back(0.01);
        analytic.push_back(1.0);
    }

    auto ok = oracle::compare(analytic, est, 1.0, 100.0, 0.15, 0.2);
    CHECK(ok.pass);
    CHECK(ok.bins_used == 100);
    CHECK(ok.max_rel_dev <= 1e-12);

    analytic[50] = 2.0;
    auto bad = oracle::compare(analytic, est, 1.0, 100.0, 0.15, 0.2);
    CHECK_FALSE(bad.pass);
    CHECK(bad.worst_freq == est.freq[50]);

    est.rel_std[50] = 0.5;  // too noisy: the bin drops out of the comparison
    auto skipped = oracle::compare(analytic, est, 1.0, 100.0, 0.15, 0.2);
    CHECK(skipped.pass);
    CHECK(skipped.bins_used == 99);
}

TEST_CASE("identical seeds give bit-identical trajectories") {
    const SystemConfig cfg = derive(bare_input());
    oracle::TrajectoryConfig traj;
    traj.dt = 1e-6;
    traj.duration = 0.12;
    traj.decimate = 10;
    traj.seed = 7;

    const auto a = oracle::simulate(cfg, traj);
    const auto b = oracle::simulate(cfg, traj);
    REQUIRE(a.x.size() == b.x.size());
    CHECK(a.x == b.x);
    CHECK(a.p == b.p);
    CHECK_FALSE(a.unstable);

    traj.seed = 8;
    const auto c = oracle::simulate(cfg, traj);
    CHECK(a.x != c.x);
}

TEST_CASE("thermal equilibrium satisfies equipartition") {
    const SystemConfig cfg = derive(bare_input());
    oracle::TrajectoryConfig traj;
    traj.dt = 1e-6;
    traj.duration = 0.6;
    traj.burn_in = 0.05;
    traj.decimate = 5;
    traj.seed = 11;

    const auto res = oracle::simulate(cfg, traj);
    REQUIRE_FALSE(res.unstable);
    const double var = variance(res.x);
    const double want = cfg.constants.k_b * cfg.mech.t_env /
                        (cfg.mech.mass * cfg.mech.omega_m * cfg.mech.omega_m);
    CHECK(var == doctest::Approx(want).epsilon(0.25));
}

TEST_CASE("homogeneous decay follows the mechanical damping rate") {
    const SystemConfig cfg = derive(bare_input());
    oracle::TrajectoryConfig traj;
    traj.dt = 2e-7;
    traj.duration = 0.12;
    traj.decimate = 5;
    traj.noise = false;
    traj.x0 = 1e-10;

    const auto res = oracle::simulate(cfg, traj);
    REQUIRE_FALSE(res.unstable);

    const double k = cfg.mech.mass * cfg.mech.omega_m * cfg.mech.omega_m;
    const auto energy = [&](std::size_t i) {
        return 0.5 * res.p[i] * res.p[i] / cfg.mech.mass +
               0.5 * k * res.x[i] * res.x[i];
    };
    // average over one mechanical period to kill the 2 omega ripple
    const auto window_mean = [&](double t0) {
        const std::size_t i0 =
            static_cast<std::size_t>(t0 / res.sample_dt);
        const std::size_t len =
            static_cast<std::size_t>(1e-3 / res.sample_dt);
        double s = 0.0;
        for (std::size_t i = i0; i < i0 + len; ++i) s += energy(i);
        return s / static_cast<double>(len);
    };
    const double e0 = window_mean(0.001);
    const double e1 = window_mean(0.003);
    const double want = std::exp(-cfg.mech.gamma_m * 0.002);
    CHECK(e1 / e0 == doctest::Approx(want).epsilon(0.05));
}

TEST_CASE("anti-damped stacks trip the runaway guard") {
    ConfigInput in = desk_input();
    in.fields.erase(in.fields.begin());  // keep the blue field only
    REQUIRE(in.fields[0].label == "blue");
    in.kernel.kind = "off";
    in.t_env_k = 0.0;
    const SystemConfig cfg = derive(in);

    oracle::TrajectoryConfig traj;
    traj.dt = 2e-7;
    traj.duration = 1.2;
    traj.decimate = 100;
    traj.noise = false;
    traj.x0 = 1e-12;

    const auto res = oracle::simulate(cfg, traj);
    CHECK(res.unstable);
    // amplitude e-folds at |gamma_net|/2 = (314.2 - 62.8)/2 per second,
    // so the factor-1e6 guard trips near t = ln(1e6)/125.7
    CHECK(res.t_unstable > 0.05);
    CHECK(res.t_unstable < 0.2);
}

TEST_CASE("simulation guards reject under-resolved setups") {
    const SystemConfig desk = derive(desk_input());
    oracle::TrajectoryConfig traj;
    traj.dt = 1e-5;  // gamma_tot * dt > 0.1
    traj.duration = 2.0;
    CHECK_THROWS_AS(oracle::simulate(desk, traj), ConfigError);

    const SystemConfig bare = derive(bare_input());
    oracle::TrajectoryConfig short_run;
    short_run.dt = 1e-6;
    short_run.duration = 0.05;  // under 100 mechanical periods
    CHECK_THROWS_AS(oracle::simulate(bare, short_run), ConfigError);

    oracle::TrajectoryConfig bad_dec;
    bad_dec.dt = 1e-6;
    bad_dec.duration = 0.12;
    bad_dec.decimate = 0;
    CHECK_THROWS_AS(oracle::simulate(bare, bad_dec), ConfigError);

    ConfigInput ideal_in = desk_input();
    ideal_in.kernel.kind = "ideal";
    oracle::TrajectoryConfig ok;
    ok.dt = 2e-7;
    ok.duration = 1.2;
    CHECK_THROWS_AS(oracle::simulate(derive(ideal_in), ok), ConfigError);

    ConfigInput rhp = desk_input();
    rhp.kernel.kind = "rational";
    rhp.kernel.gain = 1.0;
    rhp.kernel.poles_hz = {+1e4};  // undamped pole: not simulable
    CHECK_THROWS_AS(oracle::simulate(derive(rhp), ok), ConfigError);
}
