#include "ospring/oracle/sim.hpp"

#include <cmath>
#include "ospring/detail/strfmt.hpp"

#include "ospring/errors.hpp"
#include "ospring/oracle/rng.hpp"

namespace ospring::oracle {

namespace {

constexpr double two_pi = 2.0 * M_PI;

// Monic polynomial coefficients (ascending powers) from real roots.
std::vector<double> poly_from_roots(const std::vector<cplx>& roots,
                                    const char* what) {
    std::vector<double> c{1.0};
    for (const cplx& r : roots) {
        if (r.imag() != 0.0)
            throw ConfigError(std::string(what) +
                              ": complex kernel roots are not supported in "
                              "time-domain runs");
        c.push_back(0.0);
        for (std::size_t k = c.size() - 1; k > 0; --k)
            c[k] = c[k - 1] - r.real() * c[k];
        c[0] *= -r.real();
    }
    return c;
}

// One field's precomputed constants plus its loop controller.
struct FieldSim {
    double gamma_tot = 0.0;
    double delta = 0.0;
    double gamma = 0.0;
    double gamma_eps = 0.0;
    double sqrt_g = 0.0;
    double sqrt_ge = 0.0;
    double g0 = 0.0;
    cplx a_bar;
    double a_in_bar = 0.0;
    double rho = 0.0;  // -Re(a_out_bar)/a_in_bar: prompt v1 -> dP gain
    double mu = 0.0;   // -Im(a_out_bar)/a_in_bar
    double w_re = 0.0; // 2 sqrt(gamma)/a_in_bar * (Re, Im) of a_out_bar
    double w_im = 0.0;
    double force_coef = 0.0;  // -2 hbar g0
    double v1_std = 1.0;      // sqrt of the amplitude-noise multiplier

    bool loop = false;
    double feedthrough = 0.0;            // prompt controller gain
    std::vector<double> a_ctrl;          // companion matrix, dense rows
    std::vector<double> c_ctrl;          // output row
    std::vector<double> z;               // controller state
    int nz_states = 0;

    cplx a;  // cavity fluctuation state
};

FieldSim make_field_sim(const OpticalField& f, const FeedbackKernel& kernel,
                        double dt) {
    FieldSim s;
    s.gamma_tot = f.gamma_tot;
    s.delta = f.detuning();
    s.gamma = f.gamma();
    s.gamma_eps = f.gamma_eps;
    s.sqrt_g = std::sqrt(s.gamma);
    s.sqrt_ge = std::sqrt(s.gamma_eps);
    s.g0 = f.g0;
    s.a_bar = f.a_bar;
    s.a_in_bar = f.a_in_bar;
    s.force_coef = -2.0 * f.hbar * f.g0;
    s.v1_std = std::sqrt(f.in.v1_density);

    const cplx a_out_bar =
        -f.a_in_bar + std::sqrt(2.0 * s.gamma) * f.a_bar;
    if (!(f.a_in_bar > 0.0))
        throw PhysicsError("time-domain loop needs a driven cavity "
                           "(a_in_bar > 0)");
    s.rho = -a_out_bar.real() / f.a_in_bar;
    s.mu = -a_out_bar.imag() / f.a_in_bar;
    s.w_re = 2.0 * s.sqrt_g / f.a_in_bar * a_out_bar.real();
    s.w_im = 2.0 * s.sqrt_g / f.a_in_bar * a_out_bar.imag();

    switch (kernel.kind) {
        case KernelKind::off:
            return s;
        case KernelKind::ideal:
            throw ConfigError(
                "time-domain runs need a realizable kernel (flat or "
                "rational), not ideal");
        case KernelKind::flat:
            s.loop = true;
            s.feedthrough = kernel.gain;
            return s;
        case KernelKind::rational:
            break;
    }

    if (!kernel.realizable())
        throw ConfigError("rational kernel is not realizable (needs at least "
                          "as many poles as zeros, all poles damped)");
    const std::vector<double> den = poly_from_roots(kernel.poles, "poles");
    std::vector<double> num = poly_from_roots(kernel.zeros, "zeros");
    for (double& c : num) c *= kernel.gain;
    const int n = static_cast<int>(kernel.poles.size());
    s.loop = true;
    s.nz_states = n;
    s.feedthrough =
        kernel.zeros.size() == kernel.poles.size() ? kernel.gain : 0.0;
    // Strictly proper remainder R = num - D*den feeds the state output row.
    s.c_ctrl.assign(n, 0.0);
    for (int k = 0; k < n; ++k) {
        double r = k < static_cast<int>(num.size()) ? num[k] : 0.0;
        r -= s.feedthrough * den[k];
        s.c_ctrl[k] = r;
    }
    // Controllable canonical companion matrix.
    s.a_ctrl.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i + 1 < n; ++i) s.a_ctrl[i * n + i + 1] = 1.0;
    for (int k = 0; k < n; ++k) s.a_ctrl[(n - 1) * n + k] = -den[k];
    s.z.assign(n, 0.0);

    double pole_max = 0.0;
    for (const cplx& p : kernel.poles) pole_max = std::max(pole_max, std::abs(p));
    if (dt * pole_max >= 0.1)
        throw ConfigError(detail::strfmt(
            "dt too coarse for the kernel poles (dt*|p| = %.3g >= 0.1)",
            dt * pole_max));
    return s;
}

// Explicit Euler goes unstable when dt exceeds ~|tr|/det of the cavity mode
// dressed by the prompt loop; refuse before producing garbage.
void check_dressed_mode(const FieldSim& s, double dt) {
    double k_eff = 0.0;
    if (s.loop) {
        const double denom = 1.0 + s.feedthrough * s.rho;
        if (!(denom > 0.05))
            throw PhysicsError(
                "prompt loop nearly singular: 1 + K_c*rho <= 0.05");
        k_eff = s.feedthrough / denom;
    }
    const double det = s.gamma_tot * s.gamma_tot + s.delta * s.delta +
                       2.0 * s.gamma * k_eff * (s.gamma - s.gamma_eps);
    const double tr = -2.0 * s.gamma_tot +
                      2.0 * s.gamma * k_eff * s.rho;
    if (dt * det >= 0.8 * (-tr))
        throw NumericalError(detail::strfmt(
            "dt too coarse for the loop-dressed cavity mode; need dt < %.3g",
            0.8 * (-tr) / det));
}

}  // namespace

SimResult simulate(const SystemConfig& cfg, const TrajectoryConfig& traj) {
    if (!(traj.dt > 0.0)) throw ConfigError("dt must be positive");
    if (!(traj.duration > 0.0)) throw ConfigError("duration must be positive");
    if (traj.decimate < 1) throw ConfigError("decimate must be >= 1");
    if (traj.burn_in < 0.0) throw ConfigError("burn_in must be >= 0");

    const MechanicalOscillator& mech = cfg.mech;
    const double dt = traj.dt;

    double gamma_tot_max = 0.0;
    for (const auto& f : cfg.fields)
        gamma_tot_max = std::max(gamma_tot_max, f.gamma_tot);
    if (dt * gamma_tot_max >= 0.1)
        throw ConfigError(detail::strfmt(
            "dt*gamma_tot = %.3g >= 0.1: the cavity mode is under-resolved",
            dt * gamma_tot_max));
    if (dt * mech.omega_m >= 0.1)
        throw ConfigError("dt*omega_m >= 0.1: oscillator under-resolved");
    if (traj.duration < 100.0 * two_pi / mech.omega_m)
        throw ConfigError(
            "duration must cover at least 100 mechanical periods");

    std::vector<FieldSim> fs;
    for (const auto& f : cfg.fields) {
        fs.push_back(make_field_sim(f, cfg.kernel, dt));
        check_dressed_mode(fs.back(), dt);
    }

    const double m = mech.mass;
    const double k_spring = m * mech.omega_m * mech.omega_m;
    const double s_th = 4.0 * m * mech.gamma_m * cfg.constants.k_b * mech.t_env;
    const double noise_std = traj.noise ? std::sqrt(1.0 / (2.0 * dt)) : 0.0;
    const double th_std = traj.noise ? std::sqrt(s_th / (2.0 * dt)) : 0.0;
    const double det_std =
        cfg.det.eta < 1.0 ? std::sqrt(1.0 - cfg.det.eta) : 0.0;

    const double x_th =
        mech.t_env > 0.0
            ? std::sqrt(cfg.constants.k_b * mech.t_env / k_spring)
            : 0.0;
    const double x_guard =
        1e6 * std::max({x_th, std::abs(traj.x0), 1e-15});

    const auto burn_steps =
        static_cast<std::uint64_t>(std::llround(traj.burn_in / dt));
    const auto rec_steps =
        static_cast<std::uint64_t>(std::llround(traj.duration / dt));
    const std::uint64_t total = burn_steps + rec_steps;
    const auto dec = static_cast<std::uint64_t>(traj.decimate);

    SimResult out;
    out.sample_dt = dt * traj.decimate;
    const std::size_t n_rec = static_cast<std::size_t>(rec_steps / dec);
    out.x.reserve(n_rec);
    out.p.reserve(n_rec);
    out.photocurrent.reserve(n_rec);

    Xoshiro256 rng(traj.seed);
    double x = traj.x0;
    double p = traj.p0;

    for (std::uint64_t i = 0; i < total; ++i) {
        const bool record =
            i >= burn_steps && (i - burn_steps) % dec == 0;

        double force = 0.0;
        double pc0 = 0.0;
        for (std::size_t k = 0; k < fs.size(); ++k) {
            FieldSim& s = fs[k];
            const double v1 =
                traj.noise ? rng.normal() * noise_std * s.v1_std : 0.0;
            const double v2 = traj.noise ? rng.normal() * noise_std : 0.0;
            double v1p = 0.0, v2p = 0.0;
            if (s.gamma_eps > 0.0 && traj.noise) {
                v1p = rng.normal() * noise_std;
                v2p = rng.normal() * noise_std;
            }
            const double nd =
                traj.noise && det_std > 0.0 ? rng.normal() * noise_std : 0.0;

            // Measured power fluctuation, normalized by sqrt(2) a_in_bar:
            // prompt reflection of the (post-loop) input plus the cavity term.
            const double w =
                s.w_re * s.a.real() + s.w_im * s.a.imag();
            const double pre = s.mu * v2 + w + det_std * nd;

            double v1_loop = v1;
            double y_meas = 0.0;
            if (s.loop) {
                double cz = 0.0;
                for (int j = 0; j < s.nz_states; ++j)
                    cz += s.c_ctrl[j] * s.z[j];
                v1_loop = (v1 - cz - s.feedthrough * pre) /
                          (1.0 + s.feedthrough * s.rho);
                y_meas = s.rho * v1_loop + pre;
                // Controller integrates the measurement it just produced.
                if (s.nz_states > 0) {
                    const int n = s.nz_states;
                    std::vector<double>& z = s.z;
                    double last = 0.0;
                    for (int j = 0; j < n; ++j)
                        last += s.a_ctrl[(n - 1) * n + j] * z[j];
                    // dz_j = z_{j+1} for j < n-1 (companion form).
                    double prev = z[0];
                    for (int j = 0; j + 1 < n; ++j) {
                        const double nxt = z[j + 1];
                        z[j] = prev + dt * nxt;
                        prev = nxt;
                    }
                    z[n - 1] = prev + dt * (last + y_meas);
                }
            } else {
                y_meas = s.rho * v1_loop + pre;
            }
            if (k == 0) pc0 = y_meas;

            const cplx drive =
                s.sqrt_g * cplx(v1_loop, v2) + s.sqrt_ge * cplx(v1p, v2p);
            const cplx da =
                dt * (-cplx(s.gamma_tot, s.delta) * s.a -
                      cplx(0.0, s.g0) * s.a_bar * x + drive);
            force += s.force_coef *
                     (s.a_bar.real() * s.a.real() + s.a_bar.imag() * s.a.imag());
            s.a += da;
        }

        if (record) {
            out.x.push_back(x);
            out.p.push_back(p);
            out.photocurrent.push_back(pc0);
        }

        const double th = traj.noise ? rng.normal() * th_std : 0.0;
        const double dx = dt * p / m;
        const double dp =
            dt * (-k_spring * x - mech.gamma_m * p + force + th);
        x += dx;
        p += dp;

        if (!(std::abs(x) <= x_guard) || !std::isfinite(p)) {
            out.unstable = true;
            out.t_unstable = static_cast<double>(i + 1) * dt;
            break;
        }
    }
    return out;
}

}  // namespace ospring::oracle
