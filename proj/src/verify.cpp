#include "ospring/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include "ospring/detail/strfmt.hpp"
#include <thread>

#include "ospring/budget.hpp"
#include "ospring/errors.hpp"
#include "ospring/oracle/compare.hpp"
#include "ospring/oracle/rng.hpp"
#include "ospring/oracle/sim.hpp"
#include "ospring/oracle/welch.hpp"

namespace ospring {

namespace {

constexpr double two_pi = 2.0 * M_PI;

void run_parallel(std::vector<std::function<void()>>& tasks, int threads) {
    if (threads <= 0) {
        threads = static_cast<int>(std::thread::hardware_concurrency());
        if (threads < 1) threads = 1;
    }
    threads = std::min<int>(threads, static_cast<int>(tasks.size()));
    if (threads <= 1) {
        for (auto& t : tasks) t();
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(tasks.size());
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            std::size_t i;
            while ((i = next.fetch_add(1)) < tasks.size()) {
                try {
                    tasks[i]();
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (const double x : v) m = std::max(m, std::abs(x));
    return m;
}

// (a) No optics, thermal force only: <x^2> must hit k_B T / (m omega_m^2).
CheckResult check_equipartition(int threads) {
    CheckResult res{"equipartition", true, ""};
    ConfigInput base = desk_input();
    base.fields.clear();
    base.kernel.kind = "off";

    const double temps[3] = {1e-3, 1.0, 300.0};
    struct Row {
        double t, est, target, sigma;
        bool unstable;
    };
    std::vector<Row> rows(3);

    std::vector<std::function<void()>> tasks;
    for (int i = 0; i < 3; ++i) {
        tasks.emplace_back([&, i] {
            ConfigInput in = base;
            in.t_env_k = temps[i];
            const SystemConfig cfg = derive(in);
            oracle::TrajectoryConfig traj;
            traj.dt = 2e-6;
            traj.duration = 30.0;
            traj.decimate = 10;
            traj.seed = 101 + static_cast<std::uint64_t>(i);
            const oracle::SimResult sim = oracle::simulate(cfg, traj);

            Row& r = rows[i];
            r.t = temps[i];
            r.unstable = sim.unstable;
            r.target = cfg.constants.k_b * temps[i] /
                       (cfg.mech.mass * cfg.mech.omega_m * cfg.mech.omega_m);

            const int batches = 30;
            const std::size_t nb = sim.x.size() / batches;
            std::vector<double> means(batches, 0.0);
            for (int b = 0; b < batches; ++b) {
                double s = 0.0;
                for (std::size_t k = 0; k < nb; ++k) {
                    const double x = sim.x[b * nb + k];
                    s += x * x;
                }
                means[b] = s / static_cast<double>(nb);
            }
            double m1 = 0.0;
            for (const double m : means) m1 += m;
            m1 /= batches;
            double sd = 0.0;
            for (const double m : means) sd += (m - m1) * (m - m1);
            sd = std::sqrt(sd / (batches - 1));
            r.est = m1;
            r.sigma = sd / std::sqrt(static_cast<double>(batches));
        });
    }
    run_parallel(tasks, threads);

    double worst_z = 0.0;
    for (const Row& r : rows) {
        if (r.unstable) {
            res.pass = false;
            res.detail += detail::strfmt("T=%g flagged unstable; ", r.t);
            continue;
        }
        const double z = std::abs(r.est - r.target) / r.sigma;
        worst_z = std::max(worst_z, z);
        if (z > 3.0) res.pass = false;
        res.detail +=
            detail::strfmt("T=%gK: <x^2>/target=%.4f (%.2f sigma); ", r.t,
                           r.est / r.target, z);
    }
    res.detail += detail::strfmt("worst %.2f of 3 allowed sigma", worst_z);
    return res;
}

// (b) Open loop with thermal and radiation-pressure drive together: the
// displacement PSD must track |chi_eff|^2 (S_F + S_th) across two decades.
CheckResult check_open_psd(int threads) {
    (void)threads;
    CheckResult res{"open_loop_psd", false, ""};
    ConfigInput in = desk_input();
    in.t_env_k = 1e-5;
    in.kernel.kind = "off";
    const SystemConfig cfg = derive(in);

    oracle::TrajectoryConfig traj;
    traj.dt = 5e-8;
    traj.duration = 13.45;
    traj.decimate = 100;
    traj.burn_in = 0.25;
    traj.seed = 202;
    const oracle::SimResult sim = oracle::simulate(cfg, traj);
    if (sim.unstable) {
        res.detail = "run flagged unstable";
        return res;
    }

    const oracle::SpectrumEstimate est =
        oracle::psd_welch(sim.x, sim.sample_dt, std::size_t{1} << 18);
    const auto analytic = [&](double f_hz) {
        return displacement_spectrum(cfg, two_pi * f_hz, BudgetMode::open)
            .sx_total;
    };
    const oracle::BandedComparison bc =
        oracle::log_rebin(est, analytic, 100.0, 1e4, 8);
    const oracle::CompareResult cr =
        oracle::compare(bc.analytic, bc.empirical, 100.0, 1e4, 0.15, 0.10);
    res.pass = cr.pass;
    res.detail = detail::strfmt(
        "max |ana-emp|/emp = %.3f at %.0f Hz over %zu bands (tol 0.15); "
        "parseval ratio %.3f",
        cr.max_rel_dev, cr.worst_freq, cr.bins_used,
        est.psd_integral / est.ts_variance);
    return res;
}

// (c) Radiation-pressure suppression: banded closed/open PSD ratio at T = 0
// against the infinite-gain residual prediction.
CheckResult check_suppression(int threads) {
    CheckResult res{"rp_suppression", false, ""};
    ConfigInput in = desk_input();
    in.t_env_k = 0.0;
    in.kernel.kind = "off";
    const SystemConfig cfg_open = derive(in);
    in.kernel.kind = "flat";
    in.kernel.gain = 100.0;
    const SystemConfig cfg_closed = derive(in);

    oracle::SimResult sim_open, sim_closed;
    std::vector<std::function<void()>> tasks;
    tasks.emplace_back([&] {
        oracle::TrajectoryConfig t;
        t.dt = 5e-8;
        t.duration = 4.2;
        t.decimate = 100;
        t.burn_in = 0.1;
        t.seed = 303;
        sim_open = oracle::simulate(cfg_open, t);
    });
    tasks.emplace_back([&] {
        oracle::TrajectoryConfig t;
        t.dt = 1e-8;
        t.duration = 4.2;
        t.decimate = 500;
        t.burn_in = 0.1;
        t.seed = 304;
        sim_closed = oracle::simulate(cfg_closed, t);
    });
    run_parallel(tasks, threads);
    if (sim_open.unstable || sim_closed.unstable) {
        res.detail = "a run flagged unstable";
        return res;
    }

    const std::size_t seg = std::size_t{1} << 15;
    const auto est_o = oracle::psd_welch(sim_open.x, sim_open.sample_dt, seg);
    const auto est_c =
        oracle::psd_welch(sim_closed.x, sim_closed.sample_dt, seg);

    const auto pred_open = [&](double f_hz) {
        return displacement_spectrum(cfg_open, two_pi * f_hz, BudgetMode::open)
            .sx_total;
    };
    const auto pred_closed = [&](double f_hz) {
        return displacement_spectrum(cfg_open, two_pi * f_hz,
                                     BudgetMode::ideal_closed)
            .sx_total;
    };
    const double f_lo = 1500.0, f_hi = 4200.0;
    const auto bc_o = oracle::log_rebin(est_o, pred_open, f_lo, f_hi, 8);
    const auto bc_c = oracle::log_rebin(est_c, pred_closed, f_lo, f_hi, 8);
    if (bc_o.empirical.psd.size() != bc_c.empirical.psd.size()) {
        res.detail = "band grids diverged between runs";
        return res;
    }

    double worst = 0.0, worst_f = 0.0, worst_ratio = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < bc_o.empirical.psd.size(); ++i) {
        if (bc_o.empirical.rel_std[i] > 0.08 ||
            bc_c.empirical.rel_std[i] > 0.08)
            continue;
        const double emp = bc_c.empirical.psd[i] / bc_o.empirical.psd[i];
        const double pred = bc_c.analytic[i] / bc_o.analytic[i];
        const double dev = std::abs(pred - emp) / emp;
        ++used;
        if (dev > worst) {
            worst = dev;
            worst_f = bc_o.empirical.freq[i];
            worst_ratio = emp;
        }
    }
    res.pass = used > 0 && worst <= 0.20;
    res.detail = detail::strfmt(
        "suppression ratio ~%.3f; max |pred-emp|/emp = %.3f at %.0f Hz "
        "over %zu bands (tol 0.20)",
        worst_ratio, worst, worst_f, used);
    return res;
}

// (d) Homogeneous probes: the quadratic-form verdict must match what the
// integrator actually does, for random single-blue systems with and without
// a stabilizing loop.
CheckResult check_verdicts(int threads) {
    CheckResult res{"stability_verdicts", true, ""};
    const ConfigInput base = desk_input();

    struct Run {
        ConfigInput in;
        bool expect_stable = false;
        bool sim_stable = false;
        bool verdict_stable = false;
        double ratio = 0.0;
    };
    std::vector<Run> runs;
    oracle::Xoshiro256 rng(777);
    for (int i = 0; i < 5; ++i) {
        ConfigInput in = base;
        in.t_env_k = 0.0;
        in.f_m_hz = 60.0 + 80.0 * rng.uniform();
        in.q = 5.0 + 15.0 * rng.uniform();
        const double r = 4.0 + 8.0 * rng.uniform();
        std::erase_if(in.fields, [](const OpticalFieldInput& f) {
            return f.label != "blue";
        });
        // Scale the blue power so |Gamma_os| = r * gamma_m.
        in.kernel.kind = "off";
        {
            const SystemConfig cfg0 = derive(in);
            const double g_os =
                spring_approx(cfg0.fields[0]).gamma_os(cfg0.mech.mass);
            const double want = r * cfg0.mech.gamma_m;
            in.fields[0].p_circ *= want / std::abs(g_os);
        }
        Run open;
        open.in = in;
        open.expect_stable = false;
        runs.push_back(open);

        Run closed;
        closed.in = in;
        closed.in.kernel.kind = "flat";
        closed.in.kernel.gain = 3.0 * r;
        closed.expect_stable = true;
        runs.push_back(closed);
    }

    std::vector<std::function<void()>> tasks;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        tasks.emplace_back([&, i] {
            Run& run = runs[i];
            const SystemConfig cfg = derive(run.in);
            const QuadraticForm form =
                cfg.kernel.kind == KernelKind::off
                    ? open_loop_form(cfg.mech, cfg.fields)
                    : closed_loop_form(cfg.mech, cfg.fields, cfg.kernel);
            run.verdict_stable = stability(form).stable;

            oracle::TrajectoryConfig t;
            t.dt = 2e-8;
            t.duration = 2.0;
            t.decimate = 100;
            t.seed = 500 + i;
            t.noise = false;
            t.x0 = 1e-12;
            const oracle::SimResult sim = oracle::simulate(cfg, t);
            const std::size_t n = sim.x.size();
            const std::size_t tenth = std::max<std::size_t>(1, n / 10);
            const double head = max_abs({sim.x.data(), tenth});
            const double tail =
                max_abs({sim.x.data() + (n - tenth), tenth});
            run.ratio = head > 0.0 ? tail / head : 0.0;
            run.sim_stable = !sim.unstable && run.ratio < 0.5;
            if (sim.unstable || run.ratio > 10.0) run.sim_stable = false;
        });
    }
    run_parallel(tasks, threads);

    int mismatches = 0;
    for (const Run& run : runs) {
        const bool ok = run.verdict_stable == run.expect_stable &&
                        run.sim_stable == run.expect_stable;
        if (!ok) {
            ++mismatches;
            res.pass = false;
            res.detail += detail::strfmt(
                "mismatch (expect %s): verdict %s, sim %s (env ratio %.2e); ",
                run.expect_stable ? "stable" : "unstable",
                run.verdict_stable ? "stable" : "unstable",
                run.sim_stable ? "stable" : "unstable", run.ratio);
        }
    }
    res.detail += detail::strfmt(
        "%zu/%zu verdicts agree with the integrator",
        runs.size() - static_cast<std::size_t>(mismatches), runs.size());
    return res;
}

// (e) Step halving: banded PSD must move < 5% when dt halves.
CheckResult check_halving(int threads) {
    CheckResult res{"step_halving", false, ""};
    ConfigInput in = desk_input();
    in.t_env_k = 0.0;
    in.kernel.kind = "off";
    const SystemConfig cfg = derive(in);

    oracle::SimResult sims[2];
    const double dts[2] = {5e-8, 2.5e-8};
    const int decs[2] = {100, 200};
    std::vector<std::function<void()>> tasks;
    for (int i = 0; i < 2; ++i) {
        tasks.emplace_back([&, i] {
            oracle::TrajectoryConfig t;
            t.dt = dts[i];
            t.duration = 4.2;
            t.decimate = decs[i];
            t.burn_in = 0.1;
            t.seed = 909 + static_cast<std::uint64_t>(i);
            sims[i] = oracle::simulate(cfg, t);
        });
    }
    run_parallel(tasks, threads);
    if (sims[0].unstable || sims[1].unstable) {
        res.detail = "a run flagged unstable";
        return res;
    }

    const std::size_t seg = std::size_t{1} << 13;
    const auto flat = [](double) { return 1.0; };
    const auto bc0 = oracle::log_rebin(
        oracle::psd_welch(sims[0].x, sims[0].sample_dt, seg), flat, 1500.0,
        4200.0, 8);
    const auto bc1 = oracle::log_rebin(
        oracle::psd_welch(sims[1].x, sims[1].sample_dt, seg), flat, 1500.0,
        4200.0, 8);
    if (bc0.empirical.psd.size() != bc1.empirical.psd.size()) {
        res.detail = "band grids diverged between runs";
        return res;
    }
    double worst = 0.0, worst_f = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < bc0.empirical.psd.size(); ++i) {
        const double dev =
            std::abs(bc1.empirical.psd[i] / bc0.empirical.psd[i] - 1.0);
        ++used;
        if (dev > worst) {
            worst = dev;
            worst_f = bc0.empirical.freq[i];
        }
    }
    res.pass = used > 0 && worst <= 0.05;
    res.detail = detail::strfmt(
        "max band change %.3f at %.0f Hz over %zu bands (tol 0.05)", worst,
        worst_f, used);
    return res;
}

}  // namespace

ConfigInput desk_input() {
    const PhysicalConstants pc;
    const double gamma = two_pi * 20e3;
    const double length = 0.05;
    const double wavelength = 1.064e-6;
    const double mass = 1e-9;
    const double w_os = two_pi * 1e3;  // red spring magnitude

    const double omega0 = two_pi * pc.c / wavelength;
    const double g0 = omega0 / length;
    // |omega_os^2| = hbar g0^2 n / (m gamma) at Delta = gamma.
    const double n_red = w_os * w_os * mass * gamma / (pc.hbar * g0 * g0);
    const double p_red = n_red * pc.hbar * omega0 * pc.c / (2.0 * length);
    // Damping cancellation against Delta_B = -sqrt(3) gamma needs
    // n_B Delta_B / (gamma^2+Delta_B^2)^2 = -n_R Delta_R / (gamma^2+Delta_R^2)^2.
    const double p_blue = p_red * 4.0 / std::sqrt(3.0);

    ConfigInput in;
    in.mass_kg = mass;
    in.f_m_hz = 100.0;
    in.q = 10.0;
    in.t_env_k = 300.0;
    in.eta = 0.9;
    in.kernel.kind = "off";

    OpticalFieldInput red;
    red.label = "red";
    red.length = length;
    red.wavelength = wavelength;
    red.gamma = gamma;
    red.detuning = gamma;
    red.epsilon = 0.2 * gamma * length / pc.c;  // gamma_eps = 0.05 gamma
    red.p_circ = p_red;
    in.fields.push_back(red);

    OpticalFieldInput blue = red;
    blue.label = "blue";
    blue.detuning = -std::sqrt(3.0) * gamma;
    blue.p_circ = p_blue;
    in.fields.push_back(blue);
    return in;
}

ConfigInput reference_input(double wavelength_m) {
    ConfigInput in;
    in.mass_kg = 2.5e-10;
    in.f_m_hz = 100.0;
    in.q = 1e6;
    in.t_env_k = 300.0;
    in.eta = 0.99;
    in.kernel.kind = "ideal";

    OpticalFieldInput blue;
    blue.label = "blue";
    blue.length = 1e-3;
    blue.wavelength = wavelength_m;
    blue.gamma = two_pi * 20e6;
    blue.detuning = -two_pi * 20e6;
    blue.epsilon = 30e-6;
    blue.p_circ = 0.390;
    in.fields.push_back(blue);

    OpticalFieldInput red = blue;
    red.label = "red";
    red.gamma = two_pi * 4e6;
    red.detuning = two_pi * 4e6;
    red.p_circ = 0.016;
    in.fields.push_back(red);
    return in;
}

std::vector<CheckResult> verify_suite(
    int threads, const std::function<void(const CheckResult&)>& on_result) {
    std::vector<CheckResult> results;
    const auto run = [&](CheckResult (*check)(int), const char* name) {
        CheckResult r;
        try {
            r = check(threads);
        } catch (const std::exception& e) {
            r = CheckResult{name, false, std::string("exception: ") + e.what()};
        }
        if (on_result) on_result(r);
        results.push_back(std::move(r));
    };
    run(&check_equipartition, "equipartition");
    run(&check_open_psd, "open_loop_psd");
    run(&check_suppression, "rp_suppression");
    run(&check_verdicts, "stability_verdicts");
    run(&check_halving, "step_halving");
    return results;
}

}  // namespace ospring
