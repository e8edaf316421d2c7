#include <algorithm>
#include <cctype>
#include <cmath>
#include <complex>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ospring/budget.hpp"
#include "ospring/detail/strfmt.hpp"
#include "ospring/config.hpp"
#include "ospring/errors.hpp"
#include "ospring/oracle/sim.hpp"
#include "ospring/oracle/welch.hpp"
#include "ospring/report.hpp"
#include "ospring/verify.hpp"

namespace {

using ospring::detail::strfmt;

constexpr double two_pi = 2.0 * M_PI;

struct Options {
    std::string config_path;
    std::string out_path;
    int threads = 0;
    std::uint64_t seed = 1;

    double f_min = 0.0;  // 0 = auto
    double f_max = 0.0;
    int points = 400;

    // solve-detuning
    double kappa = 0.0;
    double gamma_hz = 0.0;
    double delta_r_hz = 0.0;
    bool free_delta_b = false;
    bool exact = false;

    bool allow_unstable = false;

    std::string gain;  // closed-loop: number or "ideal"
    std::string mode = "open";
    bool summary = false;

    // simulate
    double dt = 0.0;
    double duration = 0.0;
    double burn_in = 0.0;
    int decimate = 1;
    std::size_t segments = 4096;

    // sweep
    std::string param;
    std::string metric;
    double from = 0.0;
    double to = std::numeric_limits<double>::quiet_NaN();
    int sweep_points = 25;
};

ospring::SystemConfig load_config(const Options& opt) {
    if (opt.config_path.empty())
        throw ospring::ConfigError("this command needs --config <file>");
    return ospring::derive(ospring::parse_config_file(opt.config_path));
}

// CSV goes to --out when given, otherwise to stdout (and the human chatter
// moves to stderr so stdout stays parseable).
void emit(const std::string& text, const Options& opt) {
    if (opt.out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(opt.out_path, std::ios::binary);
    if (!f) throw ospring::ConfigError("cannot open " + opt.out_path);
    f << text;
    std::cout << "wrote " << opt.out_path << "\n";
}

std::ostream& human(const Options& opt) {
    return opt.out_path.empty() ? std::cerr : std::cout;
}

std::vector<double> frequency_grid(const ospring::SystemConfig& cfg,
                                   const Options& opt) {
    double lo = opt.f_min;
    double hi = opt.f_max;
    if (lo <= 0.0) lo = cfg.mech.omega_m / (10.0 * two_pi);
    if (hi <= 0.0) {
        double gamma_min = 0.0;
        for (const auto& f : cfg.fields)
            gamma_min = gamma_min == 0.0 ? f.gamma_tot
                                         : std::min(gamma_min, f.gamma_tot);
        hi = gamma_min > 0.0 ? 10.0 * gamma_min / two_pi
                             : 1e3 * cfg.mech.omega_m / two_pi;
    }
    return ospring::log_grid_omega(lo, hi, opt.points);
}

int cmd_config_validate(const Options& opt) {
    const ospring::SystemConfig cfg = load_config(opt);
    std::cout << strfmt("ok: %zu field(s), config hash %016llx\n",
                        cfg.fields.size(),
                        static_cast<unsigned long long>(cfg.hash));
    std::cout << strfmt(
        "oscillator: f_m = %.6g Hz, gamma_m = %.6g rad/s, Q = %.6g, "
        "T = %.6g K\n",
        cfg.mech.omega_m / two_pi, cfg.mech.gamma_m, cfg.mech.q_factor,
        cfg.mech.t_env);
    for (const auto& f : cfg.fields) {
        const ospring::SpringCoefficient k = ospring::spring_approx(f);
        std::cout << strfmt(
            "field %s: n_circ = %.6g, p_in = %.6g W, finesse = %.6g, "
            "gamma_eps/gamma = %.6g, omega_os^2 = %.6g rad^2/s^2, "
            "gamma_os = %.6g rad/s\n",
            f.in.label.c_str(), f.n_circ, f.p_in,
            ospring::finesse(f, cfg.constants), f.gamma_eps / f.gamma(),
            k.omega_os_sq(cfg.mech.mass), k.gamma_os(cfg.mech.mass));
    }
    static const char* const kind_names[] = {"off", "flat", "rational",
                                             "ideal"};
    std::cout << strfmt("feedback: kind %s, gain %.6g\n",
                        kind_names[static_cast<int>(cfg.kernel.kind)],
                        cfg.kernel.gain);
    for (const auto& w : cfg.warnings) std::cout << "warning: " << w << "\n";
    return 0;
}

int cmd_cavity_dump(const Options& opt) {
    const ospring::SystemConfig cfg = load_config(opt);
    emit(ospring::cavity_dump_csv(cfg, frequency_grid(cfg, opt)), opt);
    return 0;
}

int cmd_solve_detuning(const Options& opt) {
    if (opt.kappa > 0.0) {
        if (!(opt.gamma_hz > 0.0) || !(opt.delta_r_hz > 0.0))
            throw ospring::ConfigError(
                "closed-form mode needs --kappa, --gamma-hz and --delta-r-hz");
        const double delta_b = ospring::solve_detuning(
            opt.kappa, two_pi * opt.gamma_hz, two_pi * opt.delta_r_hz);
        std::cout << "delta_b_hz      " << ospring::fmt(delta_b / two_pi)
                  << "\n";
        std::cout << "residual_im_n_m " << ospring::fmt(0.0) << "\n";
        std::cout << "# equal-bandwidth closed form; the damping residual is "
                     "zero by construction\n";
        return 0;
    }
    if (!opt.free_delta_b)
        throw ospring::ConfigError(
            "pass --kappa/--gamma-hz/--delta-r-hz for the closed form, or "
            "--config with --free-delta-b for the general solver");
    const ospring::SystemConfig cfg = load_config(opt);
    const ospring::OpticalField* blue = nullptr;
    const ospring::OpticalField* red = nullptr;
    for (const auto& f : cfg.fields) {
        if (f.detuning() < 0.0 && !blue) blue = &f;
        if (f.detuning() > 0.0 && !red) red = &f;
    }
    if (!blue || !red)
        throw ospring::ConfigError(
            "the general solver needs one blue (detuning < 0) and one red "
            "(detuning > 0) field in the config");
    const ospring::DetuningSolution sol = ospring::solve_detuning_general(
        *blue, *red, cfg.mech,
        opt.exact ? ospring::Mode::exact : ospring::Mode::approx);
    std::cout << "delta_b_hz      " << ospring::fmt(sol.delta_b / two_pi)
              << "\n";
    std::cout << "residual_im_n_m " << ospring::fmt(sol.residual_im) << "\n";
    std::cout << "omega_ref_hz    " << ospring::fmt(sol.omega_ref / two_pi)
              << "\n";
    std::cout << strfmt("iterations      %d\n", sol.iterations);
    return 0;
}

int cmd_stability(const Options& opt) {
    const ospring::SystemConfig cfg = load_config(opt);
    ospring::QuadraticForm form;
    if (cfg.kernel.kind == ospring::KernelKind::off) {
        form = ospring::open_loop_form(cfg.mech, cfg.fields);
    } else if (cfg.kernel.kind == ospring::KernelKind::rational) {
        std::cout << "# note: rational kernel is not frequency-flat; this is "
                     "the open-loop verdict\n";
        form = ospring::open_loop_form(cfg.mech, cfg.fields);
    } else {
        form = ospring::closed_loop_form(cfg.mech, cfg.fields, cfg.kernel);
    }
    const ospring::StabilityResult st = ospring::stability(form);
    std::cout << (st.stable ? "STABLE\n" : "UNSTABLE\n");
    std::cout << "gamma_total_rad_s    " << ospring::fmt(form.gamma) << "\n";
    std::cout << "omega_sq_rad2_s2     " << ospring::fmt(form.omega_sq)
              << "\n";
    std::cout << "pole_plus_rad_s      " << ospring::fmt(st.pole_plus.real())
              << ' ' << ospring::fmt(st.pole_plus.imag()) << "\n";
    std::cout << "pole_minus_rad_s     " << ospring::fmt(st.pole_minus.real())
              << ' ' << ospring::fmt(st.pole_minus.imag()) << "\n";
    if (!st.stable && !opt.allow_unstable) return 1;
    return 0;
}

int cmd_closed_loop(const Options& opt) {
    const ospring::SystemConfig cfg = load_config(opt);
    ospring::FeedbackKernel kernel = cfg.kernel;
    if (!opt.gain.empty()) {
        if (opt.gain == "ideal") {
            kernel.kind = ospring::KernelKind::ideal;
        } else {
            kernel.kind = ospring::KernelKind::flat;
            try {
                kernel.gain = std::stod(opt.gain);
            } catch (const std::exception&) {
                throw ospring::ConfigError(
                    "--gain takes a number or the word 'ideal'");
            }
            kernel.zeros.clear();
            kernel.poles.clear();
        }
    }
    emit(ospring::closed_loop_csv(cfg, kernel, frequency_grid(cfg, opt)), opt);
    return 0;
}

int cmd_budget(const Options& opt) {
    const ospring::SystemConfig cfg = load_config(opt);
    ospring::BudgetMode mode;
    if (opt.mode == "open")
        mode = ospring::BudgetMode::open;
    else if (opt.mode == "closed")
        mode = ospring::BudgetMode::ideal_closed;
    else
        throw ospring::ConfigError("--mode must be open or closed");

    if (opt.summary) {
        const ospring::TemperatureReport rep = ospring::temperature_report(cfg);
        std::cout << ospring::temperature_summary(cfg, rep);
        if (!opt.out_path.empty())
            emit(ospring::budget_csv(cfg, mode, frequency_grid(cfg, opt)), opt);
        return 0;
    }
    emit(ospring::budget_csv(cfg, mode, frequency_grid(cfg, opt)), opt);
    return 0;
}

int cmd_simulate(const Options& opt) {
    const ospring::SystemConfig cfg = load_config(opt);
    if (opt.segments == 0 || (opt.segments & (opt.segments - 1)) != 0)
        throw ospring::ConfigError("--segments must be a power of two");

    ospring::oracle::TrajectoryConfig traj;
    traj.dt = opt.dt;
    traj.duration = opt.duration;
    traj.seed = opt.seed;
    traj.burn_in = opt.burn_in;
    traj.decimate = opt.decimate;
    const ospring::oracle::SimResult sim = ospring::oracle::simulate(cfg, traj);

    std::ostream& log = human(opt);
    log << strfmt("samples %zu at sample dt %.6g s\n", sim.x.size(),
                  sim.sample_dt);
    if (sim.unstable)
        log << strfmt("UNSTABLE: displacement guard tripped at t = %.6g s\n",
                      sim.t_unstable);

    if (sim.x.size() >= opt.segments) {
        const ospring::oracle::SpectrumEstimate est =
            ospring::oracle::psd_welch(sim.x, sim.sample_dt, opt.segments);
        std::ostringstream csv;
        for (const auto& line :
             ospring::report_header(cfg, "simulate psd"))
            csv << line << "\n";
        csv << strfmt("# n_segments: %d\n", est.n_segments);
        csv << "# ts_variance: " << ospring::fmt(est.ts_variance) << "\n";
        csv << "f_hz,sx,rel_std\n";
        for (std::size_t i = 0; i < est.freq.size(); ++i)
            csv << ospring::fmt(est.freq[i]) << ',' << ospring::fmt(est.psd[i])
                << ',' << ospring::fmt(est.rel_std[i]) << "\n";
        emit(csv.str(), opt);
        log << strfmt("psd: %zu bins, df %.6g Hz, variance %.6g m^2\n",
                      est.freq.size(), est.df, est.ts_variance);
    } else {
        log << "too few samples for the requested PSD segments; no spectrum "
               "written\n";
    }
    if (sim.unstable && !opt.allow_unstable) return 1;
    return 0;
}

int cmd_verify(const Options& opt) {
    bool all = true;
    const auto results = ospring::verify_suite(
        opt.threads, [](const ospring::CheckResult& r) {
            std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << ": "
                      << r.detail << "\n"
                      << std::flush;
        });
    std::size_t passed = 0;
    for (const auto& r : results) {
        if (r.pass) ++passed;
        all = all && r.pass;
    }
    std::cout << strfmt("%zu/%zu checks passed\n", passed, results.size());
    return all ? 0 : 1;
}

double sweep_metric(const ospring::SystemConfig& cfg,
                    const std::string& metric) {
    if (metric == "stability_margin") {
        const bool flat_loop =
            cfg.kernel.kind == ospring::KernelKind::flat ||
            cfg.kernel.kind == ospring::KernelKind::ideal;
        const ospring::QuadraticForm form =
            flat_loop
                ? ospring::closed_loop_form(cfg.mech, cfg.fields, cfg.kernel)
                : ospring::open_loop_form(cfg.mech, cfg.fields);
        return std::min(
            form.gamma / cfg.mech.gamma_m,
            form.omega_sq / (cfg.mech.omega_m * cfg.mech.omega_m));
    }
    const ospring::TemperatureReport rep = ospring::temperature_report(cfg);
    if (metric == "omega_os") return rep.omega_os;
    if (metric == "q_eff") return rep.q_eff;
    if (metric == "t_res") {
        double worst = 0.0;
        for (const auto& f : rep.fields) worst = std::max(worst, f.t_res);
        return worst;
    }
    throw ospring::ConfigError(
        "--metric must be one of omega_os, q_eff, t_res, stability_margin");
}

int cmd_sweep(const Options& opt) {
    if (opt.config_path.empty())
        throw ospring::ConfigError("this command needs --config <file>");
    if (opt.param.empty())
        throw ospring::ConfigError("--param is required (e.g. detector.eta)");
    std::string metric = opt.metric;
    std::transform(metric.begin(), metric.end(), metric.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    const ospring::ConfigInput base =
        ospring::parse_config_file(opt.config_path);

    const double to = std::isnan(opt.to) ? opt.from : opt.to;
    std::vector<double> values;
    if (to == opt.from || opt.sweep_points <= 1) {
        values.push_back(opt.from);
    } else {
        values.reserve(opt.sweep_points);
        for (int i = 0; i < opt.sweep_points; ++i)
            values.push_back(opt.from +
                             (to - opt.from) * i / (opt.sweep_points - 1));
    }

    std::ostringstream csv;
    {
        const ospring::SystemConfig cfg0 = ospring::derive(base);
        for (const auto& line : ospring::report_header(cfg0, "sweep"))
            csv << line << "\n";
    }
    csv << "# param: " << opt.param << "\n";
    csv << opt.param << ',' << metric << "\n";
    for (const double v : values) {
        ospring::ConfigInput in = base;
        ospring::set_leaf(in, opt.param, v);
        const ospring::SystemConfig cfg = ospring::derive(in);
        csv << ospring::fmt(v) << ',' << ospring::fmt(sweep_metric(cfg, metric))
            << "\n";
    }
    emit(csv.str(), opt);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    Options opt;
    int rc = 0;

    CLI::App app{"double optical spring and amplitude-feedback toolkit"};
    app.require_subcommand(1);
    app.add_option("--config", opt.config_path, "TOML parameter file");
    app.add_option("--out", opt.out_path, "write CSV here instead of stdout");
    app.add_option("--threads", opt.threads, "worker threads (0 = auto)");
    app.add_option("--seed", opt.seed, "RNG seed for time-domain runs");

    const auto add_grid = [&](CLI::App* sub) {
        sub->add_option("--f-min", opt.f_min,
                        "grid start in Hz (default f_m/10)");
        sub->add_option("--f-max", opt.f_max,
                        "grid end in Hz (default 10x the narrowest cavity)");
        sub->add_option("--points", opt.points, "grid points (log spaced)");
    };

    auto* validate =
        app.add_subcommand("config-validate", "parse, derive, and summarize");
    validate->fallthrough();
    validate->callback([&] { rc = cmd_config_validate(opt); });

    auto* dump = app.add_subcommand(
        "cavity-dump", "per-field spring, force spectrum, and noise "
                       "coefficients on a frequency grid");
    dump->fallthrough();
    add_grid(dump);
    dump->callback([&] { rc = cmd_cavity_dump(opt); });

    auto* solve = app.add_subcommand(
        "solve-detuning",
        "blue detuning that cancels the red field's optical damping");
    solve->fallthrough();
    solve->add_option("--kappa", opt.kappa,
                      "spring-frequency ratio |omega_osB/omega_osR|");
    solve->add_option("--gamma-hz", opt.gamma_hz,
                      "shared half-linewidth in Hz (closed form)");
    solve->add_option("--delta-r-hz", opt.delta_r_hz,
                      "red detuning in Hz (closed form)");
    solve->add_flag("--free-delta-b", opt.free_delta_b,
                    "solve numerically from --config field powers");
    solve->add_flag("--exact", opt.exact,
                    "iterate the evaluation frequency to the spring frequency");
    solve->callback([&] { rc = cmd_solve_detuning(opt); });

    auto* stab = app.add_subcommand(
        "stability", "quadratic-form verdict for the configured loop state");
    stab->fallthrough();
    stab->add_flag("--allow-unstable", opt.allow_unstable,
                   "exit 0 even when unstable");
    stab->callback([&] { rc = cmd_stability(opt); });

    auto* closed = app.add_subcommand(
        "closed-loop",
        "closed-loop susceptibility and residual force densities");
    closed->fallthrough();
    closed->add_option("--gain", opt.gain, "loop gain (number or 'ideal')");
    add_grid(closed);
    closed->callback([&] { rc = cmd_closed_loop(opt); });

    auto* budget = app.add_subcommand(
        "budget", "displacement noise budget (thermal + radiation pressure)");
    budget->fallthrough();
    budget->add_option("--mode", opt.mode, "open | closed")
        ->check(CLI::IsMember({"open", "closed"}));
    budget->add_flag("--summary", opt.summary,
                     "print the temperature/stability summary");
    add_grid(budget);
    budget->callback([&] { rc = cmd_budget(opt); });

    auto* sim = app.add_subcommand(
        "simulate", "integrate the stochastic model and write a Welch PSD");
    sim->fallthrough();
    sim->add_option("--dt", opt.dt, "integrator step in s")->required();
    sim->add_option("--duration", opt.duration, "recorded span in s")
        ->required();
    sim->add_option("--burn-in", opt.burn_in, "discarded lead-in in s");
    sim->add_option("--decimate", opt.decimate, "record every Nth step");
    sim->add_option("--segments", opt.segments,
                    "Welch segment length (power of two)");
    sim->add_flag("--allow-unstable", opt.allow_unstable,
                  "exit 0 even when the guard trips");
    sim->callback([&] { rc = cmd_simulate(opt); });

    auto* verify = app.add_subcommand(
        "verify", "frequency-domain vs time-domain cross-validation suite");
    verify->fallthrough();
    verify->callback([&] { rc = cmd_verify(opt); });

    auto* sweep = app.add_subcommand(
        "sweep", "scalar metric over a linear sweep of one config leaf");
    sweep->fallthrough();
    sweep->add_option("--param", opt.param,
                      "leaf path, e.g. field.blue.power_w");
    sweep->add_option("--metric", opt.metric,
                      "omega_os | q_eff | t_res | stability_margin")
        ->required();
    sweep->add_option("--from", opt.from, "sweep start")->required();
    sweep->add_option("--to", opt.to, "sweep end (equal to start: one row)");
    sweep->add_option("--sweep-points", opt.sweep_points, "sweep points");
    sweep->callback([&] { rc = cmd_sweep(opt); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const ospring::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ospring::PhysicsError& e) {
        std::cerr << "physics error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return rc;
}
