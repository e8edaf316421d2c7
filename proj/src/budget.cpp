#include "ospring/budget.hpp"

#include <cmath>

#include "ospring/errors.hpp"

namespace ospring {

double thermal_force_spectrum(const MechanicalOscillator& mech,
                              const PhysicalConstants& pc) {
    return 4.0 * mech.mass * mech.gamma_m * pc.k_b * mech.t_env;
}

BudgetRow displacement_spectrum(const SystemConfig& cfg, double omega,
                                BudgetMode mode) {
    BudgetRow row;
    row.omega = omega;

    if (mode == BudgetMode::open) {
        row.chi_inv =
            effective_susceptibility(cfg.mech, cfg.fields, omega, Mode::exact)
                .chi_inv;
    } else {
        FeedbackKernel ideal;
        ideal.kind = KernelKind::ideal;
        row.chi_inv =
            closed_loop_form(cfg.mech, cfg.fields, ideal).chi_inv(omega);
    }

    const double chi_sq = std::norm(row.chi_inv);
    if (!(chi_sq > 0.0))
        throw PhysicsError("displacement spectrum diverges: chi_inv = 0");

    row.sx_thermal =
        thermal_force_spectrum(cfg.mech, cfg.constants) / chi_sq;
    row.sx_total = row.sx_thermal;
    for (const auto& f : cfg.fields) {
        const double sf = mode == BudgetMode::open
                              ? force_spectrum_exact_lossy(f, omega)
                              : residual_spectrum(f, cfg.det, omega);
        row.sx_rp.push_back(sf / chi_sq);
        row.sx_total += sf / chi_sq;
    }
    return row;
}

TemperatureReport temperature_report(const SystemConfig& cfg) {
    TemperatureReport rep;
    const MechanicalOscillator& mech = cfg.mech;
    rep.t_env = mech.t_env;
    rep.loop_closed = cfg.kernel.kind != KernelKind::off;

    QuadraticForm form;
    if (!rep.loop_closed) {
        form = open_loop_form(mech, cfg.fields);
    } else if (cfg.kernel.kind == KernelKind::rational) {
        form = open_loop_form(mech, cfg.fields);
        rep.loop_closed = false;
        rep.notes.push_back(
            "rational kernel is not frequency-flat; stability summary "
            "reflects the open loop");
    } else {
        form = closed_loop_form(mech, cfg.fields, cfg.kernel);
    }

    const SpringCoefficient k_tot = combine_springs_approx(cfg.fields);
    const double os_sq = k_tot.omega_os_sq(mech.mass);
    rep.omega_os = os_sq > 0.0 ? std::sqrt(os_sq) : 0.0;
    if (os_sq < 0.0)
        rep.notes.push_back("net optical rigidity is negative");

    const double new_sq = mech.omega_m * mech.omega_m + os_sq;
    rep.omega_new = new_sq > 0.0 ? std::sqrt(new_sq) : 0.0;
    if (new_sq <= 0.0)
        rep.notes.push_back("optical anti-spring exceeds the bare restoring "
                            "force; no real resonance");

    rep.q_eff = rep.omega_new / mech.gamma_m;

    const StabilityResult st = stability(form);
    rep.stable = st.stable;
    if (!st.stable) rep.notes.push_back("configuration is dynamically unstable");

    if (rep.omega_new > 0.0 && rep.q_eff > 0.0) {
        rep.threshold_t =
            ground_state_threshold(rep.omega_new, rep.q_eff, cfg.constants);
        rep.n_bar_over_q = decoherence_ratio(mech.t_env, rep.omega_new,
                                             rep.q_eff, cfg.constants);
    }

    if (!cfg.fields.empty())
        rep.notes.push_back(
            "spring frequencies depend on the configured wavelength_m: "
            "optical rigidity scales with the carrier frequency at fixed "
            "circulating power");

    const double omega_eval = rep.omega_new > 0.0 ? rep.omega_new : mech.omega_m;
    for (const auto& f : cfg.fields) {
        const SpringCoefficient k = spring_approx(f);
        FieldSummary fs;
        fs.label = f.in.label;
        fs.gamma_os = k.gamma_os(mech.mass);
        fs.omega_os_sq = k.omega_os_sq(mech.mass);
        fs.required_gain = required_gain(fs.gamma_os, mech.gamma_m);
        fs.t_res =
            residual_temperature(f, mech, cfg.det, omega_eval, cfg.constants);
        rep.fields.push_back(fs);
    }
    return rep;
}

}  // namespace ospring
