#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "ospring/budget.hpp"
#include "ospring/errors.hpp"
#include "ospring/report.hpp"
#include "ospring/verify.hpp"

using namespace ospring;

namespace {

constexpr double two_pi = 2.0 * 3.14159265358979323846;

SystemConfig desk() { return derive(desk_input()); }

bool has_note(const TemperatureReport& rep, const char* needle) {
    return std::any_of(rep.notes.begin(), rep.notes.end(),
                       [&](const std::string& n) {
                           return n.find(needle) != std::string::npos;
                       });
}

}  // namespace

TEST_CASE("thermal force density is the viscous fluctuation-dissipation value") {
    // published-scale oscillator: 250 ng, 100 Hz, Q = 1e6, room temperature
    const SystemConfig cfg = derive(reference_input());
    const double s_th = thermal_force_spectrum(cfg.mech, cfg.constants);
    CHECK(s_th == doctest::Approx(2.60246205335e-33).epsilon(1e-9));
    CHECK(s_th == doctest::Approx(4.0 * cfg.mech.mass * cfg.mech.gamma_m *
                                  cfg.constants.k_b * cfg.mech.t_env)
                      .epsilon(1e-15));
    // linear in temperature
    MechanicalOscillator cold = cfg.mech;
    cold.t_env *= 0.5;
    CHECK(thermal_force_spectrum(cold, cfg.constants) ==
          doctest::Approx(0.5 * s_th).epsilon(1e-15));
}

TEST_CASE("open-loop budget rows add up") {
    const SystemConfig cfg = desk();
    for (const double f_hz : {30.0, 1e3, 1.5e4}) {
        const double w = two_pi * f_hz;
        const BudgetRow row = displacement_spectrum(cfg, w, BudgetMode::open);
        REQUIRE(row.sx_rp.size() == cfg.fields.size());

        double total = row.sx_thermal;
        for (const double s : row.sx_rp) total += s;
        CHECK(row.sx_total == doctest::Approx(total).epsilon(1e-15));

        const cplx chi = effective_susceptibility(cfg.mech, cfg.fields, w,
                                                  Mode::exact)
                             .chi_inv;
        CHECK(row.chi_inv == chi);
        const double chi_sq = std::norm(chi);
        CHECK(row.sx_thermal ==
              doctest::Approx(thermal_force_spectrum(cfg.mech, cfg.constants) /
                              chi_sq)
                  .epsilon(1e-15));
        for (std::size_t i = 0; i < cfg.fields.size(); ++i) {
            CHECK(row.sx_rp[i] ==
                  doctest::Approx(
                      force_spectrum_exact_lossy(cfg.fields[i], w) / chi_sq)
                      .epsilon(1e-15));
        }
    }
}

TEST_CASE("ideal-closed budget uses residual drives and the dressed response") {
    const SystemConfig cfg = desk();
    FeedbackKernel ideal;
    ideal.kind = KernelKind::ideal;
    const QuadraticForm form = closed_loop_form(cfg.mech, cfg.fields, ideal);

    const double w = two_pi * 2e3;
    const BudgetRow row =
        displacement_spectrum(cfg, w, BudgetMode::ideal_closed);
    CHECK(row.chi_inv == form.chi_inv(w));
    const double chi_sq = std::norm(row.chi_inv);
    for (std::size_t i = 0; i < cfg.fields.size(); ++i) {
        CHECK(row.sx_rp[i] ==
              doctest::Approx(residual_spectrum(cfg.fields[i], cfg.det, w) /
                              chi_sq)
                  .epsilon(1e-15));
        // the loop beats the open-loop backaction in the suppression band
        const BudgetRow open = displacement_spectrum(cfg, w, BudgetMode::open);
        CHECK(row.sx_rp[i] < open.sx_rp[i]);
    }
}

TEST_CASE("report with no fields reduces to the bare oscillator") {
    ConfigInput in = desk_input();
    in.fields.clear();
    in.kernel.kind = "off";
    const SystemConfig cfg = derive(in);
    const TemperatureReport rep = temperature_report(cfg);

    CHECK(rep.omega_os == 0.0);
    CHECK(rep.omega_new == doctest::Approx(cfg.mech.omega_m).epsilon(1e-15));
    CHECK(rep.q_eff == doctest::Approx(cfg.mech.q_factor).epsilon(1e-14));
    CHECK(rep.stable);
    CHECK_FALSE(rep.loop_closed);
    CHECK(rep.fields.empty());
    CHECK(decoherence_ratio(rep.threshold_t, rep.omega_new, rep.q_eff,
                            cfg.constants) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("desk report reflects the tuned double spring") {
    ConfigInput in = desk_input();
    in.kernel.kind = "flat";  // close the amplitude loops, bench-style
    in.kernel.gain = 100.0;
    const SystemConfig cfg = derive(in);
    const TemperatureReport rep = temperature_report(cfg);

    // the bench numbers are tuned to a 1 kHz net spring
    CHECK(rep.omega_os == doctest::Approx(two_pi * 1000.0).epsilon(1e-9));
    const double want_new =
        std::sqrt(cfg.mech.omega_m * cfg.mech.omega_m +
                  rep.omega_os * rep.omega_os);
    CHECK(rep.omega_new == doctest::Approx(want_new).epsilon(1e-12));
    CHECK(rep.q_eff ==
          doctest::Approx(rep.omega_new / cfg.mech.gamma_m).epsilon(1e-15));
    CHECK(rep.stable);
    CHECK(rep.loop_closed);
    CHECK(rep.t_env == 300.0);

    REQUIRE(rep.fields.size() == 2);
    for (const auto& fs : rep.fields) {
        // each spring needs gain 5 to hold on its own: |Gamma_os| = 5 gamma_m
        CHECK(fs.required_gain == doctest::Approx(5.0).epsilon(1e-9));
        CHECK(fs.t_res > 0.0);
    }
    // dampings cancel pairwise
    CHECK(rep.fields[0].gamma_os + rep.fields[1].gamma_os ==
          doctest::Approx(0.0).scale(std::abs(rep.fields[0].gamma_os)));
}

TEST_CASE("reports are byte-stable") {
    const SystemConfig cfg = desk();
    const TemperatureReport rep = temperature_report(cfg);
    CHECK(temperature_summary(cfg, rep) == temperature_summary(cfg, rep));

    const std::vector<double> omegas = log_grid_omega(10.0, 1e4, 40);
    CHECK(budget_csv(cfg, BudgetMode::open, omegas) ==
          budget_csv(cfg, BudgetMode::open, omegas));

    // a re-parse of the canonical text reproduces the same bytes
    const SystemConfig cfg2 = derive(parse_config_text(
        to_config_text(desk_input())));
    CHECK(temperature_summary(cfg2, temperature_report(cfg2)) ==
          temperature_summary(cfg, rep));
    CHECK(cfg2.hash == cfg.hash);

    // the summary carries the machine-readable block
    const std::string text = temperature_summary(cfg, rep);
    CHECK(text.find("q_eff") != std::string::npos);
    CHECK(text.find("t_res") != std::string::npos);
}

TEST_CASE("residual temperature falls with detector efficiency") {
    const SystemConfig cfg = derive(reference_input());
    const OpticalField& blue = cfg.field("blue");
    const double w = two_pi * 1e5;
    double last = 1e300;
    for (const double eta : {0.8, 0.9, 0.99, 1.0}) {
        const double t = residual_temperature(blue, cfg.mech, Detector{eta},
                                              w, cfg.constants);
        CHECK(t < last);
        last = t;
    }
}

TEST_CASE("rational kernel reports fall back to the open loop") {
    ConfigInput in = desk_input();
    in.kernel.kind = "rational";
    in.kernel.gain = 100.0;
    in.kernel.poles_hz = {-1e4};
    const SystemConfig cfg = derive(in);

    const TemperatureReport rep = temperature_report(cfg);
    CHECK_FALSE(rep.loop_closed);
    CHECK(has_note(rep, "rational"));
    // desk open loop is stable: the dampings cancel and gamma_m remains
    CHECK(rep.stable);
}

TEST_CASE("pathological stacks are flagged, not hidden") {
    // red alone: strong anti-spring, net negative rigidity
    ConfigInput in = desk_input();
    in.fields.erase(in.fields.begin() + 1);
    REQUIRE(in.fields[0].label == "red");
    in.kernel.kind = "off";
    const SystemConfig red_only = derive(in);
    const TemperatureReport rep = temperature_report(red_only);
    CHECK(has_note(rep, "negative"));
    CHECK(rep.omega_new == 0.0);
    CHECK(rep.q_eff == 0.0);
    CHECK_FALSE(rep.stable);
    CHECK(has_note(rep, "unstable"));

    // blue alone: positive rigidity but optical anti-damping wins
    ConfigInput inb = desk_input();
    inb.fields.erase(inb.fields.begin());
    REQUIRE(inb.fields[0].label == "blue");
    inb.kernel.kind = "off";
    const TemperatureReport repb = temperature_report(derive(inb));
    CHECK(repb.omega_new > 0.0);
    CHECK_FALSE(repb.stable);
    CHECK(has_note(repb, "unstable"));
}
