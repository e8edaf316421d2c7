#include "ospring/spring.hpp"

#include <cmath>

#include "ospring/errors.hpp"

namespace ospring {

cplx combine_springs(std::span<const OpticalField> fields, double omega,
                     Mode mode) {
    cplx k = 0.0;
    for (const auto& f : fields) {
        if (mode == Mode::exact) {
            k += spring_exact(f, omega);
        } else {
            k += spring_approx(f).at(omega);
        }
    }
    return k;
}

SpringCoefficient combine_springs_approx(
    std::span<const OpticalField> fields) {
    SpringCoefficient total;
    for (const auto& f : fields) {
        const SpringCoefficient k = spring_approx(f);
        total.stiffness += k.stiffness;
        total.damping += k.damping;
    }
    return total;
}

QuadraticForm bare_form(const MechanicalOscillator& mech) {
    QuadraticForm q;
    q.mass = mech.mass;
    q.gamma = mech.gamma_m;
    q.omega_sq = mech.omega_m * mech.omega_m;
    return q;
}

QuadraticForm open_loop_form(const MechanicalOscillator& mech,
                             std::span<const OpticalField> fields) {
    // Accumulate per field, matching the closed-loop form term for term so a
    // disengaged loop reproduces the open loop bitwise.
    QuadraticForm q = bare_form(mech);
    for (const auto& f : fields) {
        const SpringCoefficient k = spring_approx(f);
        q.gamma += k.gamma_os(mech.mass);
        q.omega_sq += k.omega_os_sq(mech.mass);
    }
    return q;
}

Susceptibility effective_susceptibility(const MechanicalOscillator& mech,
                                        std::span<const OpticalField> fields,
                                        double omega, Mode mode) {
    Susceptibility s;
    s.chi_inv = bare_form(mech).chi_inv(omega) +
                combine_springs(fields, omega, mode);
    s.provenance = fields.empty() ? Provenance::bare : Provenance::open_loop;
    return s;
}

double solve_detuning(double kappa, double gamma, double delta_r) {
    if (!(gamma > 0.0)) throw PhysicsError("solve_detuning: gamma must be > 0");
    if (!(delta_r > 0.0))
        throw PhysicsError("solve_detuning: the red detuning must be > 0");
    if (!(kappa > 0.0)) throw PhysicsError("solve_detuning: kappa must be > 0");
    const double rhs =
        (kappa * kappa - 1.0) * gamma * gamma + kappa * kappa * delta_r * delta_r;
    if (!(rhs > 0.0))
        throw PhysicsError(
            "solve_detuning: no real blue detuning for this kappa");
    return -std::sqrt(rhs);
}

namespace {

// Detuning changes the steady field but not the circulating photon number,
// which is what the config pins down.
OpticalField with_detuning(OpticalField f, double delta) {
    f.in.detuning = delta;
    const double g = f.gamma();
    const cplx u = std::sqrt(2.0 * g) / cplx(f.gamma_tot, delta);
    f.a_bar = std::sqrt(f.n_circ) * u / std::abs(u);
    f.a_in_bar = std::sqrt(
        f.n_circ * (f.gamma_tot * f.gamma_tot + delta * delta) / (2.0 * g));
    f.p_in = f.hbar * f.omega0 * f.a_in_bar * f.a_in_bar;
    return f;
}

}  // namespace

DetuningSolution solve_detuning_general(const OpticalField& blue_template,
                                        const OpticalField& red,
                                        const MechanicalOscillator& mech,
                                        Mode mode) {
    if (!(red.detuning() > 0.0))
        throw PhysicsError("solve_detuning_general: red field must have "
                           "positive detuning");

    DetuningSolution sol;
    sol.omega_ref = mech.omega_m;

    const auto im_k_tot = [&](double delta_b, double omega_ref) {
        const OpticalField fields[2] = {with_detuning(blue_template, delta_b),
                                        red};
        return combine_springs(fields, omega_ref, mode).imag();
    };

    // |Im K_B| over delta < 0 peaks near gamma_tot/sqrt(3); the physical
    // double-spring root lies on the outer flank.
    const auto solve_at = [&](double omega_ref, int& iters) {
        const double peak = blue_template.gamma_tot / std::sqrt(3.0);
        double a = -peak;
        double fa = im_k_tot(a, omega_ref);
        // K ~ k - i*omega*Gamma*m, so the blue field's anti-damping makes
        // Im K_tot > 0 where it dominates; it must dominate at its own peak
        // or it can never cancel the red field.
        if (!(fa > 0.0))
            throw PhysicsError(
                "solve_detuning_general: blue field too weak to cancel "
                "the red field's damping");
        double b = a;
        double fb = fa;
        for (int i = 0; i < 200 && !(fb < 0.0); ++i) {
            b *= 2.0;
            fb = im_k_tot(b, omega_ref);
        }
        if (!(fb < 0.0))
            throw PhysicsError(
                "solve_detuning_general: damping never changes sign");

        // Bisection to near machine precision.
        for (int i = 0; i < 200; ++i) {
            ++iters;
            const double mid = 0.5 * (a + b);
            if (mid == a || mid == b) break;
            const double fm = im_k_tot(mid, omega_ref);
            if (fm > 0.0) {
                a = mid;
                fa = fm;
            } else {
                b = mid;
                fb = fm;
            }
            if (std::abs(b - a) < 1e-15 * std::abs(a)) break;
        }
        // Secant polish inside the bracket (a and b are both negative, with
        // a the inner edge, so order the interval check explicitly).
        const double lo = std::min(a, b), hi = std::max(a, b);
        double x0 = a, f0 = fa, x1 = b, f1 = fb;
        for (int i = 0; i < 4; ++i) {
            if (f1 == f0) break;
            const double x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
            if (!(x2 >= lo && x2 <= hi)) break;
            x0 = x1;
            f0 = f1;
            x1 = x2;
            f1 = im_k_tot(x1, omega_ref);
            ++iters;
        }
        return std::abs(f1) <= std::abs(f0) ? x1 : x0;
    };

    int iters = 0;
    double delta_b = solve_at(sol.omega_ref, iters);

    if (mode == Mode::exact) {
        // The exact spring is frequency dependent; re-evaluate at the spring
        // frequency it produces until the root settles.
        for (int pass = 0; pass < 20; ++pass) {
            const OpticalField fields[2] = {
                with_detuning(blue_template, delta_b), red};
            const double k_re =
                combine_springs(fields, sol.omega_ref, mode).real();
            const double w_sq =
                mech.omega_m * mech.omega_m + k_re / mech.mass;
            const double w_new = w_sq > 0.0 ? std::sqrt(w_sq) : mech.omega_m;
            const double next = solve_at(w_new, iters);
            const bool settled =
                std::abs(next - delta_b) <= 1e-12 * std::abs(delta_b);
            sol.omega_ref = w_new;
            delta_b = next;
            if (settled) break;
        }
    }

    sol.delta_b = delta_b;
    sol.residual_im = im_k_tot(delta_b, sol.omega_ref);
    sol.iterations = iters;
    return sol;
}

StabilityResult stability(const QuadraticForm& form) {
    StabilityResult r;
    r.stable = form.gamma > 0.0 && form.omega_sq > 0.0;
    const cplx root =
        std::sqrt(cplx(form.omega_sq - 0.25 * form.gamma * form.gamma, 0.0));
    const cplx shift(0.0, -0.5 * form.gamma);
    r.pole_plus = root + shift;
    r.pole_minus = -root + shift;
    return r;
}

}  // namespace ospring
