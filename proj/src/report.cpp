#include "ospring/report.hpp"

#include <cmath>
#include <cstdio>
#include "ospring/detail/strfmt.hpp"
#include <sstream>

#include "ospring/errors.hpp"

namespace ospring {

namespace {
constexpr double two_pi = 2.0 * M_PI;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12e", v);
    return buf;
}

std::vector<std::string> report_header(const SystemConfig& cfg,
                                       const std::string& title) {
    std::vector<std::string> lines;
    lines.push_back("# ospring " + title);
    lines.push_back(detail::strfmt("# config_hash: %016llx",
                                   static_cast<unsigned long long>(cfg.hash)));
    lines.push_back(detail::strfmt(
        "# constants: %s hbar=%s k_b=%s c=%s", constants_version,
        fmt(cfg.constants.hbar).c_str(), fmt(cfg.constants.k_b).c_str(),
        fmt(cfg.constants.c).c_str()));
    lines.push_back(
        "# conventions: single-sided spectra in 1/Hz; gamma is the cavity "
        "half-width; detuning = omega_cavity - omega_drive, so a blue drive "
        "has detuning < 0");
    return lines;
}

std::string budget_csv(const SystemConfig& cfg, BudgetMode mode,
                       const std::vector<double>& omegas) {
    std::ostringstream out;
    const char* name = mode == BudgetMode::open ? "budget open" : "budget closed";
    for (const auto& line : report_header(cfg, name)) out << line << "\n";
    out << "f_hz,Sx_thermal";
    for (const auto& f : cfg.fields) out << ",Sx_rp_" << f.in.label;
    out << ",Sx_total,re_chi_inv,im_chi_inv\n";
    for (const double w : omegas) {
        const BudgetRow row = displacement_spectrum(cfg, w, mode);
        out << fmt(w / two_pi) << ',' << fmt(row.sx_thermal);
        for (const double s : row.sx_rp) out << ',' << fmt(s);
        out << ',' << fmt(row.sx_total) << ',' << fmt(row.chi_inv.real()) << ','
            << fmt(row.chi_inv.imag()) << "\n";
    }
    return out.str();
}

std::string cavity_dump_csv(const SystemConfig& cfg,
                            const std::vector<double>& omegas) {
    std::ostringstream out;
    for (const auto& line : report_header(cfg, "cavity dump")) out << line << "\n";
    out << "omega";
    for (const auto& f : cfg.fields) {
        const std::string& l = f.in.label;
        out << ",re_k_" << l << ",im_k_" << l << ",sf_" << l;
        for (const char* ch : {"v1", "v2", "v1p", "v2p"})
            out << ",re_" << ch << '_' << l << ",im_" << ch << '_' << l;
    }
    out << "\n";
    for (const double w : omegas) {
        out << fmt(w);
        for (const auto& f : cfg.fields) {
            const cplx k = spring_exact(f, w);
            const NoiseVector v = force_noise(f, w, Mode::exact);
            out << ',' << fmt(k.real()) << ',' << fmt(k.imag()) << ','
                << fmt(force_spectrum_exact_lossy(f, w));
            for (const ChannelKind ch : {ChannelKind::v1, ChannelKind::v2,
                                         ChannelKind::v1p, ChannelKind::v2p}) {
                const cplx c = v.get({ch, f.in.label});
                out << ',' << fmt(c.real()) << ',' << fmt(c.imag());
            }
        }
        out << "\n";
    }
    return out.str();
}

std::string closed_loop_csv(const SystemConfig& cfg,
                            const FeedbackKernel& kernel,
                            const std::vector<double>& omegas) {
    std::ostringstream out;
    for (const auto& line : report_header(cfg, "closed loop")) out << line << "\n";
    out << "omega,re_chi_inv_closed,im_chi_inv_closed,s_residual_total";
    for (const auto& f : cfg.fields) {
        const std::string& l = f.in.label;
        for (const char* ch : {"v1", "v2", "v1p", "v2p", "det"})
            out << ",s_" << ch << '_' << l;
    }
    out << "\n";

    ChannelDensities dens;
    for (const auto& f : cfg.fields)
        dens.v1_density[f.in.label] = f.in.v1_density;

    for (const double w : omegas) {
        const StackClosedLoop loop =
            close_loop_stack(cfg.mech, cfg.fields, cfg.det, kernel, w);
        double total = 0.0;
        for (const auto& r : loop.residuals) total += spectral_density(r, dens);
        out << fmt(w) << ',' << fmt(loop.chi_inv.real()) << ','
            << fmt(loop.chi_inv.imag()) << ',' << fmt(total);
        for (std::size_t i = 0; i < cfg.fields.size(); ++i) {
            const std::string& l = cfg.fields[i].in.label;
            for (const ChannelKind ch :
                 {ChannelKind::v1, ChannelKind::v2, ChannelKind::v1p,
                  ChannelKind::v2p, ChannelKind::det}) {
                const NoiseChannel nc{ch, l};
                out << ','
                    << fmt(std::norm(loop.residuals[i].get(nc)) *
                           dens.density(nc));
            }
        }
        out << "\n";
    }
    return out.str();
}

std::string temperature_summary(const SystemConfig& cfg,
                                const TemperatureReport& rep) {
    std::ostringstream out;
    for (const auto& line : report_header(cfg, "temperature summary"))
        out << line << "\n";

    std::vector<std::pair<std::string, std::string>> kv;
    kv.emplace_back("stable", rep.stable ? "yes" : "no");
    kv.emplace_back("loop_closed", rep.loop_closed ? "yes" : "no");
    kv.emplace_back("t_env_k", fmt(rep.t_env));
    kv.emplace_back("f_m_hz", fmt(cfg.mech.omega_m / two_pi));
    kv.emplace_back("gamma_m_rad_s", fmt(cfg.mech.gamma_m));
    kv.emplace_back("f_os_hz", fmt(rep.omega_os / two_pi));
    kv.emplace_back("f_new_hz", fmt(rep.omega_new / two_pi));
    kv.emplace_back("q_eff", fmt(rep.q_eff));
    kv.emplace_back("threshold_t_k", fmt(rep.threshold_t));
    kv.emplace_back("n_bar_over_q", fmt(rep.n_bar_over_q));
    for (const auto& f : rep.fields) {
        const std::string p = "field." + f.label + ".";
        kv.emplace_back(p + "gamma_os_rad_s", fmt(f.gamma_os));
        kv.emplace_back(p + "omega_os_sq_rad2_s2", fmt(f.omega_os_sq));
        kv.emplace_back(p + "required_gain", fmt(f.required_gain));
        kv.emplace_back(p + "t_res_k", fmt(f.t_res));
    }

    std::size_t width = 0;
    for (const auto& [k, v] : kv) width = std::max(width, k.size());
    for (const auto& [k, v] : kv)
        out << k << std::string(width - k.size() + 2, ' ') << v << "\n";

    out << "# note: q_eff assumes viscous damping (gamma_m stays fixed as "
           "the spring stiffens); structural damping would scale "
           "differently\n";
    out << "# note: required_gain is |gamma_os|/gamma_m, the loop gain where "
           "feedback damping first beats the optical anti-damping; bandwidth "
           "rules of thumb can understate it by orders of magnitude\n";
    out << "# note: t_res is the infinite-gain residual evaluated at the "
           "closed-loop resonance\n";
    for (const auto& n : rep.notes) out << "# note: " << n << "\n";

    out << "[machine]\n";
    for (const auto& [k, v] : kv) out << k << '=' << v << "\n";
    return out.str();
}

std::vector<double> log_grid_omega(double f_min_hz, double f_max_hz,
                                   int points) {
    if (!(f_min_hz > 0.0)) throw ConfigError("frequency grid must start > 0");
    if (f_max_hz < f_min_hz)
        throw ConfigError("frequency grid end below its start");
    if (points < 1) throw ConfigError("frequency grid needs >= 1 point");
    std::vector<double> w;
    if (points == 1 || f_max_hz == f_min_hz) {
        w.push_back(two_pi * f_min_hz);
        return w;
    }
    const double lmin = std::log(f_min_hz);
    const double lmax = std::log(f_max_hz);
    w.reserve(points);
    for (int i = 0; i < points; ++i) {
        const double t = static_cast<double>(i) / (points - 1);
        w.push_back(two_pi * std::exp(lmin + t * (lmax - lmin)));
    }
    return w;
}

}  // namespace ospring
