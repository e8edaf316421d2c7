#include "ospring/oracle/welch.hpp"

#include <cmath>
#include <numeric>

#include "ospring/errors.hpp"

namespace ospring::oracle {

void fft_pow2(std::vector<double>& re, std::vector<double>& im) {
    const std::size_t n = re.size();
    if (n == 0 || (n & (n - 1)) != 0 || im.size() != n)
        throw NumericalError("fft length must be a power of two");

    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) {
            std::swap(re[i], re[j]);
            std::swap(im[i], im[j]);
        }
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * M_PI / static_cast<double>(len);
        const double wr = std::cos(ang);
        const double wi = std::sin(ang);
        for (std::size_t i = 0; i < n; i += len) {
            double cr = 1.0, ci = 0.0;
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::size_t a = i + k;
                const std::size_t b = i + k + len / 2;
                const double tr = re[b] * cr - im[b] * ci;
                const double ti = re[b] * ci + im[b] * cr;
                re[b] = re[a] - tr;
                im[b] = im[a] - ti;
                re[a] += tr;
                im[a] += ti;
                const double ncr = cr * wr - ci * wi;
                ci = cr * wi + ci * wr;
                cr = ncr;
            }
        }
    }
}

SpectrumEstimate psd_welch(std::span<const double> series, double sample_dt,
                           std::size_t segment_len) {
    const std::size_t n = series.size();
    const std::size_t L = segment_len;
    if (L == 0 || (L & (L - 1)) != 0)
        throw NumericalError("segment length must be a power of two");
    if (n < L) throw NumericalError("series shorter than one segment");
    if (!(sample_dt > 0.0)) throw NumericalError("sample_dt must be positive");

    const double mean =
        std::accumulate(series.begin(), series.end(), 0.0) /
        static_cast<double>(n);
    double var = 0.0;
    for (const double v : series) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);

    const std::size_t hop = L / 2;
    const int n_seg = static_cast<int>((n - L) / hop) + 1;
    const std::size_t n_bins = L / 2 + 1;

    std::vector<double> window(L);
    double wsq = 0.0;
    for (std::size_t i = 0; i < L; ++i) {
        window[i] =
            0.5 * (1.0 - std::cos(2.0 * M_PI * static_cast<double>(i) /
                                  static_cast<double>(L)));
        wsq += window[i] * window[i];
    }
    const double fs = 1.0 / sample_dt;
    const double scale = 2.0 / (fs * wsq);

    std::vector<double> acc(n_bins, 0.0);
    std::vector<double> acc_sq(n_bins, 0.0);
    std::vector<double> re(L), im(L);
    for (int s = 0; s < n_seg; ++s) {
        const std::size_t off = static_cast<std::size_t>(s) * hop;
        for (std::size_t i = 0; i < L; ++i) {
            re[i] = (series[off + i] - mean) * window[i];
            im[i] = 0.0;
        }
        fft_pow2(re, im);
        for (std::size_t k = 0; k < n_bins; ++k) {
            double pk = (re[k] * re[k] + im[k] * im[k]) * scale;
            if (k == 0 || k == L / 2) pk *= 0.5;  // one-sided: ends not doubled
            acc[k] += pk;
            acc_sq[k] += pk * pk;
        }
    }

    SpectrumEstimate est;
    est.n_segments = n_seg;
    est.df = fs / static_cast<double>(L);
    est.ts_variance = var;
    est.freq.resize(n_bins);
    est.psd.resize(n_bins);
    est.rel_std.resize(n_bins);
    for (std::size_t k = 0; k < n_bins; ++k) {
        est.freq[k] = est.df * static_cast<double>(k);
        const double m = acc[k] / n_seg;
        est.psd[k] = m;
        if (n_seg > 1 && m > 0.0) {
            const double msq = acc_sq[k] / n_seg;
            const double sd =
                std::sqrt(std::max(0.0, msq - m * m) *
                          (static_cast<double>(n_seg) / (n_seg - 1)));
            est.rel_std[k] = sd / (m * std::sqrt(static_cast<double>(n_seg)));
        } else {
            est.rel_std[k] = 1.0;
        }
        est.psd_integral += m * est.df;
    }
    return est;
}

BandedComparison log_rebin(const SpectrumEstimate& est,
                           const std::function<double(double)>& analytic,
                           double fmin, double fmax, int bands_per_decade) {
    if (!(fmin > 0.0) || !(fmax > fmin) || bands_per_decade < 1)
        throw NumericalError("bad rebin band specification");

    BandedComparison out;
    out.empirical.n_segments = est.n_segments;
    out.empirical.df = est.df;
    out.empirical.ts_variance = est.ts_variance;
    out.empirical.psd_integral = est.psd_integral;

    const double step = std::pow(10.0, 1.0 / bands_per_decade);
    double lo = fmin;
    std::size_t i = 0;
    while (i < est.freq.size() && est.freq[i] < fmin) ++i;
    while (lo < fmax) {
        const double hi = std::min(lo * step, fmax);
        double e_sum = 0.0, a_sum = 0.0, var_sum = 0.0, f_sum = 0.0;
        int count = 0;
        while (i < est.freq.size() && est.freq[i] < hi) {
            const double f = est.freq[i];
            e_sum += est.psd[i];
            a_sum += analytic(f);
            const double sd = est.rel_std[i] * est.psd[i];
            var_sum += sd * sd;
            f_sum += f;
            ++count;
            ++i;
        }
        if (count > 0) {
            const double e_mean = e_sum / count;
            out.empirical.freq.push_back(f_sum / count);
            out.empirical.psd.push_back(e_mean);
            out.empirical.rel_std.push_back(
                e_mean > 0.0 ? std::sqrt(var_sum) / count / e_mean : 1.0);
            out.analytic.push_back(a_sum / count);
        }
        if (hi >= fmax) break;
        lo = hi;
    }
    return out;
}

}  // namespace ospring::oracle
