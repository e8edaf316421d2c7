#pragma once

#include <functional>
#include <span>
#include <vector>

namespace ospring::oracle {

struct SpectrumEstimate {
    std::vector<double> freq;     // Hz
    std::vector<double> psd;      // single-sided, unit^2/Hz
    std::vector<double> rel_std;  // per-bin relative standard error
    int n_segments = 0;
    double df = 0.0;
    double ts_variance = 0.0;     // time-series variance
    double psd_integral = 0.0;    // integral of psd over freq
};

// Hann window, 50% overlap, single-sided normalization (DC and Nyquist not
// doubled).  segment_len must be a power of two.
SpectrumEstimate psd_welch(std::span<const double> series, double sample_dt,
                           std::size_t segment_len);

struct BandedComparison {
    SpectrumEstimate empirical;    // log-band averages
    std::vector<double> analytic;  // same bins, identically averaged
};

// Average estimate and analytic curve over identical linear bins inside
// logarithmic bands, so resolution smearing cancels in the comparison and
// per-band scatter shrinks by sqrt(bins per band).
BandedComparison log_rebin(const SpectrumEstimate& est,
                           const std::function<double(double)>& analytic,
                           double fmin, double fmax, int bands_per_decade);

// Radix-2 in-place FFT of interleaved complex data; n a power of two.
void fft_pow2(std::vector<double>& re, std::vector<double>& im);

}  // namespace ospring::oracle
