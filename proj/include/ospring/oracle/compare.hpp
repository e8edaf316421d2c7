#pragma once

#include <span>

#include "ospring/oracle/welch.hpp"

namespace ospring::oracle {

struct CompareResult {
    double max_rel_dev = 0.0;
    double worst_freq = 0.0;   // Hz
    std::size_t bins_used = 0;
    bool pass = false;
};

// Bin-wise |analytic - empirical| / empirical over [fmin, fmax], skipping
// bins whose relative standard error exceeds max_rel_std.
CompareResult compare(std::span<const double> analytic,
                      const SpectrumEstimate& emp, double fmin, double fmax,
                      double tolerance = 0.15, double max_rel_std = 0.20);

}  // namespace ospring::oracle
