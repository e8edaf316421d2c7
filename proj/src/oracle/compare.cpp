#include "ospring/oracle/compare.hpp"

#include <cmath>

#include "ospring/errors.hpp"

namespace ospring::oracle {

CompareResult compare(std::span<const double> analytic,
                      const SpectrumEstimate& emp, double fmin, double fmax,
                      double tolerance, double max_rel_std) {
    if (analytic.size() != emp.psd.size())
        throw NumericalError("compare: grid size mismatch");

    CompareResult r;
    for (std::size_t i = 0; i < emp.freq.size(); ++i) {
        const double f = emp.freq[i];
        if (f < fmin || f > fmax) continue;
        if (emp.rel_std[i] > max_rel_std) continue;
        if (!(emp.psd[i] > 0.0)) continue;
        const double dev = std::abs(analytic[i] - emp.psd[i]) / emp.psd[i];
        ++r.bins_used;
        if (dev > r.max_rel_dev) {
            r.max_rel_dev = dev;
            r.worst_freq = f;
        }
    }
    r.pass = r.bins_used > 0 && r.max_rel_dev <= tolerance;
    return r;
}

}  // namespace ospring::oracle
