#pragma once

#include <map>
#include <string>
#include <vector>

#include "ospring/params.hpp"

namespace ospring {

// Independent white channels, unit single-sided spectral density unless a
// multiplier is registered: v1/v2 are the input field quadratures, v1p/v2p
// the loss-port vacuum, det the photodetector vacuum, fth the thermal force.
enum class ChannelKind { v1, v2, v1p, v2p, det, fth };

struct NoiseChannel {
    ChannelKind kind = ChannelKind::v1;
    std::string id;  // field label; empty for fth

    friend bool operator==(const NoiseChannel&, const NoiseChannel&) = default;
    friend auto operator<=>(const NoiseChannel& a, const NoiseChannel& b) {
        if (auto c = a.kind <=> b.kind; c != 0) return c;
        return a.id <=> b.id;
    }
};

const char* to_string(ChannelKind k);

// Linear combination of noise channels at one frequency.
struct NoiseVector {
    double omega = 0.0;
    std::vector<std::pair<NoiseChannel, cplx>> coeffs;

    void set(NoiseChannel ch, cplx coeff);
    void add(NoiseChannel ch, cplx coeff);
    cplx get(NoiseChannel ch) const;  // 0 for absent channels
    void append(const NoiseVector& other);  // channel sets must not overlap
};

// Per-channel single-sided densities. Quadrature and detector channels
// default to 1; v1 channels may carry a classical multiplier; fth carries
// the thermal force density.
struct ChannelDensities {
    double fth_density = 0.0;                    // N^2/Hz
    std::map<std::string, double> v1_density;    // by field label

    double density(const NoiseChannel& ch) const;
};

// Single-sided density of the combination: sum |c_i|^2 S_i over channels.
double spectral_density(const NoiseVector& v,
                        const ChannelDensities& d = ChannelDensities{});

}  // namespace ospring
