#include "ospring/noise.hpp"

#include "ospring/errors.hpp"

namespace ospring {

const char* to_string(ChannelKind k) {
    switch (k) {
        case ChannelKind::v1: return "v1";
        case ChannelKind::v2: return "v2";
        case ChannelKind::v1p: return "v1p";
        case ChannelKind::v2p: return "v2p";
        case ChannelKind::det: return "det";
        case ChannelKind::fth: return "fth";
    }
    return "?";
}

void NoiseVector::set(NoiseChannel ch, cplx coeff) {
    for (auto& [channel, c] : coeffs) {
        if (channel == ch) {
            c = coeff;
            return;
        }
    }
    coeffs.emplace_back(ch, coeff);
}

void NoiseVector::add(NoiseChannel ch, cplx coeff) {
    for (auto& [channel, c] : coeffs) {
        if (channel == ch) {
            c += coeff;
            return;
        }
    }
    coeffs.emplace_back(ch, coeff);
}

cplx NoiseVector::get(NoiseChannel ch) const {
    for (const auto& [channel, c] : coeffs) {
        if (channel == ch) return c;
    }
    return {0.0, 0.0};
}

void NoiseVector::append(const NoiseVector& other) {
    for (const auto& [channel, coeff] : other.coeffs) {
        for (const auto& [mine, unused] : coeffs) {
            if (mine == channel)
                throw NumericalError(std::string("channel collision on append: ") +
                                     channel.id + ":" + to_string(channel.kind));
        }
        coeffs.emplace_back(channel, coeff);
    }
}

double ChannelDensities::density(const NoiseChannel& ch) const {
    switch (ch.kind) {
        case ChannelKind::fth:
            return fth_density;
        case ChannelKind::v1:
        case ChannelKind::v1p: {
            const auto it = v1_density.find(ch.id);
            return it == v1_density.end() ? 1.0 : it->second;
        }
        default:
            // Phase quadratures and detector vacuum stay at the vacuum level.
            return 1.0;
    }
}

double spectral_density(const NoiseVector& v, const ChannelDensities& d) {
    double s = 0.0;
    for (const auto& [channel, coeff] : v.coeffs) {
        s += std::norm(coeff) * d.density(channel);
    }
    return s;
}

}  // namespace ospring
