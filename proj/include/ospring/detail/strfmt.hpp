#pragma once

#include <cstdarg>
#include <cstdio>
#include <string>

namespace ospring::detail {

// printf into a std::string; <format> is not available on the oldest
// toolchain this builds on.
[[gnu::format(printf, 1, 2)]] inline std::string strfmt(const char* fmt, ...) {
    va_list args;
    va_start(args, fmt);
    va_list probe;
    va_copy(probe, args);
    const int n = std::vsnprintf(nullptr, 0, fmt, probe);
    va_end(probe);
    std::string out;
    if (n > 0) {
        out.resize(static_cast<std::size_t>(n));
        std::vsnprintf(out.data(), out.size() + 1, fmt, args);
    }
    va_end(args);
    return out;
}

}  // namespace ospring::detail
