#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace pignn {

// FNV-1a, used to derive per-graph and per-run seeds from a master seed.
// Stable across platforms so experiment grids are reproducible.
inline uint64_t fnv1a64(std::string_view bytes, uint64_t seed = 14695981039346656037ull) {
    uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// Shortest-exact decimal form: %.17g round-trips IEEE754 doubles.
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace pignn
