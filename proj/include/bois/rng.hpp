#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace bois {

/// Derives the seed of a named substream from a master seed. Streams are
/// identified by a name plus up to three integer qualifiers, so that e.g.
/// the GP fit of geometry d at iteration n always draws from the same
/// stream regardless of execution order.
std::uint64_t substream_seed(std::uint64_t master, std::string_view name,
                             std::uint64_t a = 0, std::uint64_t b = 0,
                             std::uint64_t c = 0);

inline std::mt19937_64 make_stream(std::uint64_t master, std::string_view name,
                                   std::uint64_t a = 0, std::uint64_t b = 0,
                                   std::uint64_t c = 0) {
    return std::mt19937_64(substream_seed(master, name, a, b, c));
}

/// Uniform double in [0, 1) with 53 random bits. Implemented directly on the
/// engine output so results do not depend on the standard library's
/// distribution internals.
inline double uniform_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform double in [lo, hi).
inline double uniform_in(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform_unit(rng);
}

}  // namespace bois
