#include "bois/rng.hpp"

namespace bois {

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= kFnvPrime;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t substream_seed(std::uint64_t master, std::string_view name,
                             std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t h = fnv1a(kFnvOffset, name.data(), name.size());
    h = fnv1a(h, &master, sizeof master);
    h = fnv1a(h, &a, sizeof a);
    h = fnv1a(h, &b, sizeof b);
    h = fnv1a(h, &c, sizeof c);
    return splitmix64(h);
}

}  // namespace bois
