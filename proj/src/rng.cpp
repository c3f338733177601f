#include "scfa/rng.hpp"

#include "scfa/distributions.hpp"

namespace scfa::rng {

namespace {

// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    std::uint64_t key = mix64(seed) ^ mix64(stream ^ 0xA0761D6478BD642FULL);
    return mix64(key ^ mix64(counter ^ 0xE7037ED1A0B428DBULL));
}

double uniform01(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    // 53 random bits, offset by half a ulp so 0 and 1 are never returned.
    std::uint64_t bits = hash(seed, stream, counter) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double standard_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    return normal_quantile(uniform01(seed, stream, counter));
}

}  // namespace scfa::rng
