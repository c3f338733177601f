#pragma once

#include <cstdint>

namespace scfa {

// Counter-based generator: every draw is a pure function of
// (seed, stream, counter), so sampling is reproducible across platforms and
// parallelizable by assigning streams/counter blocks. Built on the
// splitmix64 finalizer.
namespace rng {

std::uint64_t hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);

// Uniform double in the open interval (0, 1).
double uniform01(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);

// Standard normal via the inverse-CDF transform of uniform01 (bit-stable
// given the in-repo quantile function).
double standard_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);

}  // namespace rng
}  // namespace scfa
