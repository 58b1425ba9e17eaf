/*
 * rng.hpp — Counter-based random numbers for reproducible ensembles.
 *
 * Every random quantity in the library is a pure function of a small integer
 * key (base_seed, sample_index, kx, ky, stream).  There is no mutable
 * generator state, so results are identical for any worker count and any
 * evaluation order, and the mode streams of nested truncations N′ < N agree
 * coefficient-by-coefficient.
 *
 * Construction: the key words are folded into a 64-bit state with a
 * splitmix64 round after each word; output words index a counter.  The
 * complex Gaussian uses the polar (Box–Muller) map
 *     g = sqrt(−log u₁) · e^{2πi u₂},
 * which has E|g|² = 1 with independent N(0, ½) real and imaginary parts.
 */
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace nlslab {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Keyed counter hash: deterministic 64-bit word for (seed, index, kx, ky, ctr).
inline std::uint64_t keyed_word(std::uint64_t seed, std::uint64_t index, std::int64_t kx,
                                std::int64_t ky, std::uint64_t ctr) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ (index + 0x100000001b3ULL));
    h = splitmix64(h ^ (static_cast<std::uint64_t>(kx) + 0x517cc1b727220a95ULL));
    h = splitmix64(h ^ (static_cast<std::uint64_t>(ky) + 0x2545f4914f6cdd1dULL));
    h = splitmix64(h ^ (ctr + 0x9e3779b97f4a7c15ULL));
    return h;
}

// uniform in (0, 1]: the +1 keeps log() finite
inline double to_unit_interval(std::uint64_t h) {
    return ((h >> 11) + 1) * 0x1.0p-53;
}

// Standard complex Gaussian, E|g|² = 1, keyed by (seed, index, k).
inline std::complex<double> complex_gaussian(std::uint64_t seed, std::uint64_t index, int kx,
                                             int ky) {
    double u1 = to_unit_interval(keyed_word(seed, index, kx, ky, 0));
    double u2 = to_unit_interval(keyed_word(seed, index, kx, ky, 1));
    double r = std::sqrt(-std::log(u1));
    double phi = 2.0 * 3.14159265358979323846 * u2;
    return {r * std::cos(phi), r * std::sin(phi)};
}

}  // namespace nlslab
