#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace ib {

// Default root seed for every randomized component (CLI flag / env override).
inline constexpr std::uint64_t kDefaultSeed = 0x1B;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Independent stream per (root, a, b); used to split RNGs per (beta, restart)
// so results do not depend on evaluation order.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a, std::uint64_t b) {
    return splitmix64(splitmix64(splitmix64(root) ^ a) ^ (b * 0x9e3779b97f4a7c15ULL));
}

// Uniform sample from the probability simplex (normalized Exp(1) draws).
inline std::vector<double> random_simplex_point(std::mt19937_64& rng, std::size_t dim) {
    std::exponential_distribution<double> exp1(1.0);
    std::vector<double> w(dim);
    double total = 0.0;
    for (auto& v : w) {
        v = exp1(rng);
        total += v;
    }
    for (auto& v : w) v /= total;
    return w;
}

}  // namespace ib
