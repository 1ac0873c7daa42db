#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "ib/joint.hpp"
#include "ib/pmf.hpp"
#include "ib/rng.hpp"

namespace ib::testing {

inline PMF random_pmf(std::mt19937_64& rng, std::size_t n) {
    return PMF(random_simplex_point(rng, n));
}

inline JointPMF random_joint(std::mt19937_64& rng, std::vector<Axis> axes) {
    std::size_t cells = 1;
    for (const auto& a : axes) cells *= a.size;
    return JointPMF(std::move(axes), random_simplex_point(rng, cells));
}

inline Kernel random_kernel(std::mt19937_64& rng, std::size_t in, std::size_t out) {
    std::vector<double> rows;
    rows.reserve(in * out);
    for (std::size_t i = 0; i < in; ++i) {
        auto r = random_simplex_point(rng, out);
        rows.insert(rows.end(), r.begin(), r.end());
    }
    return Kernel(in, out, std::move(rows));
}

// Binary symmetric pair with uniform input, axes (y, x).
inline JointPMF bsc_source(double crossover) {
    const double stay = 0.5 * (1.0 - crossover), flip = 0.5 * crossover;
    return JointPMF({{"y", 2}, {"x", 2}}, {stay, flip, flip, stay});
}

// Markov chain joint over axes (x, y, z) built as p(x) k(y|x) k(z|y).
inline JointPMF markov_xyz(std::mt19937_64& rng, std::size_t nx, std::size_t ny, std::size_t nz) {
    PMF px = random_pmf(rng, nx);
    Kernel kyx = random_kernel(rng, nx, ny);
    Kernel kzy = random_kernel(rng, ny, nz);
    std::vector<double> t(nx * ny * nz);
    for (std::size_t x = 0; x < nx; ++x)
        for (std::size_t y = 0; y < ny; ++y)
            for (std::size_t z = 0; z < nz; ++z)
                t[(x * ny + y) * nz + z] = px[x] * kyx(x, y) * kzy(y, z);
    return JointPMF({{"x", nx}, {"y", ny}, {"z", nz}}, std::move(t));
}

// Pair of PMFs at L-inf distance <= eps with eps drawn in (0, 1/2].
struct PerturbedPair {
    PMF p, q;
    double eps;
};

inline PerturbedPair perturbed_pair(std::mt19937_64& rng, std::size_t card) {
    PMF p = random_pmf(rng, card);
    std::uniform_real_distribution<double> ueps(1e-4, 0.5), usigned(-1.0, 1.0), u01(0.0, 1.0);
    const double eps = ueps(rng);

    std::vector<double> d(card);
    double mean = 0.0;
    for (auto& v : d) {
        v = usigned(rng);
        mean += v;
    }
    mean /= static_cast<double>(card);
    double peak = 0.0;
    for (auto& v : d) {
        v -= mean;
        peak = std::max(peak, std::abs(v));
    }
    if (peak == 0.0) return {p, p, eps};
    double scale = eps * u01(rng) / peak;
    for (std::size_t i = 0; i < card; ++i) {
        const double step = d[i] * scale;
        if (step < 0.0 && p[i] + step < 0.0) scale = std::min(scale, p[i] / -d[i]);
    }
    std::vector<double> q(card);
    for (std::size_t i = 0; i < card; ++i) q[i] = std::max(0.0, p[i] + d[i] * scale);
    return {p, PMF(std::move(q)), eps};
}

}  // namespace ib::testing
