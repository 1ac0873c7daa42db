#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ib/common.hpp"
#include "ib/joint.hpp"
#include "ib/pmf.hpp"

namespace ib {

// Discrete entropy in nats, -sum p ln p with 0 ln 0 = 0.
inline double entropy(std::span<const double> weights) {
    double h = 0.0;
    for (double p : weights) h -= xlogx(p);
    return clamp_nonneg(h);
}

inline double entropy(const PMF& p) {
    return entropy(std::span<const double>(p.weights()));
}

// Kullback-Leibler divergence in nats. Throws InfiniteDivergence when p is
// not absolutely continuous w.r.t. q.
inline double kl_divergence(const PMF& p, const PMF& q) {
    if (p.size() != q.size()) throw OutOfRange("kl_divergence: length mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        if (q[i] == 0.0)
            throw InfiniteDivergence("kl_divergence: p[" + std::to_string(i) + "] > 0 but q = 0");
        d += p[i] * std::log(p[i] / q[i]);
    }
    return clamp_nonneg(d);
}

namespace detail {

// Collapse a joint onto (group_a, group_b) as a dense matrix, symbols within
// a group combined in the listed axis order.
struct Collapsed {
    std::size_t a_size = 1, b_size = 1;
    std::vector<double> m;  // row-major a_size x b_size
};

inline Collapsed collapse_pair(const JointPMF& j, std::span<const std::size_t> group_a,
                               std::span<const std::size_t> group_b) {
    Collapsed c;
    for (std::size_t k : group_a) c.a_size *= j.axis(k).size;
    for (std::size_t k : group_b) c.b_size *= j.axis(k).size;
    c.m.assign(c.a_size * c.b_size, 0.0);
    std::vector<std::size_t> idx(j.rank());
    for (std::size_t flat = 0; flat < j.cells(); ++flat) {
        std::size_t rem = flat;
        for (std::size_t i = 0; i < j.rank(); ++i) {
            idx[i] = rem / j.stride(i);
            rem %= j.stride(i);
        }
        std::size_t a = 0, b = 0;
        for (std::size_t k : group_a) a = a * j.axis(k).size + idx[k];
        for (std::size_t k : group_b) b = b * j.axis(k).size + idx[k];
        c.m[a * c.b_size + b] += j.table()[flat];
    }
    return c;
}

inline double mi_of_matrix(std::span<const double> m, std::size_t rows, std::size_t cols) {
    std::vector<double> pr(rows, 0.0), pc(cols, 0.0);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            pr[r] += m[r * cols + c];
            pc[c] += m[r * cols + c];
        }
    double h = entropy(std::span<const double>(pr)) + entropy(std::span<const double>(pc)) -
               entropy(m);
    return clamp_nonneg(h);
}

}  // namespace detail

// Mutual information I(A;B) in nats between two groups of axes. On finite
// alphabets the identity quantizer attains the defining supremum, so this is
// a direct computation from the collapsed table.
inline double mutual_information(const JointPMF& j, const std::vector<std::size_t>& group_a,
                                 const std::vector<std::size_t>& group_b) {
    auto c = detail::collapse_pair(j, group_a, group_b);
    return detail::mi_of_matrix(c.m, c.a_size, c.b_size);
}

inline double mutual_information(const JointPMF& j, const std::string& axis_a,
                                 const std::string& axis_b) {
    return mutual_information(j, std::vector<std::size_t>{j.axis_index(axis_a)},
                              std::vector<std::size_t>{j.axis_index(axis_b)});
}

// I(A;B|C) = sum_c p(c) I(A;B | C=c), in nats.
inline double conditional_mutual_information(const JointPMF& j,
                                             const std::vector<std::size_t>& group_a,
                                             const std::vector<std::size_t>& group_b,
                                             const std::vector<std::size_t>& group_c) {
    std::vector<std::size_t> ca = group_c;
    ca.insert(ca.end(), group_a.begin(), group_a.end());
    auto col = detail::collapse_pair(j, ca, group_b);
    std::size_t c_size = 1;
    for (std::size_t k : group_c) c_size *= j.axis(k).size;
    std::size_t a_size = col.a_size / c_size;
    std::size_t b_size = col.b_size;

    double cmi = 0.0;
    std::vector<double> slice(a_size * b_size);
    for (std::size_t cidx = 0; cidx < c_size; ++cidx) {
        const double* base = col.m.data() + cidx * a_size * b_size;
        double mass = stable_sum(base, base + a_size * b_size);
        if (mass <= 0.0) continue;
        for (std::size_t i = 0; i < a_size * b_size; ++i) slice[i] = base[i] / mass;
        cmi += mass * detail::mi_of_matrix(slice, a_size, b_size);
    }
    return clamp_nonneg(cmi);
}

inline double conditional_mutual_information(const JointPMF& j, const std::string& axis_a,
                                             const std::string& axis_b,
                                             const std::string& axis_c) {
    return conditional_mutual_information(j, std::vector<std::size_t>{j.axis_index(axis_a)},
                                          std::vector<std::size_t>{j.axis_index(axis_b)},
                                          std::vector<std::size_t>{j.axis_index(axis_c)});
}

// I(A;C|B): the quantity whose vanishing characterizes the chain A - B - C.
inline double markov_residual(const JointPMF& j, const std::string& axis_a,
                              const std::string& axis_b, const std::string& axis_c) {
    return conditional_mutual_information(j, axis_a, axis_c, axis_b);
}

// Chain A - B - C holds iff I(A;C|B) vanishes.
inline bool is_markov_chain(const JointPMF& j, const std::string& axis_a,
                            const std::string& axis_b, const std::string& axis_c, double tol) {
    if (!(tol > 0.0)) throw OutOfRange("is_markov_chain: tol must be positive");
    return markov_residual(j, axis_a, axis_b, axis_c) <= tol;
}

// Entropy-continuity bound: two distributions on a size-`card` alphabet at
// L-inf distance <= eps <= 1/2 have entropies within -eps * card * ln(eps).
inline double entropy_gap_bound(double eps, std::size_t card) {
    if (!(eps > 0.0) || eps > 0.5)
        throw OutOfRange("entropy_gap_bound: eps must lie in (0, 1/2], got " +
                         std::to_string(eps));
    return -eps * static_cast<double>(card) * std::log(eps);
}

}  // namespace ib
