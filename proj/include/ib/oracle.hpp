#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ib/common.hpp"
#include "ib/joint.hpp"
#include "ib/measures.hpp"
#include "ib/solver.hpp"

namespace ib {

// Hard cap on |X|^n for exhaustive enumeration (Bell-number guard). The
// oracle never samples; beyond this it refuses.
inline constexpr std::size_t kMaxEnumerationGround = 12;

// One block code f: X^n -> M, stored as the restricted-growth assignment of
// each sequence (big-endian index) to its block label.
struct CodePoint {
    std::size_t n = 1;
    std::size_t m_size = 1;
    std::vector<std::size_t> partition;  // size |X|^n, values < m_size
    double rate = 0.0;                   // (1/n) ln m_size, nats
    double score = 0.0;                  // (1/n) I(Y^n; f(X^n)), nats
};

inline std::string rgs_string(const std::vector<std::size_t>& partition) {
    std::string s;
    s.reserve(partition.size());
    for (std::size_t v : partition)
        s += v < 10 ? static_cast<char>('0' + v) : static_cast<char>('a' + v - 10);
    return s;
}

// Stirling numbers of the second kind via the standard recurrence.
inline std::uint64_t stirling2(std::size_t n, std::size_t k) {
    if (k > n) return 0;
    if (n == 0 && k == 0) return 1;
    if (k == 0) return 0;
    std::vector<std::vector<std::uint64_t>> s(n + 1, std::vector<std::uint64_t>(k + 1, 0));
    s[0][0] = 1;
    for (std::size_t i = 1; i <= n; ++i)
        for (std::size_t j = 1; j <= std::min(i, k); ++j)
            s[i][j] = static_cast<std::uint64_t>(j) * s[i - 1][j] + s[i - 1][j - 1];
    return s[n][k];
}

// Number of set partitions of an n-element set into at most m nonempty blocks.
inline std::uint64_t partition_count(std::size_t n, std::size_t m) {
    std::uint64_t total = 0;
    for (std::size_t k = 1; k <= std::min(n, m); ++k) total += stirling2(n, k);
    return total;
}

namespace detail {

// Visit every restricted-growth string of the given length with values below
// m_size, in lexicographic order. `used` counts the labels in the prefix.
inline void foreach_rgs(std::size_t length, std::size_t m_size,
                        const std::function<void(const std::vector<std::size_t>&)>& visit) {
    std::vector<std::size_t> a(length, 0);
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t pos, std::size_t used) {
        if (pos == length) {
            visit(a);
            return;
        }
        const std::size_t cap = std::min(used + 1, m_size);
        for (std::size_t v = 0; v < cap; ++v) {
            a[pos] = v;
            rec(pos + 1, std::max(used, v + 1));
        }
    };
    rec(0, 0);
}

}  // namespace detail

struct FrontierResult {
    CodePoint best;
    std::vector<CodePoint> all;  // filled only when keep_all
    std::uint64_t enumerated = 0;
};

// Exhaustive search over all set partitions of X^n into at most m_size
// blocks; the score of a partition is (1/n) I(Y^n; f(X^n)) on the i.i.d.
// extension. Deterministic lexicographic order; ties keep the earliest
// (lexicographically smallest) partition.
inline FrontierResult enumerate_frontier(const JointPMF& j, std::size_t n, std::size_t m_size,
                                         bool keep_all = false, const std::string& x_axis = "x",
                                         const std::string& y_axis = "y") {
    if (m_size < 1) throw OutOfRange("enumerate_frontier: m_size must be >= 1");
    const std::size_t base = j.axis(j.axis_index(x_axis)).size;
    std::size_t ground = 1;
    for (std::size_t t = 0; t < n; ++t) {
        ground *= base;
        if (ground > kMaxEnumerationGround)
            throw SizeExceeded("enumerate_frontier: |X|^n exceeds " +
                               std::to_string(kMaxEnumerationGround));
    }

    JointPMF jn = product_extension(j.marginal(std::vector<std::string>{y_axis, x_axis}), n);
    const std::size_t nyn = jn.axis(0).size, nxn = jn.axis(1).size;
    // Column-major copy: fiber over Y^n per sequence x^n.
    std::vector<double> col(nxn * nyn);
    for (std::size_t y = 0; y < nyn; ++y)
        for (std::size_t x = 0; x < nxn; ++x) col[x * nyn + y] = jn.table()[y * nxn + x];

    const double rate = std::log(static_cast<double>(m_size)) / static_cast<double>(n);
    FrontierResult res;
    res.best.n = n;
    res.best.m_size = m_size;
    res.best.rate = rate;
    res.best.score = -1.0;

    std::vector<double> pushed(nyn * m_size);
    detail::foreach_rgs(nxn, m_size, [&](const std::vector<std::size_t>& a) {
        ++res.enumerated;
        std::fill(pushed.begin(), pushed.end(), 0.0);
        for (std::size_t x = 0; x < nxn; ++x) {
            const double* cx = col.data() + x * nyn;
            double* out = pushed.data();
            const std::size_t m = a[x];
            for (std::size_t y = 0; y < nyn; ++y) out[y * m_size + m] += cx[y];
        }
        const double score =
            detail::mi_of_matrix(pushed, nyn, m_size) / static_cast<double>(n);
        CodePoint pt{n, m_size, a, rate, score};
        if (score > res.best.score) res.best = pt;
        if (keep_all) res.all.push_back(std::move(pt));
    });
    return res;
}

// Score a single explicit code assignment (same conventions as
// enumerate_frontier, but no search).
inline CodePoint score_code(const JointPMF& j, std::size_t n, std::size_t m_size,
                            std::vector<std::size_t> partition, const std::string& x_axis = "x",
                            const std::string& y_axis = "y") {
    JointPMF jn = product_extension(j.marginal(std::vector<std::string>{y_axis, x_axis}), n);
    const std::size_t nyn = jn.axis(0).size, nxn = jn.axis(1).size;
    if (partition.size() != nxn) throw OutOfRange("score_code: partition size mismatch");
    std::vector<double> pushed(nyn * m_size, 0.0);
    for (std::size_t y = 0; y < nyn; ++y)
        for (std::size_t x = 0; x < nxn; ++x) {
            if (partition[x] >= m_size) throw OutOfRange("score_code: label out of range");
            pushed[y * m_size + partition[x]] += jn.table()[y * nxn + x];
        }
    CodePoint pt;
    pt.n = n;
    pt.m_size = m_size;
    pt.partition = std::move(partition);
    pt.rate = std::log(static_cast<double>(m_size)) / static_cast<double>(n);
    pt.score = detail::mi_of_matrix(pushed, nyn, m_size) / static_cast<double>(n);
    return pt;
}

// Converse test: the code point must lie on or below the solved single-letter
// curve, up to `slack` nats.
inline bool converse_check(const CodePoint& point, const IBCurve& curve, double slack) {
    return point.score <= ib_value_at_rate(curve, point.rate) + slack;
}

// Single-letter auxiliary variable witnessing a block code's performance:
// u = (f(x^n), x^{t-1}, t) with t uniform on the letter positions. The joint
// extends mu_{yx}, keeps y - x - u Markov, and satisfies
//   I(x;u) <= (1/n) ln|M|   and   I(y;u) >= (1/n) I(Y^n; f(X^n)).
struct WitnessVariable {
    std::size_t u_size = 0;
    JointPMF joint;  // axes (y, x, u)

    // Decomposition of a u symbol into (label, prefix index, letter position).
    struct USymbol {
        std::size_t label = 0, prefix = 0, t = 0;
    };
    std::size_t x_size = 0, n = 1, m_size = 1;

    USymbol decode(std::size_t u) const {
        std::size_t pw = 1;
        for (std::size_t t = 0; t < n; ++t) {
            const std::size_t block = m_size * pw;
            if (u < block) return {u / pw, u % pw, t};
            u -= block;
            pw *= x_size;
        }
        throw OutOfRange("WitnessVariable::decode: symbol out of range");
    }
};

inline WitnessVariable witness_from_code(const JointPMF& j, const CodePoint& point,
                                         const std::string& x_axis = "x",
                                         const std::string& y_axis = "y") {
    JointPMF yx = j.marginal(std::vector<std::string>{y_axis, x_axis});
    const std::size_t ny = yx.axis(0).size, nx = yx.axis(1).size;
    const std::size_t n = point.n;

    std::size_t nxn = 1;
    std::vector<std::size_t> pow_x(n + 1, 1);
    for (std::size_t t = 0; t < n; ++t) {
        nxn *= nx;
        pow_x[t + 1] = pow_x[t] * nx;
    }
    if (point.partition.size() != nxn)
        throw OutOfRange("witness_from_code: partition does not match |X|^n");

    std::size_t u_size = 0;
    std::vector<std::size_t> offset(n, 0);
    for (std::size_t t = 0; t < n; ++t) {
        offset[t] = u_size;
        u_size += point.m_size * pow_x[t];
    }
    if (u_size == 0 || ny * nx > kMaxTableCells / u_size)
        throw SizeExceeded("witness_from_code: joint exceeds dense guard");

    std::vector<double> px = yx.marginal_pmf(1).weights();
    Kernel cond = yx.conditional(1, 0);  // y | x

    std::vector<double> table(ny * nx * u_size, 0.0);
    const double inv_n = 1.0 / static_cast<double>(n);
    std::vector<std::size_t> word(n);
    for (std::size_t seq = 0; seq < nxn; ++seq) {
        std::size_t rem = seq;
        for (std::size_t t = n; t-- > 0;) {
            word[t] = rem % nx;
            rem /= nx;
        }
        double mass = 1.0;
        for (std::size_t t = 0; t < n; ++t) mass *= px[word[t]];
        if (mass == 0.0) continue;
        const std::size_t m = point.partition[seq];
        std::size_t prefix = 0;
        for (std::size_t t = 0; t < n; ++t) {
            const std::size_t x = word[t];
            const std::size_t u = offset[t] + m * pow_x[t] + prefix;
            const double w = inv_n * mass;
            for (std::size_t y = 0; y < ny; ++y)
                table[(y * nx + x) * u_size + u] += w * cond(x, y);
            prefix = prefix * nx + x;
        }
    }

    return WitnessVariable{u_size,
                           JointPMF({{"y", ny}, {"x", nx}, {"u", u_size}}, std::move(table)),
                           nx, n, point.m_size};
}

// Best achieved score per blocklength at fixed per-block |M|, the cumulative
// best over shorter blocks, and (when a curve is supplied) the single-letter
// ceiling at that blocklength's rate.
struct GrowthRow {
    std::size_t n = 1;
    double rate = 0.0;
    double best_score = 0.0;     // best (1/n) I at this exact n
    double best_upto = 0.0;      // max over n' <= n
    double ceiling = 0.0;        // ib_value_at_rate(curve, rate); NaN without curve
    CodePoint best_point;
};

inline std::vector<GrowthRow> frontier_growth(const JointPMF& j, std::size_t n_max,
                                              std::size_t m_size,
                                              const IBCurve* curve = nullptr,
                                              const std::string& x_axis = "x",
                                              const std::string& y_axis = "y") {
    std::vector<GrowthRow> rows;
    double running = 0.0;
    for (std::size_t n = 1; n <= n_max; ++n) {
        FrontierResult fr = enumerate_frontier(j, n, m_size, false, x_axis, y_axis);
        running = std::max(running, fr.best.score);
        GrowthRow row;
        row.n = n;
        row.rate = fr.best.rate;
        row.best_score = fr.best.score;
        row.best_upto = running;
        row.ceiling = curve ? ib_value_at_rate(*curve, fr.best.rate)
                            : std::numeric_limits<double>::quiet_NaN();
        row.best_point = std::move(fr.best);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace ib
