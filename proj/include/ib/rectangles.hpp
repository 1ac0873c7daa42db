#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ib/common.hpp"
#include "ib/joint.hpp"
#include "ib/measures.hpp"
#include "ib/pmf.hpp"

namespace ib {

// Block code over an n-fold letter grid: every grid point (big-endian
// sequence index) carries a label in {0..m_size-1}.
struct GriddedCode {
    std::size_t n = 1;
    std::size_t letters = 1;  // per-axis cell count
    std::size_t m_size = 1;
    std::vector<std::size_t> labels;  // size letters^n

    GriddedCode(std::size_t blocklength, std::size_t letter_count, std::size_t labels_count,
                std::vector<std::size_t> point_labels)
        : n(blocklength), letters(letter_count), m_size(labels_count),
          labels(std::move(point_labels)) {
        std::size_t cells = 1;
        for (std::size_t t = 0; t < n; ++t) cells *= letters;
        if (labels.size() != cells) throw OutOfRange("GriddedCode: label table size mismatch");
        for (std::size_t v : labels)
            if (v >= m_size) throw OutOfRange("GriddedCode: label out of range");
    }

    std::size_t grid_size() const { return labels.size(); }
};

// One code cell Q_m = f^-1(m) as an explicit member list.
struct GriddedCodeCell {
    std::size_t n = 1;
    std::size_t letters = 1;
    std::size_t label = 0;
    std::vector<std::size_t> members;  // sorted flat grid indices
};

inline std::vector<GriddedCodeCell> code_cells(const GriddedCode& code) {
    std::vector<GriddedCodeCell> cells(code.m_size);
    for (std::size_t m = 0; m < code.m_size; ++m)
        cells[m] = GriddedCodeCell{code.n, code.letters, m, {}};
    for (std::size_t p = 0; p < code.labels.size(); ++p)
        cells[code.labels[p]].members.push_back(p);
    return cells;
}

// Disjoint union of product rectangles approximating one code cell from the
// inside: every rectangle is contained in Q_m, so the symmetric-difference
// mass equals the uncovered remainder and is <= the declared budget.
struct RectCover {
    std::size_t label = 0;
    double delta = 0.0;
    double residual_mass = 0.0;
    // rect -> axis -> ascending letter indices
    std::vector<std::vector<std::vector<std::size_t>>> rects;
};

namespace detail {

inline std::vector<std::size_t> mask_to_indices(std::uint64_t mask) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; mask; ++i, mask >>= 1)
        if (mask & 1) out.push_back(i);
    return out;
}

}  // namespace detail

// Greedy extraction of the largest-mass product rectangle contained in the
// uncovered remainder, repeated until the remainder mass drops to delta. The
// maximum is exact: all subsets of the first n-1 axes are enumerated and the
// last axis is completed maximally. Ties keep the first candidate in
// ascending per-axis mask order.
inline RectCover rect_cover(const GriddedCodeCell& cell, const PMF& mu, double delta) {
    if (delta < 0.0) throw BudgetInfeasible("rect_cover: delta must be >= 0");
    const std::size_t n = cell.n, g = cell.letters;
    std::size_t grid = 1;
    for (std::size_t t = 0; t < n; ++t) grid *= g;
    if (mu.size() != grid) throw OutOfRange("rect_cover: mu does not match the grid");
    if (g > 62) throw SizeExceeded("rect_cover: letter alphabet too large for masks");
    double combos = 1.0;
    for (std::size_t t = 0; t + 1 < n; ++t) combos *= static_cast<double>((1ULL << g) - 1);
    if (combos > 1e6) throw SizeExceeded("rect_cover: subset enumeration too large");

    std::vector<char> remainder(grid, 0);
    double remaining = 0.0;
    for (std::size_t p : cell.members) {
        remainder[p] = 1;
        remaining += mu[p];
    }

    // Strides for big-endian flat indexing.
    std::vector<std::size_t> stride(n, 1);
    for (std::size_t i = n; i-- > 1;) stride[i - 1] = stride[i] * g;

    RectCover cover{cell.label, delta, remaining, {}};
    if (n == 0) return cover;

    const std::uint64_t full = (1ULL << g) - 1;
    while (cover.residual_mass > delta) {
        // Search for the heaviest rectangle inside the remainder.
        double best_mass = -1.0;
        std::vector<std::vector<std::size_t>> best_axes;
        std::vector<std::vector<std::size_t>> axis_sets(n);

        std::function<void(std::size_t)> scan = [&](std::size_t axis) {
            if (axis + 1 == n) {
                // Complete the last axis maximally: letters whose fiber lies
                // entirely in the remainder across the chosen prefix tuples.
                std::vector<std::size_t> last;
                double mass = 0.0;
                for (std::size_t j = 0; j < g; ++j) {
                    bool admissible = true;
                    double col = 0.0;
                    std::function<void(std::size_t, std::size_t)> walk = [&](std::size_t ax,
                                                                             std::size_t base) {
                        if (!admissible) return;
                        if (ax + 1 == n) {
                            const std::size_t flat = base + j * stride[n - 1];
                            if (!remainder[flat]) {
                                admissible = false;
                                return;
                            }
                            col += mu[flat];
                            return;
                        }
                        for (std::size_t v : axis_sets[ax]) walk(ax + 1, base + v * stride[ax]);
                    };
                    walk(0, 0);
                    if (admissible) {
                        last.push_back(j);
                        mass += col;
                    }
                }
                if (!last.empty() && mass > best_mass) {
                    best_mass = mass;
                    best_axes = axis_sets;
                    best_axes[n - 1] = last;
                }
                return;
            }
            for (std::uint64_t m = 1; m <= full; ++m) {
                axis_sets[axis] = detail::mask_to_indices(m);
                scan(axis + 1);
            }
        };
        scan(0);

        if (best_mass <= 0.0) break;  // only zero-mass points left uncovered
        // Remove the rectangle from the remainder.
        std::function<void(std::size_t, std::size_t)> clear = [&](std::size_t ax,
                                                                  std::size_t base) {
            if (ax == n) {
                remainder[base] = 0;
                return;
            }
            for (std::size_t v : best_axes[ax]) clear(ax + 1, base + v * stride[ax]);
        };
        clear(0, 0);
        cover.residual_mass = std::max(0.0, cover.residual_mass - best_mass);
        cover.rects.push_back(std::move(best_axes));
    }
    return cover;
}

// Per-letter quantizer refining every axis set referenced by any cover, plus
// the composite map g back to the labels, constant m0 off the covered region.
struct LetterPartition {
    std::size_t n = 1;
    std::size_t letters = 1;
    std::size_t m_size = 1;
    std::size_t m0 = 0;
    std::size_t block_count = 0;
    std::vector<std::size_t> block_of_letter;  // f_x, size letters
    std::vector<std::size_t> g;                // size block_count^n, big-endian

    std::size_t apply(std::size_t grid_point) const {
        std::size_t compact = 0, rem = grid_point;
        std::vector<std::size_t> word(n);
        for (std::size_t t = n; t-- > 0;) {
            word[t] = rem % letters;
            rem /= letters;
        }
        for (std::size_t t = 0; t < n; ++t) compact = compact * block_count + block_of_letter[word[t]];
        return g[compact];
    }
};

inline LetterPartition letter_partition(const std::vector<RectCover>& covers, std::size_t n,
                                        std::size_t letters, std::size_t m_size) {
    // Signature of a letter: membership across every referenced axis set.
    std::vector<std::vector<char>> signature(letters);
    for (const auto& cover : covers)
        for (const auto& rect : cover.rects)
            for (std::size_t ax = 0; ax < n; ++ax) {
                std::vector<char> in(letters, 0);
                for (std::size_t v : rect[ax]) in[v] = 1;
                for (std::size_t l = 0; l < letters; ++l) signature[l].push_back(in[l]);
            }

    LetterPartition lp;
    lp.n = n;
    lp.letters = letters;
    lp.m_size = m_size;
    lp.m0 = 0;
    lp.block_of_letter.assign(letters, 0);
    std::map<std::vector<char>, std::size_t> seen;
    for (std::size_t l = 0; l < letters; ++l) {
        auto [it, fresh] = seen.try_emplace(signature[l], seen.size());
        lp.block_of_letter[l] = it->second;
    }
    lp.block_count = seen.size();

    // Representative letter per block (smallest member).
    std::vector<std::size_t> rep(lp.block_count, letters);
    for (std::size_t l = letters; l-- > 0;) rep[lp.block_of_letter[l]] = l;

    std::size_t tuples = 1;
    for (std::size_t t = 0; t < n; ++t) tuples *= lp.block_count;
    lp.g.assign(tuples, lp.m0);
    std::vector<std::size_t> word(n);
    for (std::size_t idx = 0; idx < tuples; ++idx) {
        std::size_t rem = idx;
        for (std::size_t t = n; t-- > 0;) {
            word[t] = rep[rem % lp.block_count];
            rem /= lp.block_count;
        }
        // Inner covers are disjoint, so at most one cover can contain the tuple.
        for (const auto& cover : covers) {
            bool inside = false;
            for (const auto& rect : cover.rects) {
                bool in_rect = true;
                for (std::size_t ax = 0; ax < n && in_rect; ++ax)
                    in_rect = std::binary_search(rect[ax].begin(), rect[ax].end(), word[ax]);
                if (in_rect) {
                    inside = true;
                    break;
                }
            }
            if (inside) {
                lp.g[idx] = cover.label;
                break;
            }
        }
    }
    return lp;
}

// Exact L-inf gap between the laws of (Y^n, f(X^n)) and (Y^n, g(f_x^n(X^n)))
// against the |M|^2 delta budget, plus the looser marginal consequence.
struct GapReport {
    double delta = 0.0;
    std::size_t m_size = 0, n = 1;
    double d_pair = 0.0;      // d(mu_{y^n f}, mu_{y^n g})
    double d_marginal = 0.0;  // d(mu_f, mu_g)
    double bound_pair = 0.0;      // |M|^2 delta
    double bound_marginal = 0.0;  // |Y|^n |M|^2 delta

    bool ok(double tol = 1e-9) const {
        return d_pair <= bound_pair + tol && d_marginal <= bound_marginal + tol;
    }
};

inline GapReport verify_distribution_gap(const JointPMF& j, const GriddedCode& code,
                                         const LetterPartition& lp, double delta,
                                         const std::string& x_axis = "x",
                                         const std::string& y_axis = "y") {
    JointPMF jn = product_extension(j.marginal(std::vector<std::string>{y_axis, x_axis}), code.n);
    const std::size_t nyn = jn.axis(0).size, nxn = jn.axis(1).size;
    if (nxn != code.grid_size())
        throw OutOfRange("verify_distribution_gap: source grid does not match code");

    std::vector<double> pf(nyn * code.m_size, 0.0), pg(nyn * code.m_size, 0.0);
    for (std::size_t x = 0; x < nxn; ++x) {
        const std::size_t mf = code.labels[x];
        const std::size_t mg = lp.apply(x);
        for (std::size_t y = 0; y < nyn; ++y) {
            pf[y * code.m_size + mf] += jn.table()[y * nxn + x];
            pg[y * code.m_size + mg] += jn.table()[y * nxn + x];
        }
    }

    GapReport r;
    r.delta = delta;
    r.m_size = code.m_size;
    r.n = code.n;
    r.d_pair = linf_distance(std::span<const double>(pf), std::span<const double>(pg));
    std::vector<double> mf(code.m_size, 0.0), mg(code.m_size, 0.0);
    for (std::size_t y = 0; y < nyn; ++y)
        for (std::size_t m = 0; m < code.m_size; ++m) {
            mf[m] += pf[y * code.m_size + m];
            mg[m] += pg[y * code.m_size + m];
        }
    r.d_marginal = linf_distance(std::span<const double>(mf), std::span<const double>(mg));
    const double msz = static_cast<double>(code.m_size);
    r.bound_pair = msz * msz * delta;
    r.bound_marginal = static_cast<double>(nyn) * msz * msz * delta;
    return r;
}

// Largest dyadic delta = 2^-k <= 1/2 with both
//   -(2/n) |Y|^n |M|^3 delta ln(|M|^2 delta) <= eps
//   |Y|^n |M|^2 delta <= 1/2   (side condition of the derivation)
inline double delta_for_epsilon_converse(double eps, std::size_t n, std::size_t y_size,
                                         std::size_t m_size) {
    if (!(eps > 0.0)) throw OutOfRange("delta_for_epsilon_converse: eps must be positive");
    double yn = 1.0;
    for (std::size_t t = 0; t < n; ++t) yn *= static_cast<double>(y_size);
    const double m = static_cast<double>(m_size);
    for (int k = 1; k <= 60; ++k) {
        const double delta = std::ldexp(1.0, -k);
        if (delta < 1e-15) break;
        if (yn * m * m * delta > 0.5) continue;
        const double need =
            -(2.0 / static_cast<double>(n)) * yn * m * m * m * delta * std::log(m * m * delta);
        if (need <= eps) return delta;
    }
    throw EpsTooSmall("delta_for_epsilon_converse: required delta underflows 1e-15");
}

}  // namespace ib
