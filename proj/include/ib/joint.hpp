#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "ib/common.hpp"
#include "ib/pmf.hpp"

namespace ib {

struct Axis {
    std::string name;
    std::size_t size = 0;

    bool operator==(const Axis& other) const = default;
};

// Dense joint distribution over a tuple of named finite alphabets, stored as
// a row-major probability tensor. Immutable after construction.
class JointPMF {
  public:
    JointPMF(std::vector<Axis> axes, std::vector<double> table)
        : axes_(std::move(axes)), table_(std::move(table)) {
        std::size_t cells = 1;
        for (const auto& a : axes_) {
            if (a.size == 0) throw InvalidDistribution("JointPMF: empty axis " + a.name);
            cells *= a.size;
        }
        if (axes_.empty() || table_.size() != cells)
            throw InvalidDistribution("JointPMF: table size mismatch");
        for (double v : table_) {
            if (!(v >= 0.0) || std::isnan(v))
                throw InvalidDistribution("JointPMF: negative or NaN entry");
        }
        double total = stable_sum(table_.begin(), table_.end());
        if (std::abs(total - 1.0) > kMassTol)
            throw InvalidDistribution("JointPMF: total mass " + std::to_string(total));
        init_strides();
    }

    // Two-axis convenience: table[a][b] laid out with axis `a` first.
    static JointPMF from_matrix(const Axis& a, const Axis& b,
                                const std::vector<std::vector<double>>& rows) {
        std::vector<double> flat;
        flat.reserve(a.size * b.size);
        for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
        return JointPMF({a, b}, std::move(flat));
    }

    // Explicit renormalization for tables with accumulated rounding.
    static JointPMF normalized(std::vector<Axis> axes, std::vector<double> table) {
        double total = std::accumulate(table.begin(), table.end(), 0.0);
        if (!(total > 0.0)) throw InvalidDistribution("JointPMF::normalized: zero mass");
        for (auto& v : table) v /= total;
        return JointPMF(std::move(axes), std::move(table));
    }

    std::size_t rank() const { return axes_.size(); }
    const std::vector<Axis>& axes() const { return axes_; }
    const Axis& axis(std::size_t i) const { return axes_[i]; }
    const std::vector<double>& table() const { return table_; }
    std::size_t cells() const { return table_.size(); }
    std::size_t stride(std::size_t axis) const { return strides_[axis]; }

    std::size_t axis_index(const std::string& name) const {
        for (std::size_t i = 0; i < axes_.size(); ++i)
            if (axes_[i].name == name) return i;
        throw OutOfRange("JointPMF: no axis named " + name);
    }

    double at(std::span<const std::size_t> idx) const {
        std::size_t flat = 0;
        for (std::size_t i = 0; i < axes_.size(); ++i) flat += idx[i] * strides_[i];
        return table_[flat];
    }

    // Marginal joint over the listed axes, in the listed order.
    JointPMF marginal(const std::vector<std::size_t>& keep) const {
        std::vector<Axis> out_axes;
        std::size_t out_cells = 1;
        for (std::size_t k : keep) {
            out_axes.push_back(axes_.at(k));
            out_cells *= axes_.at(k).size;
        }
        std::vector<double> out(out_cells, 0.0);
        std::vector<std::size_t> idx(axes_.size(), 0);
        for (std::size_t flat = 0; flat < table_.size(); ++flat) {
            std::size_t rem = flat, pos = 0;
            for (std::size_t i = 0; i < axes_.size(); ++i) {
                idx[i] = rem / strides_[i];
                rem %= strides_[i];
            }
            for (std::size_t k : keep) pos = pos * axes_[k].size + idx[k];
            out[pos] += table_[flat];
        }
        // Re-validate through the normal constructor; mass is preserved exactly
        // up to summation order, well within kMassTol.
        return JointPMF(std::move(out_axes), std::move(out));
    }

    JointPMF marginal(const std::vector<std::string>& names) const {
        std::vector<std::size_t> keep;
        keep.reserve(names.size());
        for (const auto& n : names) keep.push_back(axis_index(n));
        return marginal(keep);
    }

    PMF marginal_pmf(std::size_t axis) const {
        return PMF(marginal(std::vector<std::size_t>{axis}).table());
    }

    PMF marginal_pmf(const std::string& name) const { return marginal_pmf(axis_index(name)); }

    // Conditional kernel target|given after marginalizing everything else.
    // Zero-mass conditioning symbols get a uniform row.
    Kernel conditional(std::size_t given, std::size_t target) const {
        JointPMF pair = marginal(std::vector<std::size_t>{given, target});
        std::size_t g = pair.axis(0).size, t = pair.axis(1).size;
        std::vector<double> rows(g * t, 0.0);
        for (std::size_t i = 0; i < g; ++i) {
            double mass = 0.0;
            for (std::size_t j = 0; j < t; ++j) mass += pair.table()[i * t + j];
            for (std::size_t j = 0; j < t; ++j)
                rows[i * t + j] = mass > 0.0 ? pair.table()[i * t + j] / mass
                                             : 1.0 / static_cast<double>(t);
        }
        return Kernel(g, t, std::move(rows));
    }

    Kernel conditional(const std::string& given, const std::string& target) const {
        return conditional(axis_index(given), axis_index(target));
    }

    // Append one axis distributed per `k` conditioned on the symbol of
    // `on_axis`: result(..., u) = this(...) * k(u | value at on_axis).
    JointPMF compose(const Kernel& k, std::size_t on_axis, const std::string& new_name) const {
        if (k.input_size() != axes_.at(on_axis).size)
            throw OutOfRange("compose: kernel input does not match axis size");
        std::size_t u = k.output_size();
        if (table_.size() > kMaxTableCells / u)
            throw SizeExceeded("compose: table would exceed dense guard");
        std::vector<Axis> out_axes = axes_;
        out_axes.push_back({new_name, u});
        std::vector<double> out(table_.size() * u);
        for (std::size_t flat = 0; flat < table_.size(); ++flat) {
            std::size_t sym = (flat / strides_[on_axis]) % axes_[on_axis].size;
            auto krow = k.row_span(sym);
            for (std::size_t j = 0; j < u; ++j) out[flat * u + j] = table_[flat] * krow[j];
        }
        return JointPMF(std::move(out_axes), std::move(out));
    }

    JointPMF compose(const Kernel& k, const std::string& on_axis,
                     const std::string& new_name) const {
        return compose(k, axis_index(on_axis), new_name);
    }

    JointPMF permuted(const std::vector<std::size_t>& order) const {
        std::vector<Axis> out_axes;
        for (std::size_t k : order) out_axes.push_back(axes_.at(k));
        std::size_t n_axes = axes_.size();
        std::vector<std::size_t> idx(n_axes, 0);
        std::vector<double> out(table_.size(), 0.0);
        for (std::size_t flat = 0; flat < table_.size(); ++flat) {
            std::size_t rem = flat;
            for (std::size_t i = 0; i < n_axes; ++i) {
                idx[i] = rem / strides_[i];
                rem %= strides_[i];
            }
            std::size_t pos = 0;
            for (std::size_t k : order) pos = pos * axes_[k].size + idx[k];
            out[pos] = table_[flat];
        }
        return JointPMF(std::move(out_axes), std::move(out));
    }

    bool operator==(const JointPMF& other) const {
        return axes_ == other.axes_ && table_ == other.table_;
    }

  private:
    void init_strides() {
        strides_.assign(axes_.size(), 1);
        for (std::size_t i = axes_.size(); i-- > 1;)
            strides_[i - 1] = strides_[i] * axes_[i].size;
    }

    std::vector<Axis> axes_;
    std::vector<double> table_;
    std::vector<std::size_t> strides_;
};

// Composite-symbol index of an n-letter word over an alphabet of size `s`,
// first letter most significant. The inverse of word_of_index.
inline std::size_t index_of_word(std::span<const std::size_t> word, std::size_t s) {
    std::size_t idx = 0;
    for (std::size_t c : word) idx = idx * s + c;
    return idx;
}

inline std::vector<std::size_t> word_of_index(std::size_t idx, std::size_t s, std::size_t n) {
    std::vector<std::size_t> word(n);
    for (std::size_t t = n; t-- > 0;) {
        word[t] = idx % s;
        idx /= s;
    }
    return word;
}

// n-fold i.i.d. extension: each axis A of size s becomes axis "A^n" of size
// s^n, and the mass of a tuple of words is the product over letter positions
// of the source mass. Guarded by the dense-table limit.
inline JointPMF product_extension(const JointPMF& j, std::size_t n) {
    if (n == 0) throw OutOfRange("product_extension: n must be >= 1");
    if (n == 1) return j;
    std::size_t out_cells = 1;
    std::vector<Axis> out_axes;
    for (const auto& a : j.axes()) {
        std::size_t powered = 1;
        for (std::size_t t = 0; t < n; ++t) {
            if (powered > kMaxTableCells / a.size)
                throw SizeExceeded("product_extension: axis " + a.name + " too large");
            powered *= a.size;
        }
        if (out_cells > kMaxTableCells / powered)
            throw SizeExceeded("product_extension: table exceeds dense guard");
        out_cells *= powered;
        out_axes.push_back({a.name + "^" + std::to_string(n), powered});
    }

    std::size_t k = j.rank();
    std::vector<double> out(out_cells);
    std::vector<std::size_t> composite(k), letter(k);
    for (std::size_t flat = 0; flat < out_cells; ++flat) {
        std::size_t rem = flat;
        for (std::size_t i = k; i-- > 0;) {
            composite[i] = rem % out_axes[i].size;
            rem /= out_axes[i].size;
        }
        double mass = 1.0;
        for (std::size_t t = 0; t < n && mass > 0.0; ++t) {
            // Letter t of every axis word; digits taken most significant first.
            std::size_t src_flat = 0;
            for (std::size_t i = 0; i < k; ++i) {
                std::size_t s = j.axis(i).size;
                std::size_t div = 1;
                for (std::size_t q = t + 1; q < n; ++q) div *= s;
                letter[i] = (composite[i] / div) % s;
                src_flat += letter[i] * j.stride(i);
            }
            mass *= j.table()[src_flat];
        }
        out[flat] = mass;
    }
    return JointPMF(std::move(out_axes), std::move(out));
}

}  // namespace ib
