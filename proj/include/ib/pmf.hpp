#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "ib/common.hpp"

namespace ib {

// Probability mass function over a finite alphabet. Immutable after
// construction; the constructor rejects negative entries and total mass
// off by more than kMassTol. Renormalization is an explicit operation,
// never applied silently.
class PMF {
  public:
    explicit PMF(std::vector<double> weights) : w_(std::move(weights)) {
        validate();
    }

    static PMF uniform(std::size_t n) {
        return PMF(std::vector<double>(n, 1.0 / static_cast<double>(n)));
    }

    static PMF point_mass(std::size_t n, std::size_t at) {
        std::vector<double> w(n, 0.0);
        w.at(at) = 1.0;
        return PMF(std::move(w));
    }

    // Explicit renormalization helper for tables that accumulated rounding
    // (e.g. product extensions, quadrature output).
    static PMF normalized(std::vector<double> weights) {
        double total = std::accumulate(weights.begin(), weights.end(), 0.0);
        if (!(total > 0.0))
            throw InvalidDistribution("normalized: total mass " + std::to_string(total));
        for (auto& v : weights) v /= total;
        return PMF(std::move(weights));
    }

    std::size_t size() const { return w_.size(); }
    double operator[](std::size_t i) const { return w_[i]; }
    const std::vector<double>& weights() const { return w_; }
    auto begin() const { return w_.begin(); }
    auto end() const { return w_.end(); }

    bool operator==(const PMF& other) const { return w_ == other.w_; }

  private:
    void validate() const {
        if (w_.empty()) throw InvalidDistribution("PMF: empty alphabet");
        for (double v : w_) {
            if (!(v >= 0.0) || std::isnan(v))
                throw InvalidDistribution("PMF: negative or NaN entry " + std::to_string(v));
        }
        double total = stable_sum(w_.begin(), w_.end());
        if (std::abs(total - 1.0) > kMassTol)
            throw InvalidDistribution("PMF: total mass " + std::to_string(total));
    }

    std::vector<double> w_;
};

// Row-stochastic conditional distribution table: one PMF per input symbol,
// stored flat row-major.
class Kernel {
  public:
    Kernel() : in_(0), out_(0) {}

    Kernel(std::size_t input_size, std::size_t output_size, std::vector<double> rows)
        : in_(input_size), out_(output_size), rows_(std::move(rows)) {
        if (rows_.size() != in_ * out_)
            throw InvalidDistribution("Kernel: table size mismatch");
        for (std::size_t i = 0; i < in_; ++i) row(i);  // validates each row
    }

    explicit Kernel(const std::vector<std::vector<double>>& rows)
        : in_(rows.size()), out_(rows.empty() ? 0 : rows.front().size()) {
        rows_.reserve(in_ * out_);
        for (const auto& r : rows) {
            if (r.size() != out_) throw InvalidDistribution("Kernel: ragged rows");
            rows_.insert(rows_.end(), r.begin(), r.end());
        }
        for (std::size_t i = 0; i < in_; ++i) row(i);
    }

    static Kernel identity(std::size_t n) {
        std::vector<double> t(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) t[i * n + i] = 1.0;
        return Kernel(n, n, std::move(t));
    }

    std::size_t input_size() const { return in_; }
    std::size_t output_size() const { return out_; }
    double operator()(std::size_t in, std::size_t out) const { return rows_[in * out_ + out]; }
    std::span<const double> row_span(std::size_t in) const {
        return {rows_.data() + in * out_, out_};
    }
    PMF row(std::size_t in) const {
        auto s = row_span(in);
        return PMF(std::vector<double>(s.begin(), s.end()));
    }
    const std::vector<double>& flat() const { return rows_; }

    bool operator==(const Kernel& other) const {
        return in_ == other.in_ && out_ == other.out_ && rows_ == other.rows_;
    }

  private:
    std::size_t in_;
    std::size_t out_;
    std::vector<double> rows_;
};

// L-infinity distance between two distributions on the same alphabet.
inline double linf_distance(const PMF& p, const PMF& q) {
    if (p.size() != q.size()) throw OutOfRange("linf_distance: length mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) d = std::max(d, std::abs(p[i] - q[i]));
    return d;
}

inline double linf_distance(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw OutOfRange("linf_distance: length mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) d = std::max(d, std::abs(p[i] - q[i]));
    return d;
}

}  // namespace ib
