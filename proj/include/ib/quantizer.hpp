#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ib/common.hpp"
#include "ib/grid_source.hpp"
#include "ib/joint.hpp"
#include "ib/measures.hpp"
#include "ib/pmf.hpp"

namespace ib {

// Axis-aligned hypercube partition of [0,1]^u_size with side delta, cells
// addressed lazily by grid coordinate; only occupied cells materialize. Every
// cell has L-inf diameter <= delta, so member distributions of one cell are
// within delta of its representative.
class SimplexPartition {
  public:
    using Coords = std::vector<std::uint32_t>;

    struct CellRecord {
        std::size_t first_member = 0;  // scan-order index of the first insert
        std::size_t population = 0;
    };

    SimplexPartition(std::size_t u_size, double delta) : u_size_(u_size), delta_(delta) {
        if (u_size_ < 1) throw OutOfRange("SimplexPartition: u_size must be >= 1");
        if (!(delta > 0.0) || delta > 0.5)
            throw OutOfRange("SimplexPartition: delta must lie in (0, 1/2]");
        per_axis_ = static_cast<std::size_t>(std::ceil(1.0 / delta));
        double address_space = 1.0;
        for (std::size_t k = 0; k < u_size_; ++k) address_space *= static_cast<double>(per_axis_);
        if (address_space > 1e8)
            throw SizeExceeded("SimplexPartition: address space exceeds 1e8 cells");
    }

    std::size_t u_size() const { return u_size_; }
    double delta() const { return delta_; }
    std::size_t cells_per_axis() const { return per_axis_; }

    Coords locate(std::span<const double> dist) const {
        if (dist.size() != u_size_) throw OutOfRange("SimplexPartition: dimension mismatch");
        Coords c(u_size_);
        for (std::size_t k = 0; k < u_size_; ++k) {
            auto idx = static_cast<std::size_t>(std::floor(dist[k] / delta_));
            c[k] = static_cast<std::uint32_t>(std::min(idx, per_axis_ - 1));
        }
        return c;
    }

    // Register one conditional row; returns its cell coordinate.
    Coords insert(std::span<const double> dist, std::size_t member_index) {
        Coords c = locate(dist);
        auto [it, fresh] = occupied_.try_emplace(c, CellRecord{member_index, 0});
        it->second.population++;
        return c;
    }

    const std::map<Coords, CellRecord>& occupied() const { return occupied_; }
    std::size_t occupied_count() const { return occupied_.size(); }

    // Representative of a cell: the renormalized cell center when that stays
    // inside the cell, otherwise the supplied fallback member (deterministic
    // scan-order tie-break near the simplex boundary).
    std::vector<double> representative(const Coords& coords,
                                       std::span<const double> fallback_member) const {
        std::vector<double> center(u_size_);
        double total = 0.0;
        for (std::size_t k = 0; k < u_size_; ++k) {
            center[k] = std::min((static_cast<double>(coords[k]) + 0.5) * delta_, 1.0);
            total += center[k];
        }
        for (auto& v : center) v /= total;
        if (locate(center) == coords) return center;
        return {fallback_member.begin(), fallback_member.end()};
    }

  private:
    std::size_t u_size_;
    double delta_;
    std::size_t per_axis_;
    std::map<Coords, CellRecord> occupied_;
};

inline SimplexPartition partition_simplex(std::size_t u_size, double delta) {
    return SimplexPartition(u_size, delta);
}

// Result of quantizing a grid source through a simplex partition of its
// bottleneck rows: x-hat aggregates the cells whose kappa_{u|x} rows share a
// partition cell, and the surrogate u-tilde is distributed exactly as the
// cell representative given x-hat.
struct QuantizedSource {
    double delta = 0.0;
    SimplexPartition partition;                          // populated registry
    std::vector<SimplexPartition::Coords> x_hat_alphabet;  // lexicographic
    std::vector<std::vector<double>> representatives;    // nu_i per x-hat symbol
    std::vector<std::size_t> g_map;                      // source cell -> x-hat ordinal
    JointPMF joint;                                      // (y, xhat, utilde)
};

inline QuantizedSource quantize_source(const GridSource& src, const SimplexPartition& part) {
    if (part.u_size() != src.u_channel.output_size())
        throw OutOfRange("quantize_source: partition dimension != |U|");
    SimplexPartition reg(part.u_size(), part.delta());
    const std::size_t nc = src.cell_count();
    const std::size_t ny = src.y_channel.output_size(), nu = src.u_channel.output_size();

    // Scan in cell order; zero-weight cells do not occupy partition cells.
    std::vector<SimplexPartition::Coords> cell_coords(nc);
    for (std::size_t c = 0; c < nc; ++c) {
        if (src.weights[c] == 0.0) continue;
        cell_coords[c] = reg.insert(src.u_channel.row_span(c), c);
    }

    std::vector<SimplexPartition::Coords> alphabet;
    std::vector<std::vector<double>> reps;
    std::map<SimplexPartition::Coords, std::size_t> ordinal;
    for (const auto& [coords, rec] : reg.occupied()) {
        ordinal.emplace(coords, alphabet.size());
        alphabet.push_back(coords);
        reps.push_back(reg.representative(coords, src.u_channel.row_span(rec.first_member)));
    }

    const std::size_t nxh = alphabet.size();
    std::vector<std::size_t> g_map(nc, 0);
    std::vector<double> y_rows(nxh * ny, 0.0);  // w_hat[i] * p(y | xhat=i)
    for (std::size_t c = 0; c < nc; ++c) {
        if (src.weights[c] == 0.0) continue;
        const std::size_t i = ordinal.at(cell_coords[c]);
        g_map[c] = i;
        for (std::size_t y = 0; y < ny; ++y)
            y_rows[i * ny + y] += src.weights[c] * src.y_channel(c, y);
    }

    std::vector<double> table(ny * nxh * nu, 0.0);
    for (std::size_t i = 0; i < nxh; ++i) {
        for (std::size_t y = 0; y < ny; ++y) {
            const double m = y_rows[i * ny + y];
            for (std::size_t u = 0; u < nu; ++u) table[(y * nxh + i) * nu + u] = m * reps[i][u];
        }
    }
    return QuantizedSource{part.delta(),
                           std::move(reg),
                           std::move(alphabet),
                           std::move(reps),
                           std::move(g_map),
                           JointPMF({{"y", ny}, {"xhat", nxh}, {"utilde", nu}}, std::move(table))};
}

// The two information-loss inequalities of the simplex-quantization argument
// plus the marginal and pairwise closeness they rest on. Slacks must come out
// >= -1e-9 whenever the construction is sound.
struct QuantizationReport {
    double delta = 0.0;
    std::size_t occupied_cells = 0;
    double i_xu = 0.0, i_yu = 0.0, i_xy = 0.0;                      // grid joint
    double i_xhat_utilde = 0.0, i_y_utilde = 0.0, i_y_xhat = 0.0;   // quantized joint
    double d_u = 0.0, d_yu = 0.0;
    double rate_bound_term = 0.0;   // 2 delta |U| ln delta (negative)
    double score_bound_term = 0.0;  // 2 delta |Y||U| ln delta (negative)
    double rate_slack = 0.0;        // i_xu - i_xhat_utilde - rate_bound_term
    double score_slack = 0.0;       // i_y_utilde - score_bound_term - i_yu

    bool ok(double tol = 1e-9) const {
        return d_u <= delta + tol && d_yu <= delta + tol && rate_slack >= -tol &&
               score_slack >= -tol;
    }
};

inline QuantizationReport verify_quantization_bounds(const GridSource& src,
                                                     const QuantizedSource& q, double delta) {
    if (std::abs(delta - q.delta) > 0.0)
        throw OutOfRange("verify_quantization_bounds: delta does not match quantization");
    QuantizationReport r;
    r.delta = delta;
    r.occupied_cells = q.x_hat_alphabet.size();

    JointPMF grid = src.to_joint();  // (y, x, u)
    r.i_xu = mutual_information(grid, "x", "u");
    r.i_yu = mutual_information(grid, "y", "u");
    r.i_xy = mutual_information(grid, "y", "x");
    r.i_xhat_utilde = mutual_information(q.joint, "xhat", "utilde");
    r.i_y_utilde = mutual_information(q.joint, "y", "utilde");
    r.i_y_xhat = mutual_information(q.joint, "y", "xhat");

    PMF mu_u = grid.marginal_pmf("u");
    PMF mu_ut = q.joint.marginal_pmf("utilde");
    r.d_u = linf_distance(mu_u, mu_ut);
    JointPMF yu = grid.marginal(std::vector<std::string>{"y", "u"});
    JointPMF yut = q.joint.marginal(std::vector<std::string>{"y", "utilde"});
    r.d_yu = linf_distance(std::span<const double>(yu.table()),
                           std::span<const double>(yut.table()));

    const double nu = static_cast<double>(src.u_channel.output_size());
    const double nys = static_cast<double>(src.y_channel.output_size());
    r.rate_bound_term = 2.0 * delta * nu * std::log(delta);
    r.score_bound_term = 2.0 * delta * nys * nu * std::log(delta);
    r.rate_slack = r.i_xu - r.i_xhat_utilde - r.rate_bound_term;
    r.score_slack = r.i_y_utilde - r.score_bound_term - r.i_yu;
    return r;
}

// Largest dyadic delta = 2^-k <= 1/2 with
//   -2 delta |Y||U| ln(delta) + delta <= eps;
// the bound is monotone below 1/e, so the first satisfying k is the answer.
inline double delta_for_epsilon(double eps, std::size_t y_size, std::size_t u_size) {
    if (!(eps > 0.0)) throw OutOfRange("delta_for_epsilon: eps must be positive");
    const double card = static_cast<double>(y_size) * static_cast<double>(u_size);
    for (int k = 1; k <= 60; ++k) {
        const double delta = std::ldexp(1.0, -k);
        if (delta < 1e-15) break;
        const double need = -2.0 * delta * card * std::log(delta) + delta;
        if (need <= eps) return delta;
    }
    throw EpsTooSmall("delta_for_epsilon: required delta underflows 1e-15");
}

}  // namespace ib
