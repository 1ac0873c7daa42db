#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "ib/common.hpp"
#include "ib/grid_source.hpp"
#include "ib/joint.hpp"
#include "ib/pmf.hpp"

namespace ib {

// Jointly Gaussian scalar pair with correlation rho, unit marginals, and a
// symmetric discretization range of +-range_sigmas standard deviations.
struct GaussianPair {
    double rho = 0.0;
    double range_sigmas = 6.0;

    explicit GaussianPair(double correlation, double range = 6.0)
        : rho(correlation), range_sigmas(range) {
        if (!(std::abs(rho) < 1.0)) throw OutOfRange("GaussianPair: |rho| must be < 1");
        if (!(range > 0.0)) throw OutOfRange("GaussianPair: range must be positive");
    }

    double mutual_information() const { return -0.5 * std::log1p(-rho * rho); }
};

namespace detail {

inline double std_normal_cdf(double z) { return 0.5 * std::erfc(-z * 0.70710678118654752440); }

inline double std_normal_pdf(double z) {
    return 0.3989422804014327 * std::exp(-0.5 * z * z);
}

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
struct GaussLegendre {
    std::vector<double> nodes, weights;

    explicit GaussLegendre(std::size_t n) : nodes(n), weights(n) {
        for (std::size_t i = 0; i < n; ++i) {
            double x = std::cos(3.14159265358979323846 * (static_cast<double>(i) + 0.75) /
                                (static_cast<double>(n) + 0.5));
            double dp = 0.0;
            for (int step = 0; step < 100; ++step) {
                double p0 = 1.0, p1 = x;
                for (std::size_t k = 2; k <= n; ++k) {
                    double pk = ((2.0 * static_cast<double>(k) - 1.0) * x * p1 -
                                 (static_cast<double>(k) - 1.0) * p0) /
                                static_cast<double>(k);
                    p0 = p1;
                    p1 = pk;
                }
                dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
                double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-15) break;
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
    }
};

// integral over [a,b] of pdf(x) * f(x) dx with fixed-order Gauss-Legendre.
template <typename F>
double integrate_cell(const GaussLegendre& gl, double a, double b, F&& f) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double acc = 0.0;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        const double x = mid + half * gl.nodes[i];
        acc += gl.weights[i] * std_normal_pdf(x) * f(x);
    }
    return acc * half;
}

// Cell edges over [-c, c]; the first and last are pushed to +-10 sigma so the
// folded tail mass (< 1e-22) stays inside the edge cells.
inline std::vector<double> cell_edges(double c, std::size_t cells) {
    std::vector<double> e(cells + 1);
    for (std::size_t i = 0; i <= cells; ++i)
        e[i] = -c + 2.0 * c * static_cast<double>(i) / static_cast<double>(cells);
    e.front() = -10.0;
    e.back() = 10.0;
    return e;
}

}  // namespace detail

// Dense joint over (y, x) from the bivariate normal law, cell probabilities
// integrated per grid box with the tails folded into the edge cells. The
// table is explicitly renormalized to absorb quadrature residue (~1e-14).
inline JointPMF discretize(const GaussianPair& gp, std::size_t x_cells, std::size_t y_cells) {
    if (x_cells < 2 || y_cells < 2) throw OutOfRange("discretize: cell counts must be >= 2");
    if (x_cells > kMaxTableCells / y_cells) throw SizeExceeded("discretize: table too large");
    const double s = std::sqrt(1.0 - gp.rho * gp.rho);
    const detail::GaussLegendre gl(16);
    const auto xe = detail::cell_edges(gp.range_sigmas, x_cells);
    const auto ye = detail::cell_edges(gp.range_sigmas, y_cells);

    std::vector<double> t(y_cells * x_cells, 0.0);
    for (std::size_t i = 0; i < x_cells; ++i) {
        for (std::size_t jy = 0; jy < y_cells; ++jy) {
            const double lo = ye[jy], hi = ye[jy + 1];
            const bool first = jy == 0, last = jy + 1 == y_cells;
            const double mass = detail::integrate_cell(gl, xe[i], xe[i + 1], [&](double x) {
                const double m = gp.rho * x;
                const double chi = last ? 1.0 : detail::std_normal_cdf((hi - m) / s);
                const double clo = first ? 0.0 : detail::std_normal_cdf((lo - m) / s);
                return chi - clo;
            });
            t[jy * x_cells + i] = std::max(mass, 0.0);
        }
    }
    return JointPMF::normalized({{"y", y_cells}, {"x", x_cells}}, std::move(t));
}

// Grid-source variant with the relevance variable collapsed to the sign of y.
// The bottleneck channel starts out as the trivial single-symbol kernel;
// attach a real one with with_u_channel.
inline GridSource discretize_binary_y(const GaussianPair& gp, std::size_t x_cells) {
    if (x_cells < 2) throw OutOfRange("discretize_binary_y: cell count must be >= 2");
    const double s = std::sqrt(1.0 - gp.rho * gp.rho);
    const detail::GaussLegendre gl(16);
    const auto xe = detail::cell_edges(gp.range_sigmas, x_cells);

    std::vector<double> w(x_cells), pos_mass(x_cells);
    for (std::size_t i = 0; i < x_cells; ++i) {
        w[i] = detail::integrate_cell(gl, xe[i], xe[i + 1], [](double) { return 1.0; });
        pos_mass[i] = detail::integrate_cell(gl, xe[i], xe[i + 1], [&](double x) {
            return detail::std_normal_cdf(gp.rho * x / s);
        });
    }
    std::vector<std::string> ids(x_cells);
    std::vector<double> y_rows(x_cells * 2), u_rows(x_cells, 1.0);
    for (std::size_t i = 0; i < x_cells; ++i) {
        ids[i] = "c" + std::to_string(i);
        const double q = w[i] > 0.0 ? std::min(1.0, pos_mass[i] / w[i]) : 0.5;
        y_rows[i * 2] = 1.0 - q;
        y_rows[i * 2 + 1] = q;
    }
    double total = stable_sum(w.begin(), w.end());
    for (auto& v : w) v /= total;
    return GridSource(std::move(ids), PMF(std::move(w)), Kernel(x_cells, 2, std::move(y_rows)),
                      Kernel(x_cells, 1, std::move(u_rows)));
}

// Closed-form trade-off value for the Gaussian pair, used as an independent
// cross-check oracle for the numerical solver: 1/2 ln(1/(1 - rho^2(1-e^-2R))).
inline double analytic_ib_curve(double rho, double rate) {
    if (!(rate >= 0.0)) throw OutOfRange("analytic_ib_curve: rate must be >= 0");
    const double r2 = rho * rho;
    return -0.5 * std::log1p(-r2 * (1.0 - std::exp(-2.0 * rate)));
}

}  // namespace ib
