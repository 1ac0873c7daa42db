#pragma once

#include <algorithm>
#include <atomic>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "ib/common.hpp"
#include "ib/joint.hpp"
#include "ib/measures.hpp"
#include "ib/pmf.hpp"
#include "ib/rng.hpp"

namespace ib {

// One solved trade-off point: encoder kappa_{u|x} with its rate I(x;u) and
// score I(y;u), both in nats.
struct IBCurvePoint {
    double beta = 0.0;
    double rate = 0.0;
    double score = 0.0;
    Kernel encoder;
    bool converged = false;
    std::size_t iters = 0;
    std::size_t pruned_symbols = 0;
    double lagrangian = 0.0;  // rate - beta * score at the returned encoder
};

struct IterateOptions {
    double tol = 1e-10;
    std::size_t max_iter = 100000;
    std::string x_axis = "x";
    std::string y_axis = "y";
    // When set, receives the Lagrangian after every iteration (monotone).
    std::vector<double>* lagrangian_trace = nullptr;
};

namespace detail {

// ln with zero mapped to a large negative finite value; keeps the Gibbs
// scores NaN-free while exp() still underflows them to exactly zero mass.
inline double safe_log(double v) {
    return v > 0.0 ? std::log(v) : -1.0e30;
}

struct SourceView {
    std::size_t nx = 0, ny = 0;
    std::vector<double> px;       // p(x)
    std::vector<double> py;       // p(y)
    std::vector<double> cond;     // p(y|x), x-major
    std::vector<double> neg_hyx;  // sum_y c ln c per x
    double ixy = 0.0;

    SourceView(const JointPMF& j, const std::string& x_axis, const std::string& y_axis) {
        std::size_t xi = j.axis_index(x_axis), yi = j.axis_index(y_axis);
        nx = j.axis(xi).size;
        ny = j.axis(yi).size;
        JointPMF xy = j.marginal(std::vector<std::size_t>{xi, yi});
        px = xy.marginal_pmf(0).weights();
        py = xy.marginal_pmf(1).weights();
        ixy = mutual_information(xy, std::vector<std::size_t>{0}, std::vector<std::size_t>{1});
        cond.assign(nx * ny, 0.0);
        for (std::size_t x = 0; x < nx; ++x)
            for (std::size_t y = 0; y < ny; ++y)
                cond[x * ny + y] = px[x] > 0.0 ? xy.table()[x * ny + y] / px[x]
                                               : (y == 0 ? 1.0 : 0.0);
        neg_hyx.assign(nx, 0.0);
        for (std::size_t x = 0; x < nx; ++x)
            for (std::size_t y = 0; y < ny; ++y) neg_hyx[x] += xlogx(cond[x * ny + y]);
    }
};

}  // namespace detail

// Deterministic initialization: close to the identity map when the bottleneck
// alphabet is large enough, otherwise close to x mod u_size.
inline Kernel near_identity_encoder(std::size_t x_size, std::size_t u_size, double mix = 0.05) {
    std::vector<double> rows(x_size * u_size, mix / static_cast<double>(u_size));
    for (std::size_t x = 0; x < x_size; ++x) rows[x * u_size + x % u_size] += 1.0 - mix;
    return Kernel(x_size, u_size, std::move(rows));
}

inline Kernel random_encoder(std::mt19937_64& rng, std::size_t x_size, std::size_t u_size) {
    std::vector<double> rows;
    rows.reserve(x_size * u_size);
    for (std::size_t x = 0; x < x_size; ++x) {
        auto r = random_simplex_point(rng, u_size);
        rows.insert(rows.end(), r.begin(), r.end());
    }
    return Kernel(x_size, u_size, std::move(rows));
}

// Alternating minimization of I(x;u) - beta * I(y;u) over encoders
// kappa_{u|x} at fixed bottleneck size. Fixed point of
//   p(u)    = sum_x p(x) p(u|x)
//   p(y|u)  = sum_x p(y|x) p(x|u)
//   p(u|x) ~ p(u) exp(-beta KL(p(y|x) || p(y|u)))
// The Lagrangian is nonincreasing across iterations; convergence is declared
// when its absolute change drops below tol. Bottleneck symbols whose mass
// underflows (< 1e-300) are zeroed out and reported via pruned_symbols.
inline IBCurvePoint ib_iterate(const JointPMF& j, double beta, std::size_t u_size,
                               const Kernel& init, const IterateOptions& opts = {}) {
    if (u_size < 1) throw OutOfRange("ib_iterate: u_size must be >= 1");
    if (!(beta >= 0.0)) throw OutOfRange("ib_iterate: beta must be >= 0");
    if (!(opts.tol > 0.0)) throw OutOfRange("ib_iterate: tol must be positive");
    detail::SourceView src(j, opts.x_axis, opts.y_axis);
    if (init.input_size() != src.nx || init.output_size() != u_size)
        throw OutOfRange("ib_iterate: init kernel has wrong shape");

    const std::size_t nx = src.nx, ny = src.ny, nu = u_size;
    std::vector<double> enc = init.flat();
    std::vector<double> pu(nu), lnpu(nu), w(nu * ny), luy(nu * ny), kl(nx * nu);
    std::vector<char> active(nu, 1);
    std::size_t pruned = 0;

    double l_prev = std::numeric_limits<double>::infinity();
    double rate = 0.0, score = 0.0, lagr = 0.0;
    bool converged = false;
    std::size_t iter = 0;

    while (true) {
        // Marginal p(u), with underflow pruning.
        std::fill(pu.begin(), pu.end(), 0.0);
        for (std::size_t x = 0; x < nx; ++x) {
            const double wx = src.px[x];
            for (std::size_t u = 0; u < nu; ++u) pu[u] += wx * enc[x * nu + u];
        }
        bool repair = false;
        for (std::size_t u = 0; u < nu; ++u) {
            if (active[u] && pu[u] < 1e-300) {
                active[u] = 0;
                ++pruned;
                repair = true;
            }
        }
        if (repair) {
            std::size_t n_active = 0;
            for (std::size_t u = 0; u < nu; ++u) n_active += active[u] ? 1 : 0;
            for (std::size_t x = 0; x < nx; ++x) {
                double mass = 0.0;
                for (std::size_t u = 0; u < nu; ++u) {
                    if (!active[u]) enc[x * nu + u] = 0.0;
                    mass += enc[x * nu + u];
                }
                for (std::size_t u = 0; u < nu; ++u)
                    enc[x * nu + u] = mass > 0.0
                                          ? enc[x * nu + u] / mass
                                          : (active[u] ? 1.0 / static_cast<double>(n_active) : 0.0);
            }
            std::fill(pu.begin(), pu.end(), 0.0);
            for (std::size_t x = 0; x < nx; ++x)
                for (std::size_t u = 0; u < nu; ++u) pu[u] += src.px[x] * enc[x * nu + u];
        }
        for (std::size_t u = 0; u < nu; ++u) lnpu[u] = detail::safe_log(pu[u]);

        // Joint (u,y) and decoder logs.
        std::fill(w.begin(), w.end(), 0.0);
        for (std::size_t x = 0; x < nx; ++x) {
            const double wx = src.px[x];
            if (wx == 0.0) continue;
            const double* cx = src.cond.data() + x * ny;
            for (std::size_t u = 0; u < nu; ++u) {
                const double m = wx * enc[x * nu + u];
                if (m == 0.0) continue;
                double* wu = w.data() + u * ny;
                for (std::size_t y = 0; y < ny; ++y) wu[y] += m * cx[y];
            }
        }
        for (std::size_t u = 0; u < nu; ++u)
            for (std::size_t y = 0; y < ny; ++y)
                luy[u * ny + y] = pu[u] > 0.0 ? detail::safe_log(w[u * ny + y] / pu[u]) : 0.0;

        // Rate, score, Lagrangian at the current encoder.
        rate = 0.0;
        for (std::size_t x = 0; x < nx; ++x) {
            if (src.px[x] == 0.0) continue;
            double s = 0.0;
            for (std::size_t u = 0; u < nu; ++u) {
                const double e = enc[x * nu + u];
                if (e > 0.0) s += e * (std::log(e) - lnpu[u]);
            }
            rate += src.px[x] * s;
        }
        rate = clamp_nonneg(rate);
        double hw = 0.0;
        for (double v : w) hw -= xlogx(v);
        double hu = 0.0;
        for (double v : pu) hu -= xlogx(v);
        double hy = 0.0;
        for (double v : src.py) hy -= xlogx(v);
        score = clamp_nonneg(hu + hy - hw);
        lagr = rate - beta * score;
        if (opts.lagrangian_trace) opts.lagrangian_trace->push_back(lagr);
        assert(lagr <= l_prev + 1e-9);

        if (std::abs(l_prev - lagr) < opts.tol) {
            converged = true;
            break;
        }
        if (iter >= opts.max_iter) break;
        l_prev = lagr;
        ++iter;

        // Gibbs update of the encoder, in the log domain.
        for (std::size_t x = 0; x < nx; ++x) {
            const double* cx = src.cond.data() + x * ny;
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t u = 0; u < nu; ++u) {
                double cross = 0.0;
                const double* lu = luy.data() + u * ny;
                for (std::size_t y = 0; y < ny; ++y) cross += cx[y] * lu[y];
                kl[x * nu + u] = src.neg_hyx[x] - cross;
                double s = active[u] ? lnpu[u] - beta * kl[x * nu + u]
                                     : -std::numeric_limits<double>::infinity();
                kl[x * nu + u] = s;  // reuse as score buffer
                best = std::max(best, s);
            }
            double mass = 0.0;
            for (std::size_t u = 0; u < nu; ++u) {
                double e = std::exp(kl[x * nu + u] - best);
                enc[x * nu + u] = e;
                mass += e;
            }
            for (std::size_t u = 0; u < nu; ++u) enc[x * nu + u] /= mass;
        }
    }

    IBCurvePoint pt;
    pt.beta = beta;
    pt.rate = rate;
    pt.score = score;
    pt.encoder = Kernel(nx, nu, std::move(enc));
    pt.converged = converged;
    pt.iters = iter;
    pt.pruned_symbols = pruned;
    pt.lagrangian = lagr;
    return pt;
}

inline IBCurvePoint ib_iterate(const JointPMF& j, double beta, std::size_t u_size,
                               const Kernel& init, double tol, std::size_t max_iter) {
    IterateOptions opts;
    opts.tol = tol;
    opts.max_iter = max_iter;
    return ib_iterate(j, beta, u_size, init, opts);
}

// Trade-off curve: per-beta sweep plus the dominating envelope.
struct IBCurve {
    JointPMF source;
    std::vector<IBCurvePoint> points;  // envelope, rate ascending, score increasing
    std::vector<IBCurvePoint> sweep;   // best run per scheduled beta
    std::size_t failed_runs = 0;       // solver runs that raised instead of returning
};

struct CurveOptions {
    std::vector<double> beta_schedule;  // ascending; default_beta_schedule() if empty
    std::size_t u_size = 0;             // 0 = |X| + 1
    std::size_t restarts = 4;
    double tol = 1e-10;
    std::size_t max_iter = 100000;
    std::uint64_t seed = kDefaultSeed;
    std::size_t threads = 0;  // 0 = hardware concurrency
    std::vector<Kernel> extra_inits;
    std::string x_axis = "x";
    std::string y_axis = "y";
};

// Geometric schedule covering both curve endpoints for the regression sources.
inline std::vector<double> default_beta_schedule(std::size_t count = 60, double lo = 0.05,
                                                 double hi = 200.0) {
    std::vector<double> betas(count);
    for (std::size_t i = 0; i < count; ++i)
        betas[i] = count == 1 ? lo
                              : lo * std::pow(hi / lo, static_cast<double>(i) /
                                                           static_cast<double>(count - 1));
    return betas;
}

namespace detail {

// Largest score wins; rates within 1e-12 of each other tie toward the
// smaller rate.
inline bool better_point(const IBCurvePoint& a, const IBCurvePoint& b) {
    if (std::abs(a.score - b.score) > 1e-12) return a.score > b.score;
    return a.rate < b.rate;
}

}  // namespace detail

inline IBCurve ib_curve(const JointPMF& j, const CurveOptions& options) {
    CurveOptions opts = options;
    if (opts.beta_schedule.empty()) opts.beta_schedule = default_beta_schedule();
    if (!std::is_sorted(opts.beta_schedule.begin(), opts.beta_schedule.end()))
        throw OutOfRange("ib_curve: beta schedule must be ascending");
    const std::size_t nx = j.axis(j.axis_index(opts.x_axis)).size;
    if (opts.u_size == 0) opts.u_size = nx + 1;

    IterateOptions it;
    it.tol = opts.tol;
    it.max_iter = opts.max_iter;
    it.x_axis = opts.x_axis;
    it.y_axis = opts.y_axis;

    const std::size_t n_beta = opts.beta_schedule.size();
    std::vector<std::optional<IBCurvePoint>> best(n_beta);
    std::atomic<std::size_t> failed_runs{0};

    auto run_beta = [&](std::size_t b) {
        const double beta = opts.beta_schedule[b];
        std::optional<IBCurvePoint> best_conv, best_any;
        auto consider = [&](const Kernel& init) {
            // A failed run contributes no candidate; the curve survives as
            // long as one point anywhere converges.
            try {
                IBCurvePoint pt = ib_iterate(j, beta, opts.u_size, init, it);
                if (!best_any || detail::better_point(pt, *best_any)) best_any = pt;
                if (pt.converged && (!best_conv || detail::better_point(pt, *best_conv)))
                    best_conv = std::move(pt);
            } catch (const Error&) {
                failed_runs.fetch_add(1);
            }
        };
        consider(near_identity_encoder(nx, opts.u_size));
        for (std::size_t r = 0; r < opts.restarts; ++r) {
            std::mt19937_64 rng(derive_seed(opts.seed, b, r));
            consider(random_encoder(rng, nx, opts.u_size));
        }
        for (const auto& extra : opts.extra_inits) consider(extra);
        best[b] = best_conv ? std::move(best_conv) : std::move(best_any);
    };

    std::size_t threads = opts.threads ? opts.threads : std::thread::hardware_concurrency();
    threads = std::max<std::size_t>(1, std::min(threads, n_beta));
    if (threads == 1) {
        for (std::size_t b = 0; b < n_beta; ++b) run_beta(b);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (std::size_t b = next.fetch_add(1); b < n_beta; b = next.fetch_add(1))
                    run_beta(b);
            });
        for (auto& th : pool) th.join();
    }

    IBCurve curve{j, {}, {}, failed_runs.load()};
    for (auto& opt_pt : best)
        if (opt_pt) curve.sweep.push_back(std::move(*opt_pt));
    std::vector<const IBCurvePoint*> conv;
    for (const auto& pt : curve.sweep)
        if (pt.converged) conv.push_back(&pt);
    if (conv.empty()) throw EmptyCurve("ib_curve: no beta point converged");
    std::sort(conv.begin(), conv.end(), [](const IBCurvePoint* a, const IBCurvePoint* b) {
        if (a->rate != b->rate) return a->rate < b->rate;
        return a->score > b->score;
    });
    double top = -1.0;
    for (const IBCurvePoint* pt : conv) {
        if (pt->score > top) {
            curve.points.push_back(*pt);
            top = pt->score;
        }
    }
    return curve;
}

inline IBCurve ib_curve(const JointPMF& j, const std::vector<double>& beta_schedule,
                        std::size_t u_size, std::size_t restarts, double tol) {
    CurveOptions opts;
    opts.beta_schedule = beta_schedule;
    opts.u_size = u_size;
    opts.restarts = restarts;
    opts.tol = tol;
    return ib_curve(j, opts);
}

// Piecewise-linear value of the curve's upper envelope at rate R, anchored at
// (0,0); flat at the terminal score past the largest solved rate.
inline double ib_value_at_rate(const IBCurve& curve, double rate) {
    if (!(rate >= 0.0)) throw OutOfRange("ib_value_at_rate: rate must be >= 0");
    if (curve.points.empty()) throw EmptyCurve("ib_value_at_rate: curve has no points");
    double r0 = 0.0, s0 = 0.0;
    for (const auto& pt : curve.points) {
        if (rate <= pt.rate) {
            const double span = pt.rate - r0;
            if (span <= 0.0) return pt.score;
            return s0 + (pt.score - s0) * (rate - r0) / span;
        }
        r0 = pt.rate;
        s0 = pt.score;
    }
    return curve.points.back().score;
}

}  // namespace ib
