#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ib/gaussian.hpp"
#include "ib/measures.hpp"
#include "ib/quantizer.hpp"
#include "ib/solver.hpp"

#include "helpers.hpp"

using namespace ib;
using namespace ib::testing;

namespace {

// Shared flagship-style fixture at unit-test scale: 200-cell grid, binary
// relevance, bottleneck channel from a beta = 5 pre-solve.
const GridSource& gaussian_fixture() {
    static const GridSource src = [] {
        GridSource base = discretize_binary_y(GaussianPair(0.9), 200);
        Kernel init(200, 2, base.y_channel.flat());
        IBCurvePoint pre = ib_iterate(base.to_joint_yx(), 5.0, 2, init, 1e-10, 100000);
        return base.with_u_channel(pre.encoder);
    }();
    return src;
}

}  // namespace

TEST_CASE("simplex partition basics") {
    SimplexPartition one = partition_simplex(1, 0.25);
    one.insert(std::vector<double>{1.0}, 0);
    one.insert(std::vector<double>{1.0}, 1);
    REQUIRE(one.occupied_count() == 1);  // the whole simplex is one point

    SimplexPartition halves = partition_simplex(2, 0.5);
    halves.insert(std::vector<double>{0.2, 0.8}, 0);
    halves.insert(std::vector<double>{0.4, 0.6}, 1);
    halves.insert(std::vector<double>{0.9, 0.1}, 2);
    REQUIRE(halves.occupied_count() == 2);  // first coordinate below/above 1/2

    REQUIRE_THROWS_AS(partition_simplex(2, 0.6), OutOfRange);
    REQUIRE_THROWS_AS(partition_simplex(2, 0.0), OutOfRange);
    REQUIRE_THROWS_AS(partition_simplex(3, std::ldexp(1.0, -9)), SizeExceeded);
}

TEST_CASE("partition sweep over the gaussian bottleneck rows") {
    const GridSource& src = gaussian_fixture();
    SimplexPartition part = partition_simplex(2, 0.1);
    for (std::size_t c = 0; c < src.cell_count(); ++c) part.insert(src.u_channel.row_span(c), c);
    REQUIRE(part.occupied_count() >= 2);
    REQUIRE(part.occupied_count() <= 11);
    // Every member sits within delta of its cell representative.
    for (const auto& [coords, rec] : part.occupied()) {
        auto rep = part.representative(coords, src.u_channel.row_span(rec.first_member));
        REQUIRE(part.locate(rep) == coords);
        for (std::size_t c = 0; c < src.cell_count(); ++c) {
            if (part.locate(src.u_channel.row_span(c)) != coords) continue;
            REQUIRE(linf_distance(std::span<const double>(rep), src.u_channel.row_span(c)) <=
                    0.1);
        }
    }
}

TEST_CASE("constant bottleneck channel collapses to a single cell") {
    std::mt19937_64 rng(59);
    std::vector<std::string> ids{"a", "b", "c"};
    std::vector<double> rows{0.3, 0.7, 0.3, 0.7, 0.3, 0.7};
    GridSource src(ids, PMF({0.2, 0.5, 0.3}), random_kernel(rng, 3, 2), Kernel(3, 2, rows));
    QuantizedSource q = quantize_source(src, partition_simplex(2, 0.25));
    REQUIRE(q.x_hat_alphabet.size() == 1);
    REQUIRE(mutual_information(q.joint, "xhat", "utilde") <= 1e-12);
    REQUIRE(mutual_information(q.joint, "y", "utilde") <= 1e-12);
}

TEST_CASE("single-symbol bottleneck alphabet carries nothing") {
    const GridSource& base = gaussian_fixture();
    GridSource trivial = base.with_u_channel(Kernel(base.cell_count(), 1,
                                                    std::vector<double>(base.cell_count(), 1.0)));
    QuantizedSource q = quantize_source(trivial, partition_simplex(1, 0.5));
    REQUIRE(mutual_information(q.joint, "y", "utilde") <= 1e-12);
}

TEST_CASE("quantized source satisfies the construction identities") {
    const GridSource& src = gaussian_fixture();
    const double delta = std::ldexp(1.0, -5);
    QuantizedSource q = quantize_source(src, partition_simplex(2, delta));

    // kappa_{utilde|xhat} equals the representative exactly.
    Kernel k = q.joint.conditional("xhat", "utilde");
    for (std::size_t i = 0; i < q.x_hat_alphabet.size(); ++i)
        for (std::size_t u = 0; u < 2; ++u)
            REQUIRE(k(i, u) == Catch::Approx(q.representatives[i][u]).margin(1e-12));

    // Markov chains y - xhat - utilde and y - x - utilde.
    REQUIRE(markov_residual(q.joint, "y", "xhat", "utilde") <= 1e-9);
    std::vector<double> t;
    t.reserve(2 * src.cell_count() * 2);
    for (std::size_t y = 0; y < 2; ++y)
        for (std::size_t c = 0; c < src.cell_count(); ++c)
            for (std::size_t u = 0; u < 2; ++u)
                t.push_back(src.weights[c] * src.y_channel(c, y) *
                            q.representatives[q.g_map[c]][u]);
    JointPMF y_x_ut({{"y", 2}, {"x", src.cell_count()}, {"utilde", 2}}, std::move(t));
    REQUIRE(markov_residual(y_x_ut, "y", "x", "utilde") <= 1e-9);

    // Per-cell closeness of the surrogate and original channels.
    for (std::size_t c = 0; c < src.cell_count(); ++c) {
        if (src.weights[c] == 0.0) continue;
        REQUIRE(linf_distance(std::span<const double>(q.representatives[q.g_map[c]]),
                              src.u_channel.row_span(c)) <= delta);
    }
}

TEST_CASE("quantization bounds hold across the dyadic refinement") {
    const GridSource& src = gaussian_fixture();
    JointPMF grid = src.to_joint();
    const double i_yu = mutual_information(grid, "y", "u");
    const double i_xu = mutual_information(grid, "x", "u");
    double first_gap = 0.0, last_gap = 0.0, first_gap_x = 0.0, last_gap_x = 0.0;
    for (int k = 3; k <= 10; ++k) {
        const double delta = std::ldexp(1.0, -k);
        QuantizedSource q = quantize_source(src, partition_simplex(2, delta));
        QuantizationReport r = verify_quantization_bounds(src, q, delta);
        REQUIRE(r.d_u <= delta + 1e-9);
        REQUIRE(r.d_yu <= delta + 1e-9);
        REQUIRE(r.rate_slack >= -1e-9);
        REQUIRE(r.score_slack >= -1e-9);
        REQUIRE(r.ok());
        // Pairwise entropy gap bound derived from d_yu.
        const double h_yu = entropy(std::span<const double>(
            grid.marginal(std::vector<std::string>{"y", "u"}).table()));
        const double h_yut = entropy(std::span<const double>(
            q.joint.marginal(std::vector<std::string>{"y", "utilde"}).table()));
        REQUIRE(std::abs(h_yu - h_yut) <= -delta * 4.0 * std::log(delta) + 1e-9);
        const double gap = std::abs(mutual_information(q.joint, "y", "utilde") - i_yu);
        const double gap_x = std::abs(mutual_information(q.joint, "xhat", "utilde") - i_xu);
        if (k == 3) {
            first_gap = gap;
            first_gap_x = gap_x;
        }
        if (k == 10) {
            last_gap = gap;
            last_gap_x = gap_x;
        }
    }
    // Refinement converges toward the grid values on both coordinates.
    REQUIRE(last_gap < first_gap);
    REQUIRE(last_gap_x < first_gap_x);
}

TEST_CASE("delta selection rule") {
    // Bracketed dyadic example: |Y| = |U| = 2 at eps = 0.1.
    const double d = delta_for_epsilon(0.1, 2, 2);
    REQUIRE(d == std::ldexp(1.0, -9));
    REQUIRE(-2.0 * d * 4.0 * std::log(d) + d <= 0.1);

    // Plugging the returned delta back always satisfies the inequality.
    for (double eps : {0.3, 0.05, 0.011, 1.7}) {
        const double dd = delta_for_epsilon(eps, 2, 3);
        REQUIRE(dd <= 0.5);
        REQUIRE(-2.0 * dd * 6.0 * std::log(dd) + dd <= eps);
    }

    // Large eps caps at 1/2; tiny eps underflows the dyadic grid.
    REQUIRE(delta_for_epsilon(10.0, 2, 2) == 0.5);
    REQUIRE_THROWS_AS(delta_for_epsilon(1e-20, 2, 2), EpsTooSmall);
    REQUIRE_THROWS_AS(delta_for_epsilon(0.0, 2, 2), OutOfRange);
}

TEST_CASE("quantize_source rejects mismatched partitions") {
    const GridSource& src = gaussian_fixture();
    REQUIRE_THROWS_AS(quantize_source(src, partition_simplex(3, 0.25)), OutOfRange);
    QuantizedSource q = quantize_source(src, partition_simplex(2, 0.25));
    REQUIRE_THROWS_AS(verify_quantization_bounds(src, q, 0.125), OutOfRange);
}
