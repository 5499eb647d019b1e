#include <catch2/catch_amalgamated.hpp>

#include "qmc/quality.hpp"

using namespace qmc;
using Catch::Matchers::WithinAbs;

namespace {

PointBlock block_from(std::vector<double> vals, std::size_t d) {
    PointBlock blk;
    blk.d = d;
    blk.values = std::move(vals);
    return blk;
}

}  // namespace

TEST_CASE("centered L2 discrepancy closed-form anchors") {
    // a single midpoint in d=1 gives sqrt(1/12)
    auto mid = block_from({0.5}, 1);
    REQUIRE_THAT(centered_l2_discrepancy(mid), WithinAbs(std::sqrt(1.0 / 12.0), 1e-12));
    REQUIRE_THAT(centered_l2_discrepancy(mid), WithinAbs(0.288675, 1e-6));

    // invariant under coordinate reflection x -> 1 - x
    auto blk = make_sampler(Family::digital_net, 3, 4).generate(0, 128);
    auto refl = blk;
    for (double& v : refl.values) v = 1.0 - v;
    REQUIRE_THAT(centered_l2_discrepancy(blk), WithinAbs(centered_l2_discrepancy(refl), 1e-12));

    // invariant under point permutation
    auto perm = blk;
    for (std::size_t k = 0; k < 3; ++k) std::swap(perm.values[k], perm.values[45 * 3 + k]);
    REQUIRE_THAT(centered_l2_discrepancy(blk), WithinAbs(centered_l2_discrepancy(perm), 1e-12));

    REQUIRE_THROWS(centered_l2_discrepancy(block_from({}, 1)));
}

TEST_CASE("LD families beat IID on centered discrepancy") {
    const std::size_t d = 4, n = 256;
    // median IID discrepancy over independent draws
    std::vector<double> iid_cd;
    for (std::uint64_t s = 0; s < 11; ++s)
        iid_cd.push_back(centered_l2_discrepancy(iid_points(d, n, 100 + s)));
    std::sort(iid_cd.begin(), iid_cd.end());
    const double iid_median = iid_cd[5];
    for (Family fam : {Family::lattice, Family::digital_net, Family::halton}) {
        auto blk = make_sampler(fam, d, 3).generate(0, n);
        REQUIRE(centered_l2_discrepancy(blk) < iid_median);
    }
}

TEST_CASE("stratification check distinguishes LD from clumped points") {
    const int m = 6;
    auto net = make_sampler(Family::digital_net, 3, 8).generate(0, 1ULL << m);
    for (bool ok : stratification_check(net, m)) REQUIRE(ok);

    auto lat = make_sampler(Family::lattice, 3, 8).generate(0, 1ULL << m);
    for (bool ok : stratification_check(lat, m)) REQUIRE(ok);

    // constant column fails, remaining columns keep their verdicts
    auto bad = net;
    for (std::size_t i = 0; i < bad.n(); ++i) bad.values[i * 3] = 0.25;
    auto verdicts = stratification_check(bad, m);
    REQUIRE_FALSE(verdicts[0]);
    REQUIRE(verdicts[1]);
    REQUIRE(verdicts[2]);

    REQUIRE_THROWS_AS(stratification_check(block_from({0.5, 0.5}, 1), 3), usage_error);
}

TEST_CASE("convergence slope separates IID from LD rates") {
    auto p = keister_problem(3);
    const double mu = keister_true_value(3);
    auto iid = convergence_slope(p, Family::iid, 6, 12, 10, mu);
    REQUIRE_FALSE(iid.degenerate);
    // IID RMSE decays like n^{-1/2}
    REQUIRE(iid.slope > -0.7);
    REQUIRE(iid.slope < -0.3);

    auto net = convergence_slope(p, Family::digital_net, 6, 12, 10, mu);
    REQUIRE_FALSE(net.degenerate);
    REQUIRE(net.slope < -0.75);
    REQUIRE(net.slope > -1.7);
    // LD errors at every m beyond the smallest are smaller than IID
    for (std::size_t i = 1; i < net.rmse.size(); ++i) REQUIRE(net.rmse[i] < iid.rmse[i]);

    REQUIRE_THROWS_AS(convergence_slope(p, Family::iid, 8, 9, 4, mu), usage_error);
}

TEST_CASE("convergence slope flags zero-variance problems as degenerate") {
    auto lad = identity_ladder(2);
    lad.log_final_density = [](std::span<const double>) { return 0.0; };
    auto p = custom_problem([](std::span<const double>) { return 3.0; }, lad);
    auto rep = convergence_slope(p, Family::digital_net, 8, 11, 4, 3.0);
    REQUIRE(rep.degenerate);
}

TEST_CASE("empirical moments of the uniform cube") {
    auto blk = make_sampler(Family::digital_net, 2, 21).generate(0, 1 << 14);
    auto [mean, cov] = empirical_moments(blk);
    REQUIRE_THAT(mean(0), WithinAbs(0.5, 1e-3));
    REQUIRE_THAT(mean(1), WithinAbs(0.5, 1e-3));
    REQUIRE_THAT(cov(0, 0), WithinAbs(1.0 / 12.0, 1e-3));
    REQUIRE_THAT(cov(0, 1), WithinAbs(0.0, 1e-3));
}

TEST_CASE("empirical moments of transformed Brownian paths") {
    const std::size_t d = 4;
    auto lad = single_step_ladder(brownian_motion(1.0, d, 0.0), d);
    auto blk = make_sampler(Family::digital_net, d, 33).generate(0, 1 << 16);
    auto [pts, w] = ladder_transform(lad, blk);
    auto [mean, cov] = empirical_moments(pts);
    auto sigma = brownian_covariance(1.0, d);
    for (std::size_t k = 0; k < d; ++k) REQUIRE_THAT(mean(k), WithinAbs(0.0, 2e-2));
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            REQUIRE_THAT(cov(i, j), WithinAbs(sigma(i, j), 2e-2));

    REQUIRE_THROWS(empirical_moments(block_from({0.5}, 1)));
}
