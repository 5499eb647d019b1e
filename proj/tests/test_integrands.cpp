#include <catch2/catch_amalgamated.hpp>

#include "qmc/cubature.hpp"
#include "qmc/integrands.hpp"

using namespace qmc;
using Catch::Matchers::WithinAbs;

namespace {

double sample_mean_f(const Problem& p, Family fam, std::size_t n, std::uint64_t seed) {
    double m = 0.0;
    if (fam == Family::iid) {
        for (double v : evaluate_f(p, iid_points(p.d, n, seed))) m += v;
    } else {
        for (double v : evaluate_f(p, make_sampler(fam, p.d, seed).generate(0, n))) m += v;
    }
    return m / static_cast<double>(n);
}

}  // namespace

TEST_CASE("keister oracle values") {
    // d = 1 has the closed form sqrt(pi) * exp(-1/4)
    double closed = std::sqrt(std::numbers::pi) * std::exp(-0.25);
    REQUIRE_THAT(keister_true_value(1), WithinAbs(closed, 1e-12));
    REQUIRE_THAT(keister_true_value(1), WithinAbs(1.3803884, 1e-7));
    // oracle is finite and stable across dimensions
    for (std::size_t d = 2; d <= 8; ++d) {
        double mu = keister_true_value(d);
        REQUIRE(std::isfinite(mu));
        REQUIRE(mu == keister_true_value(d));  // cache consistency
    }
}

TEST_CASE("keister f at the center is pi^{d/2}") {
    for (std::size_t d : {1u, 2u, 5u}) {
        auto p = keister_problem(d);
        PointBlock blk;
        blk.d = d;
        blk.values.assign(d, 0.5);
        auto f = evaluate_f(p, blk);
        REQUIRE_THAT(f[0], WithinAbs(std::pow(std::numbers::pi, d / 2.0), 1e-12));
    }
}

TEST_CASE("keister d=1 via Lebesgue ladder at the center") {
    auto p = keister_problem(1);
    p.g = [](std::span<const double> t) {
        double s = 0.0;
        for (double v : t) s += v * v;
        return std::cos(std::sqrt(s)) * std::exp(-s);
    };
    p.ladder = lebesgue_ladder(1);
    PointBlock blk;
    blk.d = 1;
    blk.values = {0.5};
    auto f = evaluate_f(p, blk);
    REQUIRE_THAT(f[0], WithinAbs(std::sqrt(2.0 * std::numbers::pi), 1e-8));
}

TEST_CASE("lebesgue and gaussian Keister formulations agree") {
    const std::size_t d = 2;
    auto p_gauss = keister_problem(d);
    auto p_leb = keister_problem(d);
    p_leb.g = [](std::span<const double> t) {
        double s = 0.0;
        for (double v : t) s += v * v;
        return std::cos(std::sqrt(s)) * std::exp(-s);
    };
    p_leb.ladder = lebesgue_ladder(d);
    double m1 = sample_mean_f(p_gauss, Family::digital_net, 1 << 16, 5);
    double m2 = sample_mean_f(p_leb, Family::digital_net, 1 << 16, 5);
    REQUIRE_THAT(m1, WithinAbs(m2, 2e-3));
    REQUIRE_THAT(m1, WithinAbs(keister_true_value(d), 1e-3));
}

TEST_CASE("constant integrand with matching ladder stays constant") {
    auto lad = single_step_ladder(
        gaussian_transform(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2)), 2);
    auto p = custom_problem([](std::span<const double>) { return 7.25; }, lad);
    auto blk = make_sampler(Family::lattice, 2, 3).generate(0, 64);
    for (double v : evaluate_f(p, blk)) REQUIRE(v == 7.25);
}

TEST_CASE("custom problems integrate to known means") {
    // g(t) = t on U[0,1]
    auto lad_u = single_step_ladder(
        uniform_transform(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1)), 1);
    auto p_u = custom_problem([](std::span<const double> t) { return t[0]; }, lad_u);
    REQUIRE_THAT(sample_mean_f(p_u, Family::lattice, 1 << 14, 2), WithinAbs(0.5, 1e-4));

    // g(t) = t^T t on N(0, I), d = 3 -> 3
    auto lad_g = single_step_ladder(
        gaussian_transform(Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Identity(3, 3)), 3);
    auto p_g = custom_problem(
        [](std::span<const double> t) {
            double s = 0.0;
            for (double v : t) s += v * v;
            return s;
        },
        lad_g);
    REQUIRE_THAT(sample_mean_f(p_g, Family::digital_net, 1 << 16, 2), WithinAbs(3.0, 5e-3));
}

TEST_CASE("normalization: constant integrates to itself under PDF ladders") {
    Eigen::VectorXd al(2), be(2);
    al << 2.0, 0.5;
    be << 1.5, 3.0;
    TransformLadder lad;
    lad.dimension = 2;
    lad.steps.push_back(kumaraswamy_transform(al, be));
    auto p = custom_problem([](std::span<const double>) { return 4.0; }, lad);
    REQUIRE_THAT(sample_mean_f(p, Family::digital_net, 1 << 14, 9), WithinAbs(4.0, 1e-10));
}

TEST_CASE("asian call: zero volatility is deterministic") {
    auto p = asian_call_problem(100.0, 100.0, 0.05, 0.0, 1.0, 16);
    REQUIRE(p.known_value.has_value());
    auto blk = make_sampler(Family::lattice, 16, 1).generate(0, 32);
    for (double v : evaluate_f(p, blk)) REQUIRE_THAT(v, WithinAbs(*p.known_value, 1e-12));

    // K = 0, sigma = 0, r = 0: price = S0
    auto p2 = asian_call_problem(100.0, 0.0, 0.0, 0.0, 1.0, 8);
    REQUIRE_THAT(*p2.known_value, WithinAbs(100.0, 1e-12));
}

TEST_CASE("asian call: price nonincreasing in strike") {
    double prev = 1e300;
    for (double K : {80.0, 90.0, 100.0, 110.0, 120.0}) {
        auto p = asian_call_problem(100.0, K, 0.05, 0.2, 1.0, 8);
        double price = sample_mean_f(p, Family::digital_net, 1 << 14, 4);
        REQUIRE(price <= prev + 1e-9);
        prev = price;
    }
}

TEST_CASE("asian call: drifted and undrifted estimates agree") {
    auto p0 = asian_call_problem(100.0, 100.0, 0.05, 0.2, 1.0, 16, 0.0);
    auto p2 = asian_call_problem(100.0, 100.0, 0.05, 0.2, 1.0, 16, 2.0);
    double m0 = sample_mean_f(p0, Family::digital_net, 1 << 15, 6);
    double m2 = sample_mean_f(p2, Family::digital_net, 1 << 15, 6);
    REQUIRE_THAT(m0, WithinAbs(m2, 2e-2));
}

TEST_CASE("invalid parameters are rejected") {
    REQUIRE_THROWS_AS(keister_problem(0), usage_error);
    REQUIRE_THROWS_AS(asian_call_problem(-1.0, 100.0, 0.05, 0.2, 1.0, 16), usage_error);
    REQUIRE_THROWS_AS(asian_call_problem(100.0, 100.0, 0.05, -0.2, 1.0, 16), usage_error);
    REQUIRE_THROWS_AS(asian_call_problem(100.0, 100.0, 0.05, 0.2, 0.0, 16), usage_error);
}

TEST_CASE("boundary points are rejected with the point index") {
    auto p = keister_problem(2);
    PointBlock blk;
    blk.d = 2;
    blk.values = {0.25, 0.5, 0.0, 0.5};  // second point touches the boundary
    try {
        evaluate_f(p, blk);
        FAIL("expected boundary_error");
    } catch (const boundary_error& e) {
        REQUIRE(std::string(e.what()).find("index 1") != std::string::npos);
    }
}
