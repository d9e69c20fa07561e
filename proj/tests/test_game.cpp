#include <cmath>

#include "doctest.h"
#include "dpnes/game.hpp"
#include "dpnes/noise.hpp"

using namespace dpnes;

namespace {

// Six-player generation game: quadratic costs with capacities b2, weak
// aggregate coupling a, boxes wide enough that the equilibrium is interior.
GameSpec six_player_game() {
    GameSpec g;
    g.n = 6;
    const double kappa[6] = {5.4, 4.86, 4.32, 4.05, 3.69, 4.32};
    const double b2[6] = {2, 5, 8, 12, 15, 18};
    const double cap[6] = {0.6, 0.54, 0.48, 0.45, 0.41, 0.48};
    const double box[6] = {20, 25, 30, 35, 40, 45};
    for (int i = 0; i < 6; ++i) {
        g.costs.emplace_back(QuadraticAggCost{0.001, 0.1, 6.0, kappa[i], b2[i], cap[i]});
        g.phi.push_back(LocalMap{1.0, 0.0});
        g.lo.push_back(-box[i]);
        g.hi.push_back(box[i]);
        g.lipschitz_g.push_back(0.001);
        g.lipschitz_phi.push_back(1.0);
    }
    g.monotonicity_m = 0.16;
    return g;
}

GameSpec single_player(double lo, double hi) {
    // (q-3)^2 embedded in the quadratic family: 9*(1 - q/3)^2.
    GameSpec g;
    g.n = 1;
    g.costs.emplace_back(QuadraticAggCost{0.0, 0.0, 9.0, 1.0, 3.0, 0.0});
    g.phi.push_back(LocalMap{1.0, 0.0});
    g.lo.push_back(lo);
    g.hi.push_back(hi);
    g.lipschitz_g.push_back(1e-9);
    g.lipschitz_phi.push_back(1.0);
    g.monotonicity_m = 1.9;
    return g;
}

const Vec kReferenceNe = {1.9932, 4.9526, 7.8629, 11.6692, 14.4304, 17.2964};

}  // namespace

TEST_CASE("aggregate") {
    GameSpec g = six_player_game();
    SUBCASE("identity map is the plain mean") {
        GameSpec h = g;
        h.n = 3;
        h.costs.resize(3);
        h.phi.resize(3);
        h.lo.resize(3);
        h.hi.resize(3);
        h.lipschitz_g.resize(3);
        h.lipschitz_phi.resize(3);
        CHECK(aggregate(h, Vec{1, 2, 3}) == doctest::Approx(2.0));
    }
    SUBCASE("published equilibrium aggregates to ~9.70078") {
        CHECK(aggregate(g, kReferenceNe) == doctest::Approx(9.70078).epsilon(1e-5));
    }
    SUBCASE("affine maps feed through") {
        GameSpec h = g;
        h.n = 2;
        h.costs.resize(2);
        h.phi = {LocalMap{2.0, 1.0}, LocalMap{2.0, 1.0}};
        h.lo.resize(2);
        h.hi.resize(2);
        h.lipschitz_g.resize(2);
        h.lipschitz_phi = {2.0, 2.0};
        CHECK(aggregate(h, Vec{0, 0}) == doctest::Approx(1.0));
    }
    CHECK_THROWS_AS(aggregate(g, Vec{1, 2}), std::invalid_argument);
}

TEST_CASE("partial gradient closed forms") {
    GameSpec g = six_player_game();
    // Near-zero at the published equilibrium (4-decimal rounding left over).
    CHECK(std::fabs(partial_gradient(g, 0, 1.9932, 9.70078)) < 5e-3);
    // Flat quadratic part: only the constant slope remains.
    GameSpec flat = six_player_game();
    flat.costs[2] = QuadraticAggCost{0.0, 0.7, 6.0, 0.0, 8.0, 0.48};
    CHECK(partial_gradient(flat, 2, -3.5, 123.0) == doctest::Approx(0.7));
    CHECK(partial_gradient(flat, 2, 8.0, -1.0) == doctest::Approx(0.7));
    // Direct evaluation at the origin.
    CHECK(partial_gradient(g, 0, 0.0, 0.0) == doctest::Approx(-32.3));
}

TEST_CASE("gradient matches central differences through the aggregate") {
    GameSpec g = six_player_game();
    NoiseStream st = make_stream(2024, -5);
    uint64_t c = 0;
    for (int trial = 0; trial < 100; ++trial) {
        Vec q(6);
        for (int i = 0; i < 6; ++i) {
            const size_t k = static_cast<size_t>(i);
            // Stay in the inner 80% so the difference stencil is feasible.
            q[k] = g.lo[k] + (0.1 + 0.8 * st.uniform_open(c++)) * (g.hi[k] - g.lo[k]);
        }
        const int i = static_cast<int>(st.uniform_open(c++) * 6) % 6;
        const size_t k = static_cast<size_t>(i);
        const double h = 1e-6 * std::max(1.0, std::fabs(q[k]));
        auto j_at = [&](double qi) {
            Vec qq = q;
            qq[k] = qi;
            return cost_value(g.costs[k], qi, aggregate(g, qq));
        };
        const double fd = (j_at(q[k] + h) - j_at(q[k] - h)) / (2 * h);
        const double an = partial_gradient(g, i, q[k], aggregate(g, q));
        CHECK(std::fabs(fd - an) <= 1e-6 * std::max(1.0, std::fabs(an)));
    }
}

TEST_CASE("projection") {
    GameSpec g = six_player_game();
    CHECK(project(g, 0, 25.0) == doctest::Approx(20.0));
    CHECK(project(g, 0, 3.7) == doctest::Approx(3.7));
    CHECK(project(g, 0, -20.0) == doctest::Approx(-20.0));
    // Idempotent and non-expansive on sampled pairs.
    NoiseStream st = make_stream(11, -6);
    for (uint64_t k = 0; k < 200; ++k) {
        const double u = -60 + 120 * st.uniform_open(2 * k);
        const double v = -60 + 120 * st.uniform_open(2 * k + 1);
        const double pu = project(g, 1, u), pv = project(g, 1, v);
        CHECK(project(g, 1, pu) == pu);
        CHECK(std::fabs(pu - pv) <= std::fabs(u - v) + 1e-15);
    }
}

TEST_CASE("equilibrium oracle reproduces the reference point") {
    GameSpec g = six_player_game();
    NeSolution sol = solve_ne_oracle(g, 1e-10);
    REQUIRE(sol.q.size() == 6);
    for (int i = 0; i < 6; ++i)
        CHECK(std::fabs(sol.q[static_cast<size_t>(i)] - kReferenceNe[static_cast<size_t>(i)]) < 1e-3);
    CHECK(sol.linear_checked);
    CHECK(sol.disagreement < 1e-6);
    CHECK(sol.residual < 1e-10);
}

TEST_CASE("equilibrium oracle: single player") {
    SUBCASE("interior minimum") {
        NeSolution sol = solve_ne_oracle(single_player(0, 10), 1e-9);
        CHECK(sol.q[0] == doctest::Approx(3.0).epsilon(1e-6));
        CHECK(sol.linear_checked);
    }
    SUBCASE("projection binds at the boundary") {
        NeSolution sol = solve_ne_oracle(single_player(0, 2), 1e-9);
        CHECK(sol.q[0] == doctest::Approx(2.0).epsilon(1e-6));
        CHECK_FALSE(sol.linear_checked);  // boundary solution, no interior cross-check
    }
}

TEST_CASE("oracle fixed point property") {
    GameSpec g = six_player_game();
    NeSolution sol = solve_ne_oracle(g, 1e-10);
    const double sig = aggregate(g, sol.q);
    for (int i = 0; i < 6; ++i) {
        const size_t k = static_cast<size_t>(i);
        const double back = project(g, i, sol.q[k] - 0.05 * partial_gradient(g, i, sol.q[k], sig));
        CHECK(std::fabs(back - sol.q[k]) < 1e-8);
    }
}

TEST_CASE("strong monotonicity sampling") {
    SUBCASE("six player game clears its declared constant") {
        auto rep = verify_strong_monotonicity_sample(six_player_game(), 1000, 7);
        CHECK(rep.pass);
        CHECK(rep.min_ratio > 0.0);
    }
    SUBCASE("decoupled quadratic has ratio two") {
        GameSpec g;
        g.n = 3;
        for (int i = 0; i < 3; ++i) {
            g.costs.emplace_back(QuadraticAggCost{0.0, 0.0, 1.0, 1.0, 1.0, 0.0});  // (1-q)^2
            g.phi.push_back(LocalMap{1.0, 0.0});
            g.lo.push_back(-5);
            g.hi.push_back(5);
            g.lipschitz_g.push_back(1e-9);
            g.lipschitz_phi.push_back(1.0);
        }
        g.monotonicity_m = 2.0;
        auto rep = verify_strong_monotonicity_sample(g, 500, 3);
        CHECK(rep.min_ratio == doctest::Approx(2.0).epsilon(1e-9));
        CHECK(rep.pass);
    }
    SUBCASE("concave cost fails") {
        GameSpec g = six_player_game();
        g.costs[0] = QuadraticAggCost{0.001, 0.1, 6.0, -5.4, 2.0, 0.6};
        g.monotonicity_m = 0.16;
        auto rep = verify_strong_monotonicity_sample(g, 500, 3);
        CHECK_FALSE(rep.pass);
    }
    CHECK_THROWS_AS(verify_strong_monotonicity_sample(six_player_game(), 1, 1), std::invalid_argument);
}

TEST_CASE("game validation") {
    GameSpec g = six_player_game();
    CHECK_NOTHROW(validate_game(g));
    GameSpec bad = g;
    bad.lo[0] = bad.hi[0];
    CHECK_THROWS_AS(validate_game(bad), std::invalid_argument);
    bad = g;
    bad.monotonicity_m = 0.0;
    CHECK_THROWS_AS(validate_game(bad), std::invalid_argument);
    bad = g;
    bad.lipschitz_phi[3] = 0.5;  // below |phi_c|
    CHECK_THROWS_AS(validate_game(bad), std::invalid_argument);
    bad = g;
    bad.costs[1] = QuadraticAggCost{0.001, 0.1, 6.0, 4.86, 0.0, 0.54};
    CHECK_THROWS_AS(validate_game(bad), std::invalid_argument);
}

namespace {

// Exercises the polymorphic extension point with a non-quadratic cost.
class LogBarrierCost final : public Cost {
public:
    double value(double q, double sigma) const override {
        return (q - 2) * (q - 2) + 0.01 * sigma * q - std::log(q + 10.0);
    }
    double dq(double q, double sigma) const override {
        return 2 * (q - 2) + 0.01 * sigma - 1.0 / (q + 10.0);
    }
    double dsigma(double q, double) const override { return 0.01 * q; }
};

}  // namespace

TEST_CASE("custom differentiable costs run through the oracle") {
    GameSpec g;
    g.n = 2;
    g.costs.emplace_back(std::make_shared<const LogBarrierCost>());
    g.costs.emplace_back(QuadraticAggCost{0.0, 0.0, 1.0, 1.0, 1.0, 0.0});
    g.phi = {LocalMap{1.0, 0.0}, LocalMap{1.0, 0.0}};
    g.lo = {-5, -5};
    g.hi = {5, 5};
    g.lipschitz_g = {0.01, 1e-9};
    g.lipschitz_phi = {1.0, 1.0};
    g.monotonicity_m = 1.5;
    NeSolution sol = solve_ne_oracle(g, 1e-8);
    CHECK_FALSE(sol.linear_checked);  // mixed cost kinds: fixed point only
    const double sig = aggregate(g, sol.q);
    CHECK(std::fabs(partial_gradient(g, 0, sol.q[0], sig)) < 1e-5);
    CHECK(std::fabs(partial_gradient(g, 1, sol.q[1], sig)) < 1e-5);
}
