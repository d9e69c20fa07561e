#include <sstream>

#include "doctest.h"
#include "dpnes/graph.hpp"
#include "dpnes/noise.hpp"

using namespace dpnes;

namespace {

GraphSchedule six_player_schedule() {
    auto g1 = make_digraph(6, {{0, 1}, {3, 4}, {5, 2}});
    auto g2 = make_digraph(6, {{1, 2}, {4, 5}, {0, 3}});
    auto g3 = make_digraph(6, {{2, 3}, {5, 0}, {1, 4}});
    auto g4 = make_digraph(6, {{4, 1}, {2, 5}, {3, 0}});
    return make_schedule(6, 4, 4, {g1, g2, g3, g4});
}

// Hand-rolled random digraph: connectivity not guaranteed, good enough for
// algebraic properties of the weight matrices.
Digraph random_digraph(int n, uint64_t seed, double density) {
    NoiseStream st = make_stream(seed, -77);
    std::vector<std::pair<int, int>> edges;
    uint64_t c = 0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            if (i != j && st.uniform_open(c++) < density) edges.push_back({j, i});
    return make_digraph(n, edges);
}

}  // namespace

TEST_CASE("digraph validation") {
    CHECK_THROWS_AS(make_digraph(0, {}), std::invalid_argument);
    CHECK_THROWS_AS(make_digraph(2, {{0, 2}}), std::invalid_argument);
    CHECK_THROWS_AS(make_digraph(2, {{1, 1}}), std::invalid_argument);
    auto g = make_digraph(2, {{0, 1}, {0, 1}});
    CHECK(g.edges.size() == 1);  // duplicates collapse
}

TEST_CASE("weight matrix: complete digraph on 3 nodes is uniform") {
    auto g = make_digraph(3, {{0, 1}, {0, 2}, {1, 0}, {1, 2}, {2, 0}, {2, 1}});
    auto w = build_weight_matrix(g);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(w.m.at(i, j) == doctest::Approx(1.0 / 3).epsilon(1e-15));
}

TEST_CASE("weight matrix: two nodes, single edge") {
    // 1 -> 2 (0-based 0 -> 1): out-degrees 2 and 1 with self-loops.
    auto g = make_digraph(2, {{0, 1}});
    auto w = build_weight_matrix(g);
    CHECK(w.m.at(0, 0) == doctest::Approx(0.5));
    CHECK(w.m.at(0, 1) == doctest::Approx(0.0));
    CHECK(w.m.at(1, 0) == doctest::Approx(0.5));
    CHECK(w.m.at(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("weight matrix: single node") {
    auto w = build_weight_matrix(make_digraph(1, {}));
    CHECK(w.m.at(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("weight matrix columns always sum to one") {
    for (uint64_t seed = 1; seed <= 20; ++seed) {
        const int n = 2 + static_cast<int>(seed % 7);
        auto g = random_digraph(n, seed, 0.4);
        auto w = build_weight_matrix(g);
        for (int j = 0; j < n; ++j) {
            double cs = 0;
            for (int i = 0; i < n; ++i) {
                cs += w.m.at(i, j);
                CHECK(w.m.at(i, j) >= 0.0);
                CHECK(w.m.at(i, j) <= 1.0);
            }
            CHECK(cs == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("strong connectivity") {
    auto cycle3 = make_digraph(3, {{0, 1}, {1, 2}, {2, 0}});
    CHECK(is_strongly_connected(cycle3));
    CHECK_FALSE(is_strongly_connected(make_digraph(2, {{0, 1}})));
    std::vector<std::pair<int, int>> complete;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
            if (i != j) complete.push_back({i, j});
    CHECK(is_strongly_connected(make_digraph(6, complete)));
    CHECK(is_strongly_connected(make_digraph(1, {})));
}

TEST_CASE("joint connectivity over windows") {
    CHECK(check_d_strong_connectivity(six_player_schedule()));

    // D = 1 with per-step directed cycles.
    auto cyc = make_digraph(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
    CHECK(check_d_strong_connectivity(make_schedule(4, 2, 1, {cyc, cyc})));

    // Node 2 (0-based) has no in-edges anywhere: never connected.
    auto a = make_digraph(3, {{0, 1}, {2, 1}});
    auto b = make_digraph(3, {{0, 1}, {2, 0}});
    CHECK_FALSE(check_d_strong_connectivity(make_schedule(3, 2, 2, {a, b})));
}

TEST_CASE("window of period*n is implied by a connected period union") {
    auto s = six_player_schedule();
    REQUIRE(is_strongly_connected(union_graph(s.graphs)));
    auto wide = make_schedule(s.n, s.period, s.period * s.n, s.graphs);
    CHECK(check_d_strong_connectivity(wide));
}

TEST_CASE("backward product basics") {
    auto s = six_player_schedule();
    SUBCASE("l == r is the single matrix") {
        Mat p = backward_product(s, 5, 5);
        const Mat& b = s.weight_at(5);
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j) CHECK(p.at(i, j) == b.at(i, j));
    }
    SUBCASE("invalid range") {
        CHECK_THROWS_AS(backward_product(s, 2, 3), std::invalid_argument);
        CHECK_THROWS_AS(backward_product(s, 2, -1), std::invalid_argument);
    }
    SUBCASE("matches naive multiplication") {
        Mat p = backward_product(s, 7, 0);
        Mat q = s.weight_at(0);
        for (long k = 1; k <= 7; ++k) q = matmul(s.weight_at(k), q);
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j) CHECK(p.at(i, j) == doctest::Approx(q.at(i, j)).epsilon(1e-15));
    }
    SUBCASE("fixed complete 3-graph products collapse to 1/3") {
        auto g = make_digraph(3, {{0, 1}, {0, 2}, {1, 0}, {1, 2}, {2, 0}, {2, 1}});
        auto sc = make_schedule(3, 1, 1, {g});
        Mat p = backward_product(sc, 9, 2);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) CHECK(p.at(i, j) == doctest::Approx(1.0 / 3).epsilon(1e-12));
    }
}

TEST_CASE("products stay column stochastic") {
    for (uint64_t seed = 1; seed <= 8; ++seed) {
        const int n = 3 + static_cast<int>(seed % 4);
        std::vector<Digraph> gs;
        for (int k = 0; k < 3; ++k) gs.push_back(random_digraph(n, seed * 10 + k, 0.35));
        auto s = make_schedule(n, 3, 3, gs);
        Mat p = backward_product(s, 17, 0);
        for (int j = 0; j < n; ++j) {
            double cs = 0;
            for (int i = 0; i < n; ++i) cs += p.at(i, j);
            CHECK(cs == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("mixing estimate on the six player schedule") {
    auto s = six_player_schedule();
    auto est = estimate_mixing(s, 200);
    CHECK(est.lambda_fit > 0.0);
    CHECK(est.lambda_fit < 1.0);
    CHECK(est.c1_fit > 0.0);
    CHECK(est.delta_bar > 0.0);
    CHECK(vec_sum(est.psi) == doctest::Approx(1.0).epsilon(1e-9));
    for (double v : est.psi) CHECK(v >= 0.0);

    // Envelope property: deviations sit below c1 * lambda^l, and row sums
    // never fall under the reported infimum.
    Mat p = s.weight_at(0);
    for (long l = 0; l <= 200; ++l) {
        if (l > 0) p = matmul(s.weight_at(l), p);
        const Vec& psi = est.psi_per_phase[static_cast<size_t>(l % s.period)];
        double dev = 0, min_row = 1e300;
        for (int i = 0; i < 6; ++i) {
            double row = 0;
            for (int j = 0; j < 6; ++j) {
                dev = std::max(dev, std::fabs(p.at(i, j) - psi[static_cast<size_t>(i)]));
                row += p.at(i, j);
            }
            min_row = std::min(min_row, row);
        }
        if (dev > 1e-13) CHECK(dev <= est.c1_fit * std::pow(est.lambda_fit, static_cast<double>(l)));
        CHECK(min_row >= est.delta_bar * (1.0 - 1e-12));
    }
}

TEST_CASE("mixing estimate corner cases") {
    auto complete = make_digraph(3, {{0, 1}, {0, 2}, {1, 0}, {1, 2}, {2, 0}, {2, 1}});
    auto s = make_schedule(3, 1, 1, {complete});
    auto est = estimate_mixing(s, 50);
    for (double v : est.psi) CHECK(v == doctest::Approx(1.0 / 3).epsilon(1e-12));

    auto solo = make_schedule(1, 1, 1, {make_digraph(1, {})});
    auto est1 = estimate_mixing(solo, 10);
    CHECK(est1.psi.size() == 1);
    CHECK(est1.psi[0] == doctest::Approx(1.0));
    CHECK(est1.delta_bar == doctest::Approx(1.0));

    CHECK_THROWS_AS(estimate_mixing(six_player_schedule(), 10), std::invalid_argument);
}

TEST_CASE("topology file parsing") {
    std::istringstream good(
        "# comment\n"
        "n 3 period 2 D 2\n"
        "graph 1\n"
        "edge 1 2\n"
        "edge 2 3\n"
        "graph 2\n"
        "edge 3 1\n");
    auto s = load_topology(good, "good");
    CHECK(s.n == 3);
    CHECK(s.period == 2);
    CHECK(s.d_window == 2);
    CHECK(s.graphs[0].edges.size() == 2);
    CHECK(s.graphs[1].edges == std::vector<std::pair<int, int>>{{2, 0}});

    std::istringstream bad_header("n 3 D 2 period 2\ngraph 1\ngraph 2\n");
    CHECK_THROWS_AS(load_topology(bad_header, "bad"), std::invalid_argument);
    std::istringstream bad_edge("n 2 period 1 D 1\ngraph 1\nedge 1 1\n");
    CHECK_THROWS_AS(load_topology(bad_edge, "bad"), std::invalid_argument);
    std::istringstream missing_block("n 2 period 2 D 1\ngraph 1\n");
    CHECK_THROWS_AS(load_topology(missing_block, "bad"), std::invalid_argument);
    CHECK_THROWS_AS(load_topology_file("/nonexistent/topo.txt"), std::invalid_argument);
}
