#include <cmath>

#include "doctest.h"
#include "dpnes/config.hpp"
#include "dpnes/privacy.hpp"

using namespace dpnes;

namespace {

const std::string kData = DPNES_DATA_DIR;

struct Scenario {
    RunConfig cfg;
    GameSpec game;
    GraphSchedule topo;
};

Scenario six_player() {
    Scenario s;
    s.cfg = load_config("ieee30-6p", kData);
    s.game = load_game_file(s.cfg.game_path);
    s.topo = load_topology_file(s.cfg.topology_path);
    return s;
}

RunRecord short_run(const Scenario& sc, long horizon, SensitivityConvention conv) {
    RunOptions opt;
    opt.seed = 3;
    opt.horizon = horizon;
    opt.q0 = sc.cfg.q0;
    opt.convention = conv;
    return run(sc.game, sc.cfg.schedules, sc.topo, opt);
}

}  // namespace

TEST_CASE("sensitivity conventions") {
    auto sc = six_player();
    RunRecord rec = short_run(sc, 80, SensitivityConvention::theoretical);

    SUBCASE("theoretical tracks the weakening factor") {
        const double d = sensitivity(64, rec, sc.game, sc.cfg.schedules,
                                     SensitivityConvention::theoretical, 1.0);
        CHECK(d == doctest::Approx(2.336e-3).epsilon(2e-4));
        // scaling knob passes straight through
        const double d3 = sensitivity(64, rec, sc.game, sc.cfg.schedules,
                                      SensitivityConvention::theoretical, 3.0);
        CHECK(d3 == doctest::Approx(3 * d));
    }
    SUBCASE("empirical uses the recorded displacement") {
        RunRecord fake = rec;
        fake.q[40] = {1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
        fake.q[39] = {0.9, 0.8, 1.0, 1.0, 1.0, 1.0};
        const double d =
            sensitivity(40, fake, sc.game, sc.cfg.schedules, SensitivityConvention::empirical, 1.0);
        CHECK(d == doctest::Approx(0.4));  // 2 * L2 * max|dq| = 2 * 1 * 0.2
    }
    SUBCASE("converged tail has vanishing empirical sensitivity") {
        RunRecord fake = rec;
        fake.q[50] = fake.q[49];
        CHECK(sensitivity(50, fake, sc.game, sc.cfg.schedules, SensitivityConvention::empirical, 1.0) ==
              0.0);
    }
    CHECK_THROWS_AS(
        sensitivity(0, rec, sc.game, sc.cfg.schedules, SensitivityConvention::empirical, 1.0),
        std::invalid_argument);
    CHECK_THROWS_AS(
        sensitivity(81, rec, sc.game, sc.cfg.schedules, SensitivityConvention::empirical, 1.0),
        std::invalid_argument);
}

TEST_CASE("ledger accumulation") {
    PrivacyLedger led;
    accumulate(led, 64, 2.336e-3, 66.0);
    CHECK(led.budget.back() == doctest::Approx(3.54e-5).epsilon(1e-3));
    accumulate(led, 65, 0.0, 67.0);
    CHECK(led.budget.back() == 0.0);
    CHECK(led.epsilon() == doctest::Approx(led.budget[0]));
    accumulate(led, 66, 1e-5, 1.0);
    accumulate(led, 67, 1e-5, 1.0);
    CHECK(led.epsilon_cum.back() - led.epsilon_cum[led.epsilon_cum.size() - 3] ==
          doctest::Approx(2e-5));
    CHECK_THROWS_AS(accumulate(led, 68, 1e-5, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(accumulate(led, 68, -1e-5, 1.0), std::invalid_argument);
    // append-only: epsilon equals the exact sum of increments
    double s = 0;
    for (double b : led.budget) s += b;
    CHECK(led.epsilon() == doctest::Approx(s).epsilon(1e-15));
    for (size_t k = 1; k < led.epsilon_cum.size(); ++k)
        CHECK(led.epsilon_cum[k] >= led.epsilon_cum[k - 1]);
}

TEST_CASE("budget summability") {
    auto sc = six_player();
    SUBCASE("reference schedules") {
        auto rep = check_budget_summable(sc.cfg.schedules, 0.02, 1L << 21);
        CHECK(rep.converged);
        CHECK_FALSE(rep.divergent);
    }
    SUBCASE("harmonic weakening against constant noise diverges") {
        auto s = make_schedule_set(2, sc.cfg.schedules.mu[0], rational_power_schedule(1.0, 1.0), 0.6,
                                   constant_schedule(1.0));
        auto rep = check_budget_summable(s, 0.02, 1L << 21);
        CHECK_FALSE(rep.converged);
        CHECK(rep.divergent);
    }
    SUBCASE("geometric weakening sums in closed form") {
        auto s = make_schedule_set(2, sc.cfg.schedules.mu[0], geometric_schedule(0.5, 0.5), 0.6,
                                   constant_schedule(1.0));
        auto rep = check_budget_summable(s, 1e-9, 1L << 20);
        CHECK(rep.converged);
        CHECK(rep.partial_sum == doctest::Approx(1.0).epsilon(1e-9));  // 2 * scale
    }
}

TEST_CASE("ledger columns attach to runs") {
    auto sc = six_player();
    RunRecord rec = short_run(sc, 300, SensitivityConvention::theoretical);
    CHECK(rec.budget[0] == 0.0);
    CHECK(rec.delta[0] == 0.0);
    CHECK(rec.budget[64] == doctest::Approx(3.54e-5).epsilon(1e-2));
    for (size_t l = 1; l < rec.epsilon_cum.size(); ++l) {
        CHECK(rec.epsilon_cum[l] >= rec.epsilon_cum[l - 1]);
        CHECK(rec.budget[l] == doctest::Approx(rec.delta[l] / rec.b_hat[l]));
    }
}

TEST_CASE("cumulative budget is numerically Cauchy under the theoretical convention") {
    auto sc = six_player();
    RunRecord rec = short_run(sc, 1024, SensitivityConvention::theoretical);
    const double e256 = rec.epsilon_cum[256];
    const double e512 = rec.epsilon_cum[512];
    const double e1024 = rec.epsilon_cum[1024];
    CHECK(e1024 - e512 < 0.5 * (e512 - e256) + 1e-12);
    CHECK(e1024 - e512 < 0.1 * e256);
}

TEST_CASE("empirical sensitivity vanishes on converging runs") {
    auto sc = six_player();
    RunRecord rec = short_run(sc, 2000, SensitivityConvention::empirical);
    CHECK(rec.delta[2000] < 1e-6);
    CHECK(rec.delta[2000] < rec.delta[100]);
}
