// Command-line front end: simulate | validate | oracle.
// Exit codes: 0 success, 2 validation failure, 1 runtime error.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dpnes/harness.hpp"

using namespace dpnes;

namespace {

struct CommonArgs {
    std::string config;
    std::string data_dir;
};

RunConfig load(const CommonArgs& a) { return load_config(a.config, resolve_data_dir(a.data_dir)); }

int cmd_oracle(const CommonArgs& a) {
    const RunConfig cfg = load(a);
    const GameSpec game = load_game_file(cfg.game_path);
    const NeSolution sol = solve_ne_oracle(game, 1e-10);
    for (size_t i = 0; i < sol.q.size(); ++i)
        std::printf("q_%zu* = %.6f\n", i + 1, sol.q[i]);
    std::printf("sigma* = %.6f\n", sol.sigma_star);
    std::printf("fixed-point residual = %.3e (%ld iterations)\n", sol.residual, sol.iterations);
    if (sol.linear_checked)
        std::printf("linear-solve cross-check: max disagreement = %.3e\n", sol.disagreement);
    return 0;
}

int cmd_validate(const CommonArgs& a) {
    const RunConfig cfg = load(a);
    const GameSpec game = load_game_file(cfg.game_path);
    const GraphSchedule topo = load_topology_file(cfg.topology_path);
    bool ok = true;

    if (topo.n != game.n) {
        std::printf("[FAIL] topology/game player counts differ (%d vs %d)\n", topo.n, game.n);
        ok = false;
    }
    const bool conn = check_d_strong_connectivity(topo);
    std::printf("[%s] joint strong connectivity over D=%d windows\n", conn ? "pass" : "FAIL",
                topo.d_window);
    ok &= conn;

    const AssumptionReport rep = validate_assumptions(cfg.schedules, 2000, 0.02);
    std::fputs(rep.summary().c_str(), stdout);
    ok &= rep.all_pass;

    const MonotonicityReport mono = verify_strong_monotonicity_sample(game, 1000, 12345);
    std::printf("[%s] strong monotonicity sample: min ratio %.6g (declared m = %.6g)\n",
                mono.pass ? "pass" : "FAIL", mono.min_ratio, game.monotonicity_m);
    ok &= mono.pass;

    const DensityStats dens = density_report(topo);
    std::printf("[info] graph density per phase: min %.4f max %.4f\n", dens.min_density,
                dens.max_density);
    return ok ? 0 : 2;
}

int cmd_simulate(const CommonArgs& a, const std::vector<uint64_t>& seeds, long horizon, bool zero_noise,
                 const std::string& convention, const std::string& out_dir, double threshold,
                 bool override_assumptions) {
    RunConfig cfg = load(a);
    if (!seeds.empty()) cfg.seeds = seeds;
    if (horizon > 0) cfg.horizon = horizon;
    if (zero_noise) cfg.zero_noise = true;
    if (!convention.empty()) {
        if (convention == "theoretical")
            cfg.convention = SensitivityConvention::theoretical;
        else if (convention == "empirical")
            cfg.convention = SensitivityConvention::empirical;
        else
            throw std::invalid_argument("convention must be theoretical or empirical");
    }
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (cfg.out_dir.empty()) throw std::invalid_argument("simulate needs --out (or 'out' in the config)");
    if (threshold > 0) cfg.threshold = threshold;
    if (override_assumptions) cfg.override_assumptions = true;

    const ExperimentResult res = run_experiment(cfg);
    std::printf("wrote %zu run CSV(s), summary and oracle under %s\n", res.csv_paths.size(),
                cfg.out_dir.c_str());
    for (const auto& row : res.summary.rows) {
        if (row.reached)
            std::printf("seed %llu: crossed %.3g at iter %ld, final err %.4g\n",
                        static_cast<unsigned long long>(row.seed), res.summary.threshold, row.crossing,
                        row.final_err);
        else
            std::printf("seed %llu: threshold %.3g not reached, final err %.4g\n",
                        static_cast<unsigned long long>(row.seed), res.summary.threshold, row.final_err);
    }
    if (res.summary.crossing_median >= 0)
        std::printf("crossing median %.1f (min %ld, max %ld)\n", res.summary.crossing_median,
                    res.summary.crossing_min, res.summary.crossing_max);
    bool aborted = false;
    for (const auto& r : res.records) aborted |= r.aborted;
    if (aborted) std::printf("warning: at least one run aborted early; partial artifacts flagged\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distributed equilibrium-seeking simulator with a differential-privacy ledger"};
    app.require_subcommand(1);

    CommonArgs common;
    std::vector<uint64_t> seeds;
    uint64_t seed = 0;
    bool seed_set = false;
    long horizon = 0;
    bool zero_noise = false, override_assumptions = false;
    std::string convention, out_dir;
    double threshold = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config, "Config file path or preset name")->required();
        sub->add_option("--data-dir", common.data_dir, "Data directory (presets, games, topologies)");
    };

    CLI::App* sim = app.add_subcommand("simulate", "Run the seeker and write CSV artifacts");
    add_common(sim);
    sim->add_option("--seed", seed, "Single seed")->each([&](const std::string&) { seed_set = true; });
    sim->add_option("--seeds", seeds, "Comma-separated seed list")->delimiter(',');
    sim->add_option("--horizon", horizon, "Override horizon");
    sim->add_flag("--zero-noise", zero_noise, "Disable the privacy noise");
    sim->add_option("--convention", convention, "Sensitivity convention: theoretical|empirical");
    sim->add_option("--out", out_dir, "Output directory");
    sim->add_option("--threshold", threshold, "Crossing threshold for the summary");
    sim->add_flag("--override-assumptions", override_assumptions,
                  "Run even if schedule validation fails");

    CLI::App* val = app.add_subcommand("validate", "Run assumption and connectivity validators only");
    add_common(val);

    CLI::App* orc = app.add_subcommand("oracle", "Print the reference equilibrium");
    add_common(orc);

    try {
        app.parse(argc, argv);
        if (sim->parsed()) {
            if (seed_set && !seeds.empty())
                throw std::invalid_argument("use either --seed or --seeds, not both");
            if (seed_set) seeds = {seed};
            return cmd_simulate(common, seeds, horizon, zero_noise, convention, out_dir, threshold,
                                override_assumptions);
        }
        if (val->parsed()) return cmd_validate(common);
        if (orc->parsed()) return cmd_oracle(common);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
