#include "dpnes/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>

namespace fs = std::filesystem;

namespace dpnes {

namespace {

// Fixed-width-free, locale-free float formatting; shortest round-trip is not
// required, 17 significant digits reproduce doubles exactly.
std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

SummaryTable summarize(const std::vector<RunRecord>& records, const std::vector<uint64_t>& seeds,
                       double threshold) {
    if (records.empty()) throw std::invalid_argument("summarize: need at least one record");
    if (records.size() != seeds.size()) throw std::invalid_argument("summarize: seed list mismatch");
    SummaryTable t;
    t.threshold = threshold;
    std::vector<double> crossings, finals;
    for (size_t r = 0; r < records.size(); ++r) {
        const RunRecord& rec = records[r];
        if (!rec.has_reference) throw std::invalid_argument("summarize: record lacks reference errors");
        SummaryRow row;
        row.seed = seeds[r];
        for (size_t l = 0; l < rec.err.size(); ++l) {
            if (rec.err[l] < threshold) {
                row.reached = true;
                row.crossing = static_cast<long>(l);
                row.budget_at_crossing = rec.budget[l];
                row.epsilon_at_crossing = rec.epsilon_cum[l];
                break;
            }
        }
        row.final_err = rec.err.back();
        finals.push_back(row.final_err);
        if (row.reached)
            crossings.push_back(static_cast<double>(row.crossing));
        else
            ++t.not_reached;
        t.rows.push_back(row);
    }
    if (!crossings.empty()) {
        t.crossing_median = median_of(crossings);
        t.crossing_min = static_cast<long>(*std::min_element(crossings.begin(), crossings.end()));
        t.crossing_max = static_cast<long>(*std::max_element(crossings.begin(), crossings.end()));
    }
    t.final_err_median = median_of(finals);
    t.final_err_max = *std::max_element(finals.begin(), finals.end());
    return t;
}

DensityStats density_report(const GraphSchedule& s) {
    DensityStats d;
    const double denom = static_cast<double>(s.n) * (s.n - 1);
    for (const auto& g : s.graphs)
        d.per_phase.push_back(s.n > 1 ? static_cast<double>(g.edges.size()) / denom : 0.0);
    d.min_density = *std::min_element(d.per_phase.begin(), d.per_phase.end());
    d.max_density = *std::max_element(d.per_phase.begin(), d.per_phase.end());
    return d;
}

std::string run_record_csv(const RunRecord& rec, int n) {
    std::ostringstream os;
    os << "iter";
    for (int i = 1; i <= n; ++i) os << ",q_" << i;
    for (int i = 1; i <= n; ++i) os << ",y_" << i;
    os << ",err,delta,b_hat,budget,epsilon_cum\n";
    for (size_t l = 0; l < rec.q.size(); ++l) {
        os << l;
        for (int i = 0; i < n; ++i) os << "," << fmt(rec.q[l][static_cast<size_t>(i)]);
        for (int i = 0; i < n; ++i) os << "," << fmt(rec.y[l][static_cast<size_t>(i)]);
        os << "," << (rec.has_reference ? fmt(rec.err[l]) : std::string(""));
        os << "," << fmt(rec.delta[l]) << "," << fmt(rec.b_hat[l]) << "," << fmt(rec.budget[l]) << ","
           << fmt(rec.epsilon_cum[l]) << "\n";
    }
    return os.str();
}

std::string summary_csv(const SummaryTable& t) {
    std::ostringstream os;
    os << "seed,reached,crossing,budget_at_crossing,epsilon_at_crossing,final_err\n";
    for (const auto& r : t.rows) {
        os << r.seed << "," << (r.reached ? 1 : 0) << "," << (r.reached ? r.crossing : -1) << ","
           << fmt(r.budget_at_crossing) << "," << fmt(r.epsilon_at_crossing) << "," << fmt(r.final_err)
           << "\n";
    }
    os << "# threshold," << fmt(t.threshold) << "\n";
    os << "# crossing median/min/max," << fmt(t.crossing_median) << "," << t.crossing_min << ","
       << t.crossing_max << "\n";
    os << "# not_reached," << t.not_reached << "\n";
    os << "# final_err median/max," << fmt(t.final_err_median) << "," << fmt(t.final_err_max) << "\n";
    return os.str();
}

ExperimentResult run_experiment(const RunConfig& cfg) {
    ExperimentResult res;
    res.config = cfg;

    const GameSpec game = load_game_file(cfg.game_path);
    const GraphSchedule topo = load_topology_file(cfg.topology_path);
    if (topo.n != game.n)
        throw std::invalid_argument("experiment: game and topology disagree on player count");

    if (!cfg.override_assumptions) {
        if (!check_d_strong_connectivity(topo))
            throw std::invalid_argument("experiment: schedule fails joint strong connectivity");
        const AssumptionReport rep = validate_assumptions(cfg.schedules, 2000, 0.02);
        if (!rep.all_pass)
            throw std::invalid_argument("experiment: schedule conditions violated\n" + rep.summary());
    }

    res.oracle = solve_ne_oracle(game, 1e-10);

    res.records.resize(cfg.seeds.size());
    std::vector<std::future<RunRecord>> jobs;
    for (size_t k = 0; k < cfg.seeds.size(); ++k) {
        jobs.push_back(std::async(std::launch::async, [&, k] {
            RunOptions opt;
            opt.seed = cfg.seeds[k];
            opt.horizon = cfg.horizon;
            opt.q0 = cfg.q0;
            opt.zero_noise = cfg.zero_noise;
            opt.freeze_actions = cfg.freeze_actions;
            opt.convention = cfg.convention;
            opt.m3 = cfg.m3;
            opt.q_star = res.oracle.q;
            return run(game, cfg.schedules, topo, opt);
        }));
    }
    for (size_t k = 0; k < jobs.size(); ++k) res.records[k] = jobs[k].get();

    res.summary = summarize(res.records, cfg.seeds, cfg.threshold);

    if (!cfg.out_dir.empty()) {
        fs::create_directories(cfg.out_dir);
        for (size_t k = 0; k < res.records.size(); ++k) {
            const fs::path p = fs::path(cfg.out_dir) / ("run_seed" + std::to_string(cfg.seeds[k]) + ".csv");
            std::ofstream out(p);
            if (!out) throw std::runtime_error("cannot write " + p.string());
            out << run_record_csv(res.records[k], game.n);
            res.csv_paths.push_back(p.string());
        }
        {
            const fs::path p = fs::path(cfg.out_dir) / "summary.csv";
            std::ofstream out(p);
            out << summary_csv(res.summary);
            for (size_t k = 0; k < res.records.size(); ++k)
                if (res.records[k].aborted)
                    out << "# aborted seed " << cfg.seeds[k] << ": " << res.records[k].abort_reason << "\n";
            res.summary_path = p.string();
        }
        {
            const fs::path p = fs::path(cfg.out_dir) / "oracle.json";
            std::ofstream out(p);
            out << "{\n  \"q_star\": [";
            for (size_t i = 0; i < res.oracle.q.size(); ++i)
                out << (i ? ", " : "") << fmt(res.oracle.q[i]);
            out << "],\n  \"sigma_star\": " << fmt(res.oracle.sigma_star)
                << ",\n  \"residual\": " << fmt(res.oracle.residual) << "\n}\n";
            res.oracle_path = p.string();
        }
    }
    return res;
}

}  // namespace dpnes
