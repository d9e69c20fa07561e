#pragma once

#include <string>
#include <vector>

#include "dpnes/config.hpp"
#include "dpnes/privacy.hpp"

namespace dpnes {

struct SummaryRow {
    uint64_t seed = 0;
    bool reached = false;
    long crossing = -1;              // first l with err < threshold
    double budget_at_crossing = 0.0; // per-iteration budget at that l
    double epsilon_at_crossing = 0.0;
    double final_err = 0.0;
};

struct SummaryTable {
    double threshold = 0.0;
    std::vector<SummaryRow> rows;    // one per seed, in seed order
    long not_reached = 0;
    double crossing_median = -1.0;   // over reached rows
    long crossing_min = -1;
    long crossing_max = -1;
    double final_err_median = 0.0;
    double final_err_max = 0.0;
};

// First-crossing statistics per record; permutation-invariant aggregates.
SummaryTable summarize(const std::vector<RunRecord>& records, const std::vector<uint64_t>& seeds,
                       double threshold);

struct DensityStats {
    std::vector<double> per_phase;  // directed edges (self-loops excluded) / n(n-1)
    double min_density = 0.0;
    double max_density = 0.0;
};

DensityStats density_report(const GraphSchedule& s);

struct ExperimentResult {
    RunConfig config;
    NeSolution oracle;
    std::vector<RunRecord> records;  // seed order
    SummaryTable summary;
    std::vector<std::string> csv_paths;
    std::string summary_path;
    std::string oracle_path;
};

// Full experiment: validates preconditions (unless overridden), solves the
// reference equilibrium, fans seeds out across worker threads, and writes
// per-seed CSV time series plus a summary and the oracle solution under
// cfg.out_dir. Partial artifacts from aborted runs are flagged in the
// summary file.
ExperimentResult run_experiment(const RunConfig& cfg);

// CSV schema (stable, golden-tested):
//   iter,q_1..q_n,y_1..y_n,err,delta,b_hat,budget,epsilon_cum
std::string run_record_csv(const RunRecord& rec, int n);

std::string summary_csv(const SummaryTable& t);

}  // namespace dpnes
