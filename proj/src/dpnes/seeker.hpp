#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dpnes/game.hpp"
#include "dpnes/graph.hpp"
#include "dpnes/noise.hpp"
#include "dpnes/schedules.hpp"

namespace dpnes {

enum class SensitivityConvention { theoretical, empirical };

// Per-player iterate: actions with one step of history for the momentum
// term, push-sum weights, aggregate estimates, mixed values and the
// normalized trackers.
struct SeekerState {
    long l = 0;
    Vec q, q_prev, w_hat, sigma_hat, z, y;
};

// q0 must lie inside the action boxes. w_hat starts at all ones, the
// aggregate estimate at phi_i(q0_i), and z and y mirror it.
SeekerState init_state(const GameSpec& g, const Vec& q0);

// One synchronous round, consuming mu_i(l), rho(l) and the supplied mixing
// matrix and noise. The action update uses the tracker y_i(l) carried in
// from the previous round; the aggregate estimate then telescopes through
// phi at the fresh action. Throws on push-sum weight underflow (degenerate
// schedules starve a node of incoming weight).
SeekerState step(const SeekerState& st, const GameSpec& g, const ScheduleSet& s, const Mat& weight,
                 std::span<const double> noise);

struct RunRecord {
    long horizon = 0;
    // Trajectories indexed by iteration 0..horizon (values are snapshots
    // after the corresponding round; index 0 is the initial state).
    std::vector<Vec> q, y, sigma_hat, z, w_hat;
    std::vector<Vec> noise;  // noise injected at round l (size horizon)
    Vec err;                 // ||q(l) - q*||_2 when a reference was given
    Vec delta, b_hat, budget, epsilon_cum;  // privacy ledger columns, row 0 is zero
    bool has_reference = false;
    bool aborted = false;
    std::string abort_reason;
    double wall_seconds = 0.0;
};

struct RunOptions {
    uint64_t seed = 0;
    long horizon = 0;
    Vec q0;
    bool zero_noise = false;
    bool freeze_actions = false;  // consensus-only runs: skip the action update
    SensitivityConvention convention = SensitivityConvention::empirical;
    double m3 = 1.0;
    std::optional<Vec> q_star;
};

// Executes horizon rounds against graph_at(l) with fresh per-player noise,
// recording full internals. Weight underflow aborts with the partial record
// flagged. Identical (inputs, seed) produce bit-identical records.
RunRecord run(const GameSpec& g, const ScheduleSet& s, const GraphSchedule& gs, const RunOptions& opt);

struct CompactFormReport {
    double max_residual_z = 0.0;
    double max_residual_sigma = 0.0;
    double max_residual() const { return std::max(max_residual_z, max_residual_sigma); }
};

// Replays the mixed-value and aggregate-estimate recursions from the logged
// inputs on an independent path and reports the worst reconstruction
// residual. A healthy record reproduces to rounding noise.
CompactFormReport compact_form_check(const RunRecord& rec, const GameSpec& g, const ScheduleSet& s,
                                     const GraphSchedule& gs);

struct ConservationReport {
    double max_mass_residual = 0.0;    // telescoped sigma_hat mass identity
    double max_weight_drift = 0.0;     // |sum_i w_hat_i(l) - n|
};

// Checks the two invariants every run must satisfy: the weighted mass
// identity of the aggregate estimates and conservation of the push-sum
// weight total.
ConservationReport check_conservation(const RunRecord& rec, const GameSpec& g, const ScheduleSet& s);

}  // namespace dpnes
