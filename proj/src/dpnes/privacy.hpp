#pragma once

#include <string>
#include <vector>

#include "dpnes/seeker.hpp"

namespace dpnes {

// Append-only per-run privacy ledger. budget(l) = delta(l) / b_hat(l) and
// epsilon accumulates the increments exactly.
struct PrivacyLedger {
    SensitivityConvention convention = SensitivityConvention::empirical;
    std::vector<long> iters;
    Vec delta, b_hat, budget, epsilon_cum;

    double epsilon() const { return epsilon_cum.empty() ? 0.0 : epsilon_cum.back(); }
};

// Sensitivity of the transmitted estimates at iteration l >= 1.
//   theoretical: L2_max * M3 * rho(l)   (a-priori bound, M3 is a config knob)
//   empirical:   2 * L2_max * max_i |q_i(l) - q_i(l-1)|   (computable from the run)
// l = 0 is undefined (no previous action) and throws.
double sensitivity(long l, const RunRecord& rec, const GameSpec& g, const ScheduleSet& s,
                   SensitivityConvention convention, double m3 = 1.0);

// Appends one iteration. Throws on non-positive noise floor.
void accumulate(PrivacyLedger& ledger, long l, double delta, double b_hat);

// Builds the full ledger for a recorded run and mirrors the columns into the
// record (row 0 carries zeros: nothing sent before the first update differs).
PrivacyLedger attach_ledger(RunRecord& rec, const GameSpec& g, const ScheduleSet& s,
                            SensitivityConvention convention, double m3 = 1.0);

// Certifies a finite cumulative budget under the theoretical convention by
// summing rho(l)/b_hat(l) adaptively.
SummationReport check_budget_summable(const ScheduleSet& s, double tol, long cap);

const char* convention_name(SensitivityConvention c);

}  // namespace dpnes
