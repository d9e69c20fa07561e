#pragma once

#include <functional>
#include <string>
#include <vector>

namespace dpnes {

// Closed-form schedule descriptors. Runs are reproducible from config alone,
// so schedules are named families with parameters, never arbitrary code.
//
//   constant            value
//   rational-power      scale / (1 + c * l^p)
//   gated-exponential   scale / (1 + c * r^(a*l + d))
//   geometric           scale * r^l
//   affine              c*l + d            (noise scales only)
enum class ScheduleFamily { constant, rational_power, gated_exponential, geometric, affine };

struct ScheduleDescriptor {
    ScheduleFamily family = ScheduleFamily::constant;
    double value = 0.0;  // constant
    double scale = 1.0;  // rational-power, gated-exponential, geometric
    double c = 0.0;      // rational-power, gated-exponential, affine
    double p = 0.0;      // rational-power
    double r = 0.0;      // gated-exponential, geometric
    double a = 0.0;      // gated-exponential
    double d = 0.0;      // gated-exponential, affine

    double eval(long l) const;
    bool operator==(const ScheduleDescriptor&) const = default;
};

ScheduleDescriptor constant_schedule(double value);
ScheduleDescriptor rational_power_schedule(double c, double p, double scale = 1.0);
ScheduleDescriptor gated_exponential_schedule(double c, double r, double a, double d, double scale = 1.0);
ScheduleDescriptor geometric_schedule(double ratio, double scale = 1.0);
ScheduleDescriptor affine_schedule(double c, double d);

// Per-player step sizes mu_i(l), weakening factor rho(l), momentum beta_i and
// noise scales b_i(l) for an n-player run.
struct ScheduleSet {
    int n = 0;
    std::vector<ScheduleDescriptor> mu;       // size n
    ScheduleDescriptor rho;
    std::vector<double> beta;                 // size n
    std::vector<ScheduleDescriptor> noise_b;  // size n

    double mu_at(int i, long l) const { return mu[static_cast<size_t>(i)].eval(l); }
    double rho_at(long l) const { return rho.eval(l); }
    double beta_at(int i) const { return beta[static_cast<size_t>(i)]; }
    double b_at(int i, long l) const { return noise_b[static_cast<size_t>(i)].eval(l); }

    double b_hat(long l) const;   // min_i b_i(l)
    double b_check(long l) const; // max_i b_i(l)
    double mu_bar(long l) const;  // max_i mu_i(l)
    double mu_under(long l) const;

    bool operator==(const ScheduleSet&) const = default;
};

ScheduleSet make_schedule_set(int n, ScheduleDescriptor mu, ScheduleDescriptor rho, double beta,
                              ScheduleDescriptor noise_b);

struct ScheduleValues {
    double mu, rho, beta, b;
};

ScheduleValues eval_schedules(const ScheduleSet& s, int i, long l);

// Result of an adaptive series evaluation. When the tail was extrapolated,
// partial_sum already includes the tail estimate and tail_bound is the
// uncertainty of that estimate; converged means the uncertainty fell below
// tol * max(1, |partial_sum|).
struct SummationReport {
    std::string series;
    double partial_sum = 0.0;
    double tail_bound = 0.0;
    bool converged = false;
    bool divergent = false;
    long terms_used = 0;
    std::string note;
};

// Adaptively sums term(l) for l = 0,1,2,... up to cap terms. Terms must be
// nonnegative and eventually decreasing. Three regimes are recognised:
//   - windowed ratio test: terms decay geometrically, truncation bound;
//   - doubling extrapolation: partial-sum increments over [2^k, 2^{k+1})
//     shrink geometrically, the tail is extrapolated from their ratio
//     (this is what resolves slowly convergent power tails);
//   - stagnation / unit increment ratio: the series is flagged divergent.
// Anything else runs to the cap and is reported inconclusive, never passed.
SummationReport summation_oracle(const std::function<double(long)>& term, double tol, long cap,
                                 const std::string& series_id = "series");

struct AssumptionCheck {
    std::string name;
    bool pass = false;
    bool informational = false;  // reported but not gating
    double value = 0.0;
    std::string detail;
};

struct AssumptionReport {
    std::vector<AssumptionCheck> checks;
    bool all_pass = false;  // over gating checks only
    std::string summary() const;
};

// Validates the step-size and weakening-factor conditions over the horizon:
// pointwise monotonicity/range checks plus convergence of sum mu^2,
// sum (mu/rho)^2, sum rho, sum rho*b_check and sum (mu_bar - mu_under).
// Series start at l = 1; rho(0) may equal 1 for the rational-power family.
// The finiteness of sum mu itself is reported informationally: the design
// needs it finite for privacy but infinite for exact convergence, so it is
// surfaced with both readings and never gates a run.
AssumptionReport validate_assumptions(const ScheduleSet& s, long horizon, double tol);

}  // namespace dpnes
