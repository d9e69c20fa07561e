#include "dpnes/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace dpnes {

double ScheduleDescriptor::eval(long l) const {
    const double x = static_cast<double>(l);
    switch (family) {
        case ScheduleFamily::constant:
            return value;
        case ScheduleFamily::rational_power:
            return scale / (1.0 + c * std::pow(x, p));
        case ScheduleFamily::gated_exponential:
            return scale / (1.0 + c * std::pow(r, a * x + d));
        case ScheduleFamily::geometric:
            return scale * std::pow(r, x);
        case ScheduleFamily::affine:
            return c * x + d;
    }
    throw std::logic_error("unreachable schedule family");
}

ScheduleDescriptor constant_schedule(double value) {
    ScheduleDescriptor s;
    s.family = ScheduleFamily::constant;
    s.value = value;
    return s;
}

ScheduleDescriptor rational_power_schedule(double c, double p, double scale) {
    if (c < 0 || scale <= 0) throw std::invalid_argument("rational-power: need c >= 0, scale > 0");
    ScheduleDescriptor s;
    s.family = ScheduleFamily::rational_power;
    s.c = c;
    s.p = p;
    s.scale = scale;
    return s;
}

ScheduleDescriptor gated_exponential_schedule(double c, double r, double a, double d, double scale) {
    if (c < 0 || r <= 0 || scale <= 0)
        throw std::invalid_argument("gated-exponential: need c >= 0, r > 0, scale > 0");
    ScheduleDescriptor s;
    s.family = ScheduleFamily::gated_exponential;
    s.c = c;
    s.r = r;
    s.a = a;
    s.d = d;
    s.scale = scale;
    return s;
}

ScheduleDescriptor geometric_schedule(double ratio, double scale) {
    if (ratio <= 0 || scale <= 0) throw std::invalid_argument("geometric: need ratio > 0, scale > 0");
    ScheduleDescriptor s;
    s.family = ScheduleFamily::geometric;
    s.r = ratio;
    s.scale = scale;
    return s;
}

ScheduleDescriptor affine_schedule(double c, double d) {
    ScheduleDescriptor s;
    s.family = ScheduleFamily::affine;
    s.c = c;
    s.d = d;
    return s;
}

double ScheduleSet::b_hat(long l) const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& s : noise_b) m = std::min(m, s.eval(l));
    return m;
}

double ScheduleSet::b_check(long l) const {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& s : noise_b) m = std::max(m, s.eval(l));
    return m;
}

double ScheduleSet::mu_bar(long l) const {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& s : mu) m = std::max(m, s.eval(l));
    return m;
}

double ScheduleSet::mu_under(long l) const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& s : mu) m = std::min(m, s.eval(l));
    return m;
}

ScheduleSet make_schedule_set(int n, ScheduleDescriptor mu, ScheduleDescriptor rho, double beta,
                              ScheduleDescriptor noise_b) {
    if (n < 1) throw std::invalid_argument("schedule set: n must be >= 1");
    ScheduleSet s;
    s.n = n;
    s.mu.assign(static_cast<size_t>(n), mu);
    s.rho = rho;
    s.beta.assign(static_cast<size_t>(n), beta);
    s.noise_b.assign(static_cast<size_t>(n), noise_b);
    return s;
}

ScheduleValues eval_schedules(const ScheduleSet& s, int i, long l) {
    if (i < 0 || i >= s.n) throw std::invalid_argument("eval_schedules: player out of range");
    if (l < 0) throw std::invalid_argument("eval_schedules: l must be >= 0");
    return {s.mu_at(i, l), s.rho_at(l), s.beta_at(i), s.b_at(i, l)};
}

namespace {

constexpr int kRatioWindow = 64;
constexpr double kGeomRatioCut = 0.999;        // windowed ratio test threshold
constexpr double kUnitRatioBand = 0.9995;      // doubling ratios above this are non-summable
constexpr long kZeroRun = 4096;                // consecutive exact zeros treated as a dead tail

struct KahanSum {
    double s = 0.0, comp = 0.0;
    void add(double x) {
        const double y = x - comp;
        const double t = s + y;
        comp = (t - s) - y;
        s = t;
    }
};

}  // namespace

SummationReport summation_oracle(const std::function<double(long)>& term, double tol, long cap,
                                 const std::string& series_id) {
    if (tol <= 0 || cap < 16) throw std::invalid_argument("summation_oracle: need tol > 0, cap >= 16");
    SummationReport rep;
    rep.series = series_id;

    KahanSum sum;
    std::deque<double> window;  // last kRatioWindow terms
    long zero_run = 0;
    long last_decrease = 0;
    double prev_t = std::numeric_limits<double>::infinity();

    // Partial sums at l = 2^k and the increment ratios built from them.
    std::vector<double> checkpoint_sums;
    std::vector<double> increments;
    long next_checkpoint = 16;

    auto finish = [&](bool converged, bool divergent, double value, double bound, long used,
                      const std::string& note) {
        rep.converged = converged;
        rep.divergent = divergent;
        rep.partial_sum = value;
        rep.tail_bound = bound;
        rep.terms_used = used;
        rep.note = note;
        return rep;
    };

    for (long l = 0; l < cap; ++l) {
        double t = term(l);
        if (!(t >= 0.0)) {
            if (t > -1e-300) t = 0.0;  // tolerate sign noise at underflow
            else throw std::invalid_argument("summation_oracle: negative term at l=" + std::to_string(l));
        }
        if (!std::isfinite(t) || sum.s > 1e300)
            return finish(false, true, sum.s, std::numeric_limits<double>::infinity(), l,
                          "terms or partial sums overflow");
        sum.add(t);
        zero_run = (t == 0.0) ? zero_run + 1 : 0;
        if (t < prev_t) last_decrease = l;
        prev_t = t;
        window.push_back(t);
        if (static_cast<int>(window.size()) > kRatioWindow) window.pop_front();

        // Dead tail: a long run of exact zeros (identical schedules, underflowed
        // geometric tails). Nothing left to sum.
        if (zero_run >= kZeroRun)
            return finish(true, false, sum.s, 0.0, l + 1, "tail is exactly zero");

        // Stagnation: terms have not decreased for half the horizon and are
        // bounded away from zero; partial sums grow without bound.
        if (l >= 1024 && (l - last_decrease) > std::max<long>(kZeroRun, l / 2) && t > 0.0)
            return finish(false, true, sum.s, std::numeric_limits<double>::infinity(), l + 1,
                          "terms stopped decreasing");

        // Windowed ratio test (fast path for geometric decay).
        if (l >= 2 * kRatioWindow && l % kRatioWindow == 0) {
            double rmax = 0.0;
            bool ok = true;
            for (size_t k = 1; k < window.size(); ++k) {
                if (window[k - 1] <= 0.0) {
                    ok = false;
                    break;
                }
                rmax = std::max(rmax, window[k] / window[k - 1]);
            }
            if (ok && rmax < kGeomRatioCut) {
                const double bound = window.back() * rmax / (1.0 - rmax);
                if (bound < tol * std::max(1.0, std::fabs(sum.s)))
                    return finish(true, false, sum.s, bound, l + 1, "geometric truncation");
            }
        }

        // Doubling checkpoints for power-law tails and divergence detection.
        if (l + 1 == next_checkpoint) {
            checkpoint_sums.push_back(sum.s);
            const size_t m = checkpoint_sums.size();
            if (m >= 2) increments.push_back(checkpoint_sums[m - 1] - checkpoint_sums[m - 2]);
            next_checkpoint *= 2;
            const size_t ni = increments.size();
            if (ni >= 4) {
                const double d2 = increments[ni - 3], d1 = increments[ni - 2], d0 = increments[ni - 1];
                if (d2 > 0 && d1 > 0 && d0 > 0) {
                    const double r1 = d1 / d2, r0 = d0 / d1;
                    const double rlo = std::min(r0, r1), rhi = std::max(r0, r1);
                    if (rhi >= kUnitRatioBand && rhi < 1.1 && (rhi - rlo) < 1e-3)
                        return finish(false, true, sum.s, std::numeric_limits<double>::infinity(), l + 1,
                                      "increments do not vanish under doubling");
                    if (rhi < kUnitRatioBand) {
                        // Richardson step: ratios approach their limit like 2^-k.
                        double rstar = std::clamp(2.0 * r0 - r1, 1e-12, 0.99999);
                        const double tail = d0 * rstar / (1.0 - rstar);
                        const double drift = std::fabs(r0 - r1);
                        const double unc =
                            (drift + (rhi - rlo)) * d0 / ((1.0 - rstar) * (1.0 - rstar)) + window.back();
                        const double value = sum.s + tail;
                        if (unc < tol * std::max(1.0, std::fabs(value)))
                            return finish(true, false, value, unc, l + 1, "doubling extrapolation");
                    }
                }
            }
        }
    }
    return finish(false, false, sum.s, std::numeric_limits<double>::infinity(), cap,
                  "cap reached without certificate");
}

std::string AssumptionReport::summary() const {
    std::ostringstream os;
    for (const auto& c : checks) {
        os << (c.informational ? "[info] " : (c.pass ? "[pass] " : "[FAIL] ")) << c.name;
        if (!c.detail.empty()) os << ": " << c.detail;
        os << "\n";
    }
    os << (all_pass ? "all schedule conditions hold" : "schedule conditions violated") << "\n";
    return os.str();
}

AssumptionReport validate_assumptions(const ScheduleSet& s, long horizon, double tol) {
    if (horizon < 100) throw std::invalid_argument("validate_assumptions: horizon must be >= 100");
    AssumptionReport rep;
    const double root_half = std::sqrt(2.0) / 2.0;
    const long cap = 1L << 21;

    // Pointwise range and monotonicity over [1, horizon]. l = 0 is excluded:
    // the iteration consumes schedules from the first update on, and the
    // rational-power family evaluates to exactly 1 at l = 0.
    {
        AssumptionCheck c;
        c.name = "pointwise monotonicity and range";
        c.pass = true;
        for (long l = 1; l <= horizon && c.pass; ++l) {
            const double rho = s.rho_at(l), rho_next = s.rho_at(l + 1);
            if (!(rho > 0.0 && rho < 1.0) || rho_next > rho * (1.0 + 1e-12)) {
                c.pass = false;
                c.detail = "rho out of (0,1) or increasing at l=" + std::to_string(l);
            }
            for (int i = 0; i < s.n && c.pass; ++i) {
                const double m = s.mu_at(i, l), m_next = s.mu_at(i, l + 1);
                if (!(m > 0.0 && m < 1.0) || m_next > m * (1.0 + 1e-12)) {
                    c.pass = false;
                    c.detail = "mu out of (0,1) or increasing at l=" + std::to_string(l);
                }
                if (!(s.b_at(i, l) > 0.0)) {
                    c.pass = false;
                    c.detail = "noise scale not positive at l=" + std::to_string(l);
                }
            }
        }
        for (int i = 0; i < s.n && c.pass; ++i) {
            if (!(s.beta_at(i) > 0.0 && s.beta_at(i) < root_half)) {
                c.pass = false;
                c.detail = "beta outside (0, sqrt(2)/2)";
            }
        }
        rep.checks.push_back(std::move(c));
    }

    struct Series {
        std::string name;
        std::function<double(long)> term;
    };
    // All series start at l = 1.
    std::vector<Series> series = {
        {"sum mu^2", [&](long l) {
             const double m = s.mu_bar(l + 1);
             return m * m;
         }},
        {"sum (mu/rho)^2", [&](long l) {
             const double q = s.mu_bar(l + 1) / s.rho_at(l + 1);
             return q * q;
         }},
        {"sum rho", [&](long l) { return s.rho_at(l + 1); }},
        {"sum rho*b_check", [&](long l) { return s.rho_at(l + 1) * s.b_check(l + 1); }},
        {"sum (mu_bar - mu_under)", [&](long l) { return s.mu_bar(l + 1) - s.mu_under(l + 1); }},
    };
    for (auto& sr : series) {
        const SummationReport r = summation_oracle(sr.term, tol, cap, sr.name);
        AssumptionCheck c;
        c.name = sr.name;
        c.pass = r.converged;
        c.value = r.partial_sum;
        std::ostringstream os;
        os << (r.divergent ? "diverges" : (r.converged ? "converges" : "inconclusive")) << ", value "
           << r.partial_sum << " (" << r.note << ", " << r.terms_used << " terms)";
        c.detail = os.str();
        rep.checks.push_back(std::move(c));
    }

    // sum mu is load-bearing in two incompatible ways (finite for the privacy
    // ledger, infinite for exact convergence), so it is reported but never
    // gates a run.
    {
        const SummationReport r = summation_oracle(
            [&](long l) { return s.mu_bar(l + 1); }, tol, cap, "sum mu");
        AssumptionCheck c;
        c.name = "sum mu (informational)";
        c.informational = true;
        c.pass = true;
        c.value = r.partial_sum;
        std::ostringstream os;
        os << (r.divergent ? "diverges" : (r.converged ? "converges" : "inconclusive")) << ", value "
           << r.partial_sum
           << "; finite favours a bounded privacy ledger, infinite favours exact convergence";
        c.detail = os.str();
        rep.checks.push_back(std::move(c));
    }

    rep.all_pass = true;
    for (const auto& c : rep.checks)
        if (!c.informational && !c.pass) rep.all_pass = false;
    return rep;
}

}  // namespace dpnes
