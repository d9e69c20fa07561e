#include "dpnes/privacy.hpp"

#include <cmath>
#include <stdexcept>

namespace dpnes {

double sensitivity(long l, const RunRecord& rec, const GameSpec& g, const ScheduleSet& s,
                   SensitivityConvention convention, double m3) {
    if (l < 1) throw std::invalid_argument("sensitivity: undefined at l = 0 (no previous action)");
    if (l > rec.horizon) throw std::invalid_argument("sensitivity: iteration beyond recorded horizon");
    const double l2 = g.lipschitz_phi_max();
    if (convention == SensitivityConvention::theoretical) return l2 * m3 * s.rho_at(l);
    double dq = 0.0;
    const size_t lu = static_cast<size_t>(l);
    for (size_t i = 0; i < rec.q[lu].size(); ++i)
        dq = std::max(dq, std::fabs(rec.q[lu][i] - rec.q[lu - 1][i]));
    return 2.0 * l2 * dq;
}

void accumulate(PrivacyLedger& ledger, long l, double delta, double b_hat) {
    if (!(b_hat > 0.0)) throw std::invalid_argument("accumulate: noise floor must be positive");
    if (delta < 0.0) throw std::invalid_argument("accumulate: negative sensitivity");
    const double inc = delta / b_hat;
    ledger.iters.push_back(l);
    ledger.delta.push_back(delta);
    ledger.b_hat.push_back(b_hat);
    ledger.budget.push_back(inc);
    ledger.epsilon_cum.push_back(ledger.epsilon() + inc);
}

PrivacyLedger attach_ledger(RunRecord& rec, const GameSpec& g, const ScheduleSet& s,
                            SensitivityConvention convention, double m3) {
    PrivacyLedger led;
    led.convention = convention;
    rec.delta.assign(rec.q.size(), 0.0);
    rec.b_hat.assign(rec.q.size(), 0.0);
    rec.budget.assign(rec.q.size(), 0.0);
    rec.epsilon_cum.assign(rec.q.size(), 0.0);
    if (!rec.q.empty()) rec.b_hat[0] = s.b_hat(0);
    for (long l = 1; l <= rec.horizon; ++l) {
        const double d = sensitivity(l, rec, g, s, convention, m3);
        const double bh = s.b_hat(l);
        accumulate(led, l, d, bh);
        const size_t lu = static_cast<size_t>(l);
        rec.delta[lu] = d;
        rec.b_hat[lu] = bh;
        rec.budget[lu] = led.budget.back();
        rec.epsilon_cum[lu] = led.epsilon_cum.back();
    }
    return led;
}

SummationReport check_budget_summable(const ScheduleSet& s, double tol, long cap) {
    return summation_oracle([&](long l) { return s.rho_at(l) / s.b_hat(l); }, tol, cap,
                            "sum rho/b_hat");
}

const char* convention_name(SensitivityConvention c) {
    return c == SensitivityConvention::theoretical ? "theoretical" : "empirical";
}

}  // namespace dpnes
