#include "dpnes/seeker.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "dpnes/privacy.hpp"

namespace dpnes {

SeekerState init_state(const GameSpec& g, const Vec& q0) {
    validate_game(g);
    if (static_cast<int>(q0.size()) != g.n) throw std::invalid_argument("init_state: q0 length mismatch");
    for (int i = 0; i < g.n; ++i) {
        const size_t k = static_cast<size_t>(i);
        if (q0[k] < g.lo[k] || q0[k] > g.hi[k])
            throw std::invalid_argument("init_state: q0 outside action set");
    }
    SeekerState st;
    st.l = 0;
    st.q = st.q_prev = q0;
    st.w_hat.assign(q0.size(), 1.0);
    st.sigma_hat.resize(q0.size());
    for (int i = 0; i < g.n; ++i)
        st.sigma_hat[static_cast<size_t>(i)] = g.phi[static_cast<size_t>(i)](q0[static_cast<size_t>(i)]);
    st.z = st.sigma_hat;
    st.y = st.sigma_hat;
    return st;
}

SeekerState step(const SeekerState& st, const GameSpec& g, const ScheduleSet& s, const Mat& weight,
                 std::span<const double> noise) {
    const int n = g.n;
    if (static_cast<int>(noise.size()) != n) throw std::invalid_argument("step: noise length mismatch");
    if (weight.rows != n || weight.cols != n) throw std::invalid_argument("step: weight shape mismatch");
    const long l = st.l;
    const double rho = s.rho_at(l);

    // Disturbed estimates actually put on the wire this round.
    Vec sent(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j)
        sent[static_cast<size_t>(j)] = st.sigma_hat[static_cast<size_t>(j)] + noise[static_cast<size_t>(j)];

    SeekerState out;
    out.l = l + 1;
    out.w_hat = matvec(weight, st.w_hat);
    for (int i = 0; i < n; ++i)
        if (out.w_hat[static_cast<size_t>(i)] < 1e-300)
            throw std::runtime_error("weight underflow: push-sum weight collapsed at node " +
                                     std::to_string(i + 1));
    out.z = matvec(weight, sent);

    out.q.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        const size_t k = static_cast<size_t>(i);
        const double grad = partial_gradient(g, i, st.q[k], st.y[k]);
        const double v = st.q[k] - s.mu_at(i, l) * grad + s.beta_at(i) * (st.q[k] - st.q_prev[k]);
        out.q[k] = project(g, i, v);
    }
    out.q_prev = st.q;

    out.sigma_hat.resize(static_cast<size_t>(n));
    out.y.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        const size_t k = static_cast<size_t>(i);
        out.sigma_hat[k] = rho * out.z[k] + g.phi[k](out.q[k]) - g.phi[k](st.q[k]);
        out.y[k] = rho * out.z[k] / out.w_hat[k];
    }
    return out;
}

RunRecord run(const GameSpec& g, const ScheduleSet& s, const GraphSchedule& gs, const RunOptions& opt) {
    if (g.n != s.n || g.n != gs.n) throw std::invalid_argument("run: player count mismatch");
    if (opt.horizon < 0) throw std::invalid_argument("run: horizon must be >= 0");
    const auto t0 = std::chrono::steady_clock::now();

    std::vector<NoiseStream> streams;
    streams.reserve(static_cast<size_t>(g.n));
    for (int i = 0; i < g.n; ++i) streams.push_back(make_stream(opt.seed, i));

    RunRecord rec;
    rec.horizon = opt.horizon;
    rec.has_reference = opt.q_star.has_value();

    SeekerState st = init_state(g, opt.q0);
    auto snapshot = [&](const SeekerState& x) {
        rec.q.push_back(x.q);
        rec.y.push_back(x.y);
        rec.sigma_hat.push_back(x.sigma_hat);
        rec.z.push_back(x.z);
        rec.w_hat.push_back(x.w_hat);
        if (rec.has_reference) {
            double e2 = 0.0;
            for (size_t k = 0; k < x.q.size(); ++k) {
                const double d = x.q[k] - (*opt.q_star)[k];
                e2 += d * d;
            }
            rec.err.push_back(std::sqrt(e2));
        }
    };
    snapshot(st);

    ScheduleSet sched = s;
    if (opt.freeze_actions) {
        // Consensus-only diagnostics leave the actions in place. Done by
        // neutralising the action update, not by a zero step size, so the
        // schedule invariants stay intact for other consumers.
        for (auto& b : sched.beta) b = 0.0;
    }

    for (long l = 0; l < opt.horizon; ++l) {
        Vec eps = noise_vector(streams, s, l, opt.zero_noise);
        rec.noise.push_back(eps);
        try {
            SeekerState next = step(st, g, sched, gs.weight_at(l), eps);
            if (opt.freeze_actions) {
                next.q = st.q;
                next.q_prev = st.q_prev;
                // Tracker algebra unchanged: sigma_hat must telescope with the
                // (frozen) actions, which it does since delta-phi is zero.
                for (int i = 0; i < g.n; ++i) {
                    const size_t k = static_cast<size_t>(i);
                    next.sigma_hat[k] = sched.rho_at(l) * next.z[k];
                }
            }
            st = std::move(next);
        } catch (const std::runtime_error& e) {
            rec.aborted = true;
            rec.abort_reason = e.what();
            rec.noise.pop_back();
            break;
        }
        snapshot(st);
    }
    rec.horizon = static_cast<long>(rec.q.size()) - 1;

    attach_ledger(rec, g, s, opt.convention, opt.m3);
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

CompactFormReport compact_form_check(const RunRecord& rec, const GameSpec& g, const ScheduleSet& s,
                                     const GraphSchedule& gs) {
    if (rec.q.size() < 2) return {};
    CompactFormReport rep;
    const int n = g.n;
    for (long l = 0; l + 1 <= rec.horizon; ++l) {
        const size_t lu = static_cast<size_t>(l);
        const Mat& b = gs.weight_at(l);
        const double rho = s.rho_at(l);
        for (int i = 0; i < n; ++i) {
            double zi = 0.0;
            for (int j = 0; j < n; ++j)
                zi += b.at(i, j) * (rec.sigma_hat[lu][static_cast<size_t>(j)] +
                                    rec.noise[lu][static_cast<size_t>(j)]);
            const size_t k = static_cast<size_t>(i);
            rep.max_residual_z = std::max(rep.max_residual_z, std::fabs(zi - rec.z[lu + 1][k]));
            const double sig = rho * rec.z[lu + 1][k] + g.phi[k](rec.q[lu + 1][k]) - g.phi[k](rec.q[lu][k]);
            rep.max_residual_sigma =
                std::max(rep.max_residual_sigma, std::fabs(sig - rec.sigma_hat[lu + 1][k]));
        }
    }
    return rep;
}

ConservationReport check_conservation(const RunRecord& rec, const GameSpec& g, const ScheduleSet& s) {
    ConservationReport rep;
    const int n = g.n;
    for (size_t l = 0; l < rec.w_hat.size(); ++l)
        rep.max_weight_drift = std::max(rep.max_weight_drift, std::fabs(vec_sum(rec.w_hat[l]) - n));
    for (long l = 0; l + 1 <= rec.horizon; ++l) {
        const size_t lu = static_cast<size_t>(l);
        double sent_mass = 0.0, dphi = 0.0;
        for (int i = 0; i < n; ++i) {
            const size_t k = static_cast<size_t>(i);
            sent_mass += rec.sigma_hat[lu][k] + rec.noise[lu][k];
            dphi += g.phi[k](rec.q[lu + 1][k]) - g.phi[k](rec.q[lu][k]);
        }
        const double expect = s.rho_at(l) * sent_mass + dphi;
        rep.max_mass_residual =
            std::max(rep.max_mass_residual, std::fabs(vec_sum(rec.sigma_hat[lu + 1]) - expect));
    }
    return rep;
}

}  // namespace dpnes
