#include "dpnes/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dpnes/noise.hpp"

namespace dpnes {

namespace {

double quad_value(const QuadraticAggCost& c, double q, double sigma) {
    const double u = 1.0 - q / c.b2;
    return q * (c.a * sigma + c.b1) + c.P0 * (c.kappa * u * u + c.I);
}

double quad_dq(const QuadraticAggCost& c, double q, double sigma) {
    return c.a * sigma + c.b1 - (2.0 * c.P0 * c.kappa / c.b2) * (1.0 - q / c.b2);
}

double quad_dsigma(const QuadraticAggCost& c, double q, double) { return c.a * q; }

}  // namespace

double cost_value(const PlayerCost& c, double q, double sigma) {
    if (const auto* quad = std::get_if<QuadraticAggCost>(&c)) return quad_value(*quad, q, sigma);
    return std::get<std::shared_ptr<const Cost>>(c)->value(q, sigma);
}

double cost_dq(const PlayerCost& c, double q, double sigma) {
    if (const auto* quad = std::get_if<QuadraticAggCost>(&c)) return quad_dq(*quad, q, sigma);
    return std::get<std::shared_ptr<const Cost>>(c)->dq(q, sigma);
}

double cost_dsigma(const PlayerCost& c, double q, double sigma) {
    if (const auto* quad = std::get_if<QuadraticAggCost>(&c)) return quad_dsigma(*quad, q, sigma);
    return std::get<std::shared_ptr<const Cost>>(c)->dsigma(q, sigma);
}

double GameSpec::lipschitz_phi_max() const {
    double m = 0.0;
    for (double v : lipschitz_phi) m = std::max(m, v);
    return m;
}

void validate_game(const GameSpec& g) {
    if (g.n < 1) throw std::invalid_argument("game: n must be >= 1");
    const size_t n = static_cast<size_t>(g.n);
    if (g.costs.size() != n || g.phi.size() != n || g.lo.size() != n || g.hi.size() != n ||
        g.lipschitz_g.size() != n || g.lipschitz_phi.size() != n)
        throw std::invalid_argument("game: per-player field length mismatch");
    for (size_t i = 0; i < n; ++i) {
        if (!(g.lo[i] < g.hi[i])) throw std::invalid_argument("game: need lo < hi");
        if (!(g.lipschitz_g[i] > 0.0) || !(g.lipschitz_phi[i] > 0.0))
            throw std::invalid_argument("game: Lipschitz constants must be positive");
        if (g.lipschitz_phi[i] < std::fabs(g.phi[i].c) - 1e-12)
            throw std::invalid_argument("game: L2 must dominate |phi_c|");
        if (const auto* quad = std::get_if<QuadraticAggCost>(&g.costs[i])) {
            if (quad->b2 == 0.0) throw std::invalid_argument("game: b2 must be nonzero");
        }
    }
    if (!(g.monotonicity_m > 0.0)) throw std::invalid_argument("game: m must be positive");
}

double aggregate(const GameSpec& g, std::span<const double> q) {
    if (static_cast<int>(q.size()) != g.n) throw std::invalid_argument("aggregate: length mismatch");
    double s = 0.0;
    for (int i = 0; i < g.n; ++i) s += g.phi[static_cast<size_t>(i)](q[static_cast<size_t>(i)]);
    return s / g.n;
}

double partial_gradient(const GameSpec& g, int i, double q_i, double y) {
    if (i < 0 || i >= g.n) throw std::invalid_argument("partial_gradient: player out of range");
    const auto& c = g.costs[static_cast<size_t>(i)];
    return cost_dq(c, q_i, y) + cost_dsigma(c, q_i, y) * g.phi[static_cast<size_t>(i)].deriv() / g.n;
}

double project(const GameSpec& g, int i, double v) {
    if (i < 0 || i >= g.n) throw std::invalid_argument("project: player out of range");
    return std::clamp(v, g.lo[static_cast<size_t>(i)], g.hi[static_cast<size_t>(i)]);
}

namespace {

Vec full_gradient(const GameSpec& g, const Vec& q) {
    const double sig = aggregate(g, q);
    Vec grad(q.size(), 0.0);
    for (int i = 0; i < g.n; ++i)
        grad[static_cast<size_t>(i)] = partial_gradient(g, i, q[static_cast<size_t>(i)], sig);
    return grad;
}

// Direct solve of g_i(q, sigma(q)) = 0 for the all-quadratic, all-affine case:
//   (A_i + a_i c_i / N) q_i + (a_i / N) sum_j c_j q_j = B_i - b1_i - (a_i/N) sum_j d_j
// with A_i = 2 P0 kappa / b2^2 and B_i = 2 P0 kappa / b2.
Vec quadratic_interior_solve(const GameSpec& g) {
    const int n = g.n;
    Mat m(n, n);
    Vec rhs(static_cast<size_t>(n), 0.0);
    double d_sum = 0.0;
    for (int j = 0; j < n; ++j) d_sum += g.phi[static_cast<size_t>(j)].d;
    for (int i = 0; i < n; ++i) {
        const auto& qc = std::get<QuadraticAggCost>(g.costs[static_cast<size_t>(i)]);
        const double big_a = 2.0 * qc.P0 * qc.kappa / (qc.b2 * qc.b2);
        const double big_b = 2.0 * qc.P0 * qc.kappa / qc.b2;
        for (int j = 0; j < n; ++j) m.at(i, j) += qc.a * g.phi[static_cast<size_t>(j)].c / n;
        m.at(i, i) += big_a + qc.a * g.phi[static_cast<size_t>(i)].c / n;
        rhs[static_cast<size_t>(i)] = big_b - qc.b1 - qc.a * d_sum / n;
    }
    return solve_dense(std::move(m), std::move(rhs));
}

bool all_quadratic(const GameSpec& g) {
    for (const auto& c : g.costs)
        if (!std::holds_alternative<QuadraticAggCost>(c)) return false;
    return true;
}

}  // namespace

NeSolution solve_ne_oracle(const GameSpec& g, double tol) {
    validate_game(g);
    if (!(tol > 0.0)) throw std::invalid_argument("oracle: tol must be positive");

    // Step safely below the inverse curvature of the pseudo-gradient.
    double gamma = 1e-2;
    if (all_quadratic(g)) {
        gamma = std::numeric_limits<double>::infinity();
        for (const auto& c : g.costs) {
            const auto& qc = std::get<QuadraticAggCost>(c);
            const double curv = 2.0 * qc.P0 * qc.kappa / (qc.b2 * qc.b2) + std::fabs(qc.a);
            if (curv > 0.0) gamma = std::min(gamma, 1.0 / curv);
        }
        if (!std::isfinite(gamma)) gamma = 1e-2;
    }

    NeSolution sol;
    sol.q.assign(static_cast<size_t>(g.n), 0.0);
    for (int i = 0; i < g.n; ++i)
        sol.q[static_cast<size_t>(i)] =
            0.5 * (g.lo[static_cast<size_t>(i)] + g.hi[static_cast<size_t>(i)]);

    // The residual |q - P[q - gamma g]| understates the solution error by
    // roughly gamma*m near an interior fixed point, so iterate past the
    // requested tolerance far enough that the returned point itself is
    // tol-accurate (the linear cross-check compares solutions, not residuals).
    const double target = tol * std::min(1.0, 0.5 * gamma * g.monotonicity_m);
    const long cap = 2'000'000;
    double residual = std::numeric_limits<double>::infinity();
    long it = 0;
    for (; it < cap; ++it) {
        const Vec grad = full_gradient(g, sol.q);
        residual = 0.0;
        Vec next(sol.q.size(), 0.0);
        for (int i = 0; i < g.n; ++i) {
            const size_t k = static_cast<size_t>(i);
            next[k] = project(g, i, sol.q[k] - gamma * grad[k]);
            residual = std::max(residual, std::fabs(next[k] - sol.q[k]));
        }
        sol.q = std::move(next);
        if (residual < target) break;
    }
    if (residual >= tol) throw std::runtime_error("oracle failure: fixed point not reached within cap");
    sol.residual = residual;
    sol.iterations = it + 1;
    sol.sigma_star = aggregate(g, sol.q);

    if (all_quadratic(g)) {
        bool interior = true;
        for (int i = 0; i < g.n; ++i) {
            const size_t k = static_cast<size_t>(i);
            const double width = g.hi[k] - g.lo[k];
            if (sol.q[k] <= g.lo[k] + 1e-9 * width || sol.q[k] >= g.hi[k] - 1e-9 * width)
                interior = false;
        }
        if (interior) {
            sol.q_linear = quadratic_interior_solve(g);
            sol.linear_checked = true;
            for (size_t k = 0; k < sol.q.size(); ++k)
                sol.disagreement = std::max(sol.disagreement, std::fabs(sol.q[k] - sol.q_linear[k]));
            if (sol.disagreement > 10.0 * tol)
                throw std::runtime_error(
                    "oracle inconsistency: fixed-point and linear solves disagree beyond 10*tol");
        }
    }
    return sol;
}

MonotonicityReport verify_strong_monotonicity_sample(const GameSpec& g, long samples, uint64_t seed) {
    if (samples < 2) throw std::invalid_argument("monotonicity check: need samples >= 2");
    // Dedicated stream id, outside the player range.
    const NoiseStream st = make_stream(seed, -0x6d6f6e6f);

    MonotonicityReport rep;
    rep.samples = samples;
    rep.min_ratio = std::numeric_limits<double>::infinity();
    const size_t n = static_cast<size_t>(g.n);
    Vec q(n), qp(n);
    uint64_t ctr = 0;
    for (long s = 0; s < samples; ++s) {
        for (size_t i = 0; i < n; ++i) {
            q[i] = g.lo[i] + st.uniform_open(ctr++) * (g.hi[i] - g.lo[i]);
            qp[i] = g.lo[i] + st.uniform_open(ctr++) * (g.hi[i] - g.lo[i]);
        }
        double dist2 = 0.0;
        for (size_t i = 0; i < n; ++i) dist2 += (q[i] - qp[i]) * (q[i] - qp[i]);
        if (dist2 < 1e-20) continue;
        const Vec ga = full_gradient(g, q), gb = full_gradient(g, qp);
        double inner = 0.0;
        for (size_t i = 0; i < n; ++i) inner += (ga[i] - gb[i]) * (q[i] - qp[i]);
        rep.min_ratio = std::min(rep.min_ratio, inner / dist2);
    }
    rep.pass = rep.min_ratio >= g.monotonicity_m * (1.0 - 1e-6);
    return rep;
}

}  // namespace dpnes
