#pragma once

#include <cstdint>
#include <memory>
#include <variant>
#include <vector>

#include "dpnes/dense.hpp"

namespace dpnes {

// Cost of the built-in quadratic family:
//   J(q, sigma) = q * (a*sigma + b1) + P0 * (kappa * (1 - q/b2)^2 + I)
struct QuadraticAggCost {
    double a = 0.0;
    double b1 = 0.0;
    double P0 = 0.0;
    double kappa = 0.0;
    double b2 = 1.0;
    double I = 0.0;

    bool operator==(const QuadraticAggCost&) const = default;
};

// Extension point for user-defined differentiable costs J(q, sigma).
class Cost {
public:
    virtual ~Cost() = default;
    virtual double value(double q, double sigma) const = 0;
    virtual double dq(double q, double sigma) const = 0;     // partial in q at fixed sigma
    virtual double dsigma(double q, double sigma) const = 0; // partial in sigma
};

using PlayerCost = std::variant<QuadraticAggCost, std::shared_ptr<const Cost>>;

double cost_value(const PlayerCost& c, double q, double sigma);
double cost_dq(const PlayerCost& c, double q, double sigma);
double cost_dsigma(const PlayerCost& c, double q, double sigma);

// Affine local contribution phi(q) = c*q + d.
struct LocalMap {
    double c = 1.0;
    double d = 0.0;
    double operator()(double q) const { return c * q + d; }
    double deriv() const { return c; }
    bool operator==(const LocalMap&) const = default;
};

struct GameSpec {
    int n = 0;
    std::vector<PlayerCost> costs;
    std::vector<LocalMap> phi;
    std::vector<double> lo, hi;            // box action sets
    std::vector<double> lipschitz_g;       // L_{i,1}: g_i in its aggregate argument
    std::vector<double> lipschitz_phi;     // L_{i,2} >= |phi_c|
    double monotonicity_m = 0.0;

    double lipschitz_phi_max() const;
};

// Structural validation: lo < hi, positive Lipschitz constants, L2 >= |c|,
// m > 0, b2 != 0 for quadratic costs. Throws std::invalid_argument.
void validate_game(const GameSpec& g);

// sigma(q) = (1/N) * sum phi_i(q_i).
double aggregate(const GameSpec& g, std::span<const double> q);

// Pseudo-gradient through both channels, evaluated at aggregate estimate y:
//   g_i(q_i, y) = dJ/dq|_(sigma=y) + (1/N) * dJ/dsigma|_(sigma=y) * phi_i'(q_i)
double partial_gradient(const GameSpec& g, int i, double q_i, double y);

// Clamp onto [lo_i, hi_i]; idempotent and non-expansive.
double project(const GameSpec& g, int i, double v);

struct NeSolution {
    Vec q;                 // fixed-point solution
    double sigma_star = 0.0;
    double residual = 0.0; // final infinity-norm fixed-point residual
    long iterations = 0;
    bool linear_checked = false;
    Vec q_linear;          // direct linear solve (quadratic costs, interior)
    double disagreement = 0.0;
};

// Projected pseudo-gradient fixed-point iteration with a conservative step,
// plus a direct linear solve cross-check when every cost is quadratic and
// the solution is interior. Throws std::runtime_error on non-convergence or
// when the two routes disagree by more than 10*tol.
NeSolution solve_ne_oracle(const GameSpec& g, double tol);

struct MonotonicityReport {
    double min_ratio = 0.0;
    bool pass = false;
    long samples = 0;
};

// Samples pairs (q, q') uniformly from the box U and reports the minimum of
// (grad J(q) - grad J(q'))^T (q - q') / ||q - q'||^2. Passes iff the minimum
// is at least m * (1 - 1e-6).
MonotonicityReport verify_strong_monotonicity_sample(const GameSpec& g, long samples, uint64_t seed);

}  // namespace dpnes
