#pragma once

#include <cstdint>
#include <vector>

#include "dpnes/schedules.hpp"

namespace dpnes {

// Counter-based, splittable random stream. The generator is SplitMix64 used
// in counter mode: draw(k) = mix64(key + k * GOLDEN). Streams derived from
// the same master seed but different ids never share state, so replaying a
// (seed, id, counter) triple is bit-exact on every platform. This algorithm
// is pinned for the lifetime of the 1.x format; changing it would silently
// re-randomise every recorded run.
struct NoiseStream {
    uint64_t key = 0;
    int64_t id = 0;

    // Uniform on the open interval (0,1); never returns an endpoint.
    double uniform_open(uint64_t counter) const;
    // One Laplace(b) draw at the given counter. Throws on b <= 0.
    double laplace(uint64_t counter, double b) const;
};

NoiseStream make_stream(uint64_t master_seed, int64_t stream_id);

uint64_t mix64(uint64_t x);

// Laplace quantile at u in (-1/2, 1/2): -b * sign(u) * ln(1 - 2|u|).
// The median u = 0 maps to exactly 0.
double laplace_icdf(double u, double b);

// Laplace CDF, used by goodness-of-fit tests.
double laplace_cdf(double x, double b);

// One independent draw per player at iteration l, scale b_i(l). With
// zero_noise the mechanism is disabled outright and the vector is zero;
// the schedules themselves stay positive, so downstream budget accounting
// keeps its b > 0 precondition.
std::vector<double> noise_vector(const std::vector<NoiseStream>& streams, const ScheduleSet& s, long l,
                                 bool zero_noise = false);

}  // namespace dpnes
