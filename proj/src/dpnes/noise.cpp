#include "dpnes/noise.hpp"

#include <cmath>
#include <stdexcept>

namespace dpnes {

namespace {
constexpr uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
}

uint64_t mix64(uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

NoiseStream make_stream(uint64_t master_seed, int64_t stream_id) {
    NoiseStream s;
    s.id = stream_id;
    s.key = mix64(mix64(master_seed + kGolden) ^ mix64(static_cast<uint64_t>(stream_id) * kGolden + 1));
    return s;
}

double NoiseStream::uniform_open(uint64_t counter) const {
    const uint64_t bits = mix64(key + counter * kGolden) >> 11;  // 53 bits
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double laplace_icdf(double u, double b) {
    if (!(b > 0.0)) throw std::invalid_argument("laplace: scale must be positive");
    if (!(u > -0.5 && u < 0.5)) throw std::invalid_argument("laplace: quantile outside (-1/2, 1/2)");
    if (u == 0.0) return 0.0;
    const double s = u > 0 ? 1.0 : -1.0;
    return -b * s * std::log(1.0 - 2.0 * std::fabs(u));
}

double laplace_cdf(double x, double b) {
    if (!(b > 0.0)) throw std::invalid_argument("laplace: scale must be positive");
    return x < 0 ? 0.5 * std::exp(x / b) : 1.0 - 0.5 * std::exp(-x / b);
}

double NoiseStream::laplace(uint64_t counter, double b) const {
    return laplace_icdf(uniform_open(counter) - 0.5, b);
}

std::vector<double> noise_vector(const std::vector<NoiseStream>& streams, const ScheduleSet& s, long l,
                                 bool zero_noise) {
    if (static_cast<int>(streams.size()) != s.n)
        throw std::invalid_argument("noise_vector: one stream per player required");
    if (l < 0) throw std::invalid_argument("noise_vector: l must be >= 0");
    std::vector<double> eps(streams.size(), 0.0);
    if (zero_noise) return eps;
    for (size_t i = 0; i < streams.size(); ++i)
        eps[i] = streams[i].laplace(static_cast<uint64_t>(l), s.b_at(static_cast<int>(i), l));
    return eps;
}

}  // namespace dpnes
