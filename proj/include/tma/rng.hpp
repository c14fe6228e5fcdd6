#pragma once

#include <cmath>
#include <cstdint>

namespace tma {

inline std::uint64_t mix64(std::uint64_t z)
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Counter-based stream: output k is mix64(key + k * gamma). Streams for
// different (seed, index) pairs are independent of evaluation order.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t index)
        : key_(mix64(seed + 0x9e3779b97f4a7c15ULL * (mix64(index ^ 0x5851f42d4c957f2dULL) | 1))) {}
    explicit CounterRng(std::uint64_t seed) : CounterRng(seed, 0) {}

    std::uint64_t next() { return mix64(key_ + 0x9e3779b97f4a7c15ULL * ++ctr_); }
    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }
    double normal()
    {
        double u = uniform(), v = uniform();
        return std::sqrt(-2.0 * std::log1p(-u)) * std::cos(6.283185307179586 * v);
    }
    std::uint64_t counter() const { return ctr_; }

private:
    std::uint64_t key_;
    std::uint64_t ctr_ = 0;
};

// Halton low-discrepancy sequence.
inline double halton(std::uint64_t i, unsigned base)
{
    double f = 1, r = 0;
    while (i > 0) {
        f /= base;
        r += f * static_cast<double>(i % base);
        i /= base;
    }
    return r;
}

} // namespace tma
