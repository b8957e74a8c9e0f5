/// Counter-based deterministic RNG: same (seed, stream, counter) gives the
/// same draw on every platform, independent of call order.

#pragma once

#include <cstdint>
#include <vector>

namespace vortexlab {

class CounterRng {
public:
    CounterRng(uint64_t seed, uint64_t stream = 0) : seed_(seed), stream_(stream) {}

    // splitmix64 of the mixed (seed, stream, counter) triple.
    uint64_t next_u64() {
        uint64_t z = seed_ + 0x9e3779b97f4a7c15ULL * (counter_++ + (stream_ << 32));
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0,1).
    double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo,hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    int next_int(int n) { return (int)(next_u64() % (uint64_t)n); }

private:
    uint64_t seed_;
    uint64_t stream_;
    uint64_t counter_ = 0;
};

// Smooth band-limited random field: a few low modes with rng-drawn amplitudes,
// scaled to the requested sup-norm. Mean-zero.
std::vector<double> random_smooth_field(const class Surface& g, CounterRng& rng, double amplitude);

}  // namespace vortexlab
