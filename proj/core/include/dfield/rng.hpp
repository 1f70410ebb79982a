#ifndef DFIELD_RNG_HPP
#define DFIELD_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>

namespace dfield {

// splitmix64. Output sequence is fully determined by the 64-bit state, with
// no implementation-defined behaviour, so results are identical across
// platforms and standard libraries.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform on (0, 1]; never returns 0 so it is safe under log().
    double next_unit() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Uniform on [lo, hi).
    double next_uniform(double lo, double hi) {
        return lo + (hi - lo) * static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; pairs are cached.
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_unit();
        double u2 = next_unit();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// Independent per-stream generator: mixes the base seed with the stream
/// index so streams can be consumed in any order.
inline SplitMix64 stream_rng(std::uint64_t seed, std::uint64_t stream) {
    SplitMix64 mixer(seed ^ (0x9E3779B97F4A7C15ull * (stream + 1)));
    return SplitMix64(mixer.next_u64());
}

} // namespace dfield

#endif
