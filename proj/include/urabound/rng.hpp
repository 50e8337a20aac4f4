// Counter-based random number generation.
//
// Every sampler in this project draws from a stream identified by
// (seed, tag, index). Streams are independent of each other and of the
// number of worker threads, so Monte Carlo results are reproducible
// bit-for-bit for any parallel schedule.
#ifndef URABOUND_RNG_HPP
#define URABOUND_RNG_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace urabound {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Stateless mix of a (seed, tag, index) triple into an initial stream state.
inline std::uint64_t mix_stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
    std::uint64_t s = seed;
    std::uint64_t a = splitmix64_next(s);
    s ^= tag * 0xD1B54A32D192ED03ull;
    std::uint64_t b = splitmix64_next(s);
    s ^= index * 0x8CB92BA72F3D8DD7ull;
    std::uint64_t c = splitmix64_next(s);
    return a ^ (b + 0x9E3779B97F4A7C15ull) ^ (c << 1);
}

// One independent random stream. Cheap to construct; construct one per
// Monte Carlo sample rather than sharing across samples.
class Rng {
  public:
    Rng(std::uint64_t seed, std::uint64_t tag, std::uint64_t index)
        : state_(mix_stream(seed, tag, index)) {}

    explicit Rng(std::uint64_t raw_state) : state_(raw_state) {}

    std::uint64_t next_u64() { return splitmix64_next(state_); }

    // Uniform on (0, 1]: never returns 0, so log() is always finite.
    double next_unit() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller (cached spare).
    double next_gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = next_unit();
        const double u2 = next_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    void fill_gaussian(double* out, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) out[i] = next_gaussian();
    }

    std::vector<double> gaussian_vector(std::size_t n) {
        std::vector<double> v(n);
        fill_gaussian(v.data(), n);
        return v;
    }

    // Gamma(shape, scale=1) via Marsaglia-Tsang; shape >= 1 only.
    double next_gamma(double shape) {
        if (shape < 1.0) throw std::invalid_argument("next_gamma: shape must be >= 1");
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = next_gaussian();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = next_unit();
            if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
        }
    }

    double next_chi2(double dof) { return 2.0 * next_gamma(0.5 * dof); }

  private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Tags keep unrelated sampling purposes on disjoint streams.
namespace stream_tag {
inline constexpr std::uint64_t kChannel = 0x01;
inline constexpr std::uint64_t kMarginal = 0x02;
inline constexpr std::uint64_t kForward = 0x03;
inline constexpr std::uint64_t kTrainInit = 0x04;
inline constexpr std::uint64_t kTrainShuffle = 0x05;
inline constexpr std::uint64_t kPowerIter = 0x06;
inline constexpr std::uint64_t kInfoDensity = 0x07;
inline constexpr std::uint64_t kAncestral = 0x08;
}  // namespace stream_tag

}  // namespace urabound

#endif
