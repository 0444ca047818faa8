#ifndef XLSIM_RNG_HPP
#define XLSIM_RNG_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace xlsim::rng {

// Stream derivation scheme: every random decision in a scenario draws from a
// stream keyed by (scenario seed, salt words). Salts are small integers
// (drop index, trial index, purpose tag), folded through SplitMix64 one at a
// time. A trial's stream therefore never depends on scheduling order or
// thread count.

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

namespace salt {
inline constexpr std::uint64_t kUePlacement = 1;
inline constexpr std::uint64_t kLosDraw = 2;
inline constexpr std::uint64_t kPilotAssign = 3;
inline constexpr std::uint64_t kTrial = 4;
inline constexpr std::uint64_t kSelection = 5;
inline constexpr std::uint64_t kAllocation = 6;
inline constexpr std::uint64_t kOracle = 7;
}  // namespace salt

class Stream {
public:
    explicit Stream(std::uint64_t seed) : gen_(seed) {}

    double uniform() {  // [0, 1)
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    /// integer in [0, n)
    int uniform_int(int n) {
        // rejection keeps the draw unbiased
        const std::uint64_t bound = ~0ull - (~0ull % static_cast<std::uint64_t>(n));
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= bound);
        return static_cast<int>(x % static_cast<std::uint64_t>(n));
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    /// circularly symmetric complex normal, unit variance
    std::complex<double> cnormal() {
        const double re = normal();
        const double im = normal();
        return {re * 0.7071067811865475244, im * 0.7071067811865475244};
    }

private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

template <typename... Salts>
Stream derive_stream(std::uint64_t seed, Salts... salts) {
    std::uint64_t state = seed ^ 0x5851f42d4c957f2dull;
    std::uint64_t mixed = splitmix64(state);
    ((state ^= static_cast<std::uint64_t>(salts) + 0x9e3779b97f4a7c15ull, mixed = splitmix64(state)), ...);
    return Stream(mixed);
}

}  // namespace xlsim::rng

#endif
