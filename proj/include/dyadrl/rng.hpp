#pragma once

#include <cmath>
#include <cstdint>

namespace dyadrl {

/// SplitMix64 pseudo-random generator.
///
/// Chosen for its tiny state, full 2^64 period, and — most importantly here —
/// a cheap stateless mixing function that lets us derive independent child
/// streams from (seed, index) pairs. Every stochastic component of the
/// engine owns its own Rng so that simulations are reproducible and
/// parallelizable without shared state.
class Rng {
public:
    explicit constexpr Rng(std::uint64_t seed) noexcept : state_(seed) {}

    constexpr std::uint64_t next_u64() noexcept {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1), 53-bit resolution.
    double uniform() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in (0, 1]; safe as a log() argument.
    double uniform_pos() noexcept {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller. Always consumes exactly two
    /// uniforms so a stream's draw count is a pure function of call count.
    double gaussian() noexcept {
        const double u1 = uniform_pos();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    double gaussian(double mean, double sd) noexcept {
        return mean + sd * gaussian();
    }

    int bernoulli(double p) noexcept { return uniform() < p ? 1 : 0; }

private:
    std::uint64_t state_;
};

namespace seeds {

/// Stateless key derivation: mixes (key, index) into a new 64-bit seed.
/// Deriving child streams this way means adding replications or dyads never
/// perturbs the streams of existing ones.
constexpr std::uint64_t derive(std::uint64_t key, std::uint64_t index) noexcept {
    std::uint64_t z = key ^ index;
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Fixed stream tags. The hierarchy is
//   master -> cell (algorithm/testbed)   via derive(master, cell_id)
//   cell   -> run                        via derive(cell_seed, run_index)
//   run    -> {environment, policy}      via derive(run_seed, tag)
//   env    -> dyad                       via derive(env_seed, dyad_position)
// The dyad-sequence stream hangs off the master directly so that every
// algorithm sharing a master seed sees the same recruitment order.
inline constexpr std::uint64_t kDyadSequence = 0x5345515545ULL;  // "SEQUE"
inline constexpr std::uint64_t kEnvironment = 0x454e56ULL;       // "ENV"
inline constexpr std::uint64_t kPolicy = 0x504f4cULL;            // "POL"
inline constexpr std::uint64_t kPopulation = 0x504f50ULL;        // "POP"
inline constexpr std::uint64_t kCalibration = 0x43414cULL;       // "CAL"
inline constexpr std::uint64_t kImputation = 0x494d50ULL;        // "IMP"
inline constexpr std::uint64_t kEvaluation = 0x4556ULL;          // "EV"
inline constexpr std::uint64_t kOptPolicy = 0x4f5054ULL;         // "OPT"
inline constexpr std::uint64_t kInitState = 0x494e4954ULL;       // "INIT"

}  // namespace seeds

}  // namespace dyadrl
