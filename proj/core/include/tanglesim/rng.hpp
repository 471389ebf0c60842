#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace tanglesim {

/// Named, seeded random stream. Identical (seed, label) pairs yield identical
/// draw sequences on every platform; distinct labels give independent streams,
/// so adding one entity to a scenario does not perturb the draws of another.
///
/// All variate transforms are implemented here instead of <random>'s
/// distribution classes, whose output is not specified by the standard.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::string_view label);

    /// Uniform double in [0, 1).
    double uniform01();

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t uniform_index(std::uint64_t n);

    /// Uniform double in [lo, hi).
    double uniform_range(double lo, double hi);

    /// Exponential with the given mean (> 0).
    double exponential(double mean);

    /// Standard Box-Muller normal, scaled. Consumes two uniforms per draw.
    double normal(double mean, double stddev);

    /// Log-normal parameterized by median (scale) and shape sigma.
    /// mean = median * exp(sigma^2 / 2).
    double lognormal(double median, double sigma);

    /// true with probability p (clamped to [0,1]).
    bool bernoulli(double p);

    /// Stable 64-bit mix of (seed, label), also usable as a derived seed.
    static std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);

private:
    std::mt19937_64 engine_;
};

} // namespace tanglesim
