#include "tanglesim/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tanglesim {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ull;

std::uint64_t fnv1a64(std::string_view data, std::uint64_t h = kFnvOffset) {
    for (unsigned char c : data) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

} // namespace

std::uint64_t RngStream::derive_seed(std::uint64_t seed, std::string_view label) {
    return splitmix64(splitmix64(seed) ^ fnv1a64(label));
}

RngStream::RngStream(std::uint64_t seed, std::string_view label)
    : engine_(derive_seed(seed, label)) {}

double RngStream::uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::uniform_index(std::uint64_t n) {
    if (n == 0) {
        throw std::invalid_argument("uniform_index: n must be > 0");
    }
    // Rejection sampling over the largest multiple of n to avoid modulo bias.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % n;
}

double RngStream::uniform_range(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
}

double RngStream::exponential(double mean) {
    if (mean <= 0.0) {
        throw std::invalid_argument("exponential: mean must be > 0");
    }
    return -mean * std::log(1.0 - uniform01());
}

double RngStream::normal(double mean, double stddev) {
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
    return mean + stddev * r * std::cos(2.0 * std::numbers::pi * u2);
}

double RngStream::lognormal(double median, double sigma) {
    if (median <= 0.0) {
        throw std::invalid_argument("lognormal: median must be > 0");
    }
    return median * std::exp(normal(0.0, sigma));
}

bool RngStream::bernoulli(double p) {
    if (p <= 0.0) {
        return false;
    }
    if (p >= 1.0) {
        return true;
    }
    return uniform01() < p;
}

} // namespace tanglesim
