#include "tanglesim/digest.hpp"

namespace tanglesim {

namespace {

constexpr std::uint64_t kOffset0 = 0xcbf29ce484222325ull;
constexpr std::uint64_t kOffset1 = 0x84222325cbf29ce4ull;
constexpr std::uint64_t kPrime0 = 0x100000001b3ull;
constexpr std::uint64_t kPrime1 = 0x10000000233ull;

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

} // namespace

DigestBuilder::DigestBuilder(std::string_view domain) : h0_(kOffset0), h1_(kOffset1) {
    update(domain);
    // Length-prefix the domain so ("ab","c") and ("a","bc") cannot collide.
    update_u64(domain.size());
}

DigestBuilder& DigestBuilder::update(std::span<const std::uint8_t> bytes) {
    for (std::uint8_t b : bytes) {
        h0_ = (h0_ ^ b) * kPrime0;
        h1_ = (h1_ ^ b) * kPrime1;
    }
    update_u64(bytes.size());
    return *this;
}

DigestBuilder& DigestBuilder::update(std::string_view text) {
    for (unsigned char c : text) {
        h0_ = (h0_ ^ c) * kPrime0;
        h1_ = (h1_ ^ c) * kPrime1;
    }
    return *this;
}

DigestBuilder& DigestBuilder::update(const Digest& d) {
    return update(std::span<const std::uint8_t>(d.data(), d.size()));
}

DigestBuilder& DigestBuilder::update_u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        const std::uint8_t b = static_cast<std::uint8_t>(v >> (8 * i));
        h0_ = (h0_ ^ b) * kPrime0;
        h1_ = (h1_ ^ b) * kPrime1;
    }
    return *this;
}

Digest DigestBuilder::finish() const {
    Digest out{};
    std::uint64_t lanes[4] = {
        mix64(h0_),
        mix64(h0_ ^ h1_),
        mix64(h1_),
        mix64(h1_ + h0_ * kPrime0),
    };
    for (int lane = 0; lane < 4; ++lane) {
        for (int i = 0; i < 8; ++i) {
            out[static_cast<std::size_t>(lane * 8 + i)] =
                static_cast<std::uint8_t>(lanes[lane] >> (8 * i));
        }
    }
    return out;
}

Digest digest_of(std::string_view domain, std::span<const std::uint8_t> bytes) {
    return DigestBuilder(domain).update(bytes).finish();
}

std::string to_hex(const Digest& d) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(64);
    for (std::uint8_t b : d) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xf]);
    }
    return out;
}

} // namespace tanglesim
