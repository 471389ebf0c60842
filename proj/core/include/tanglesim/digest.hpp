#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tanglesim {

using Digest = std::array<std::uint8_t, 32>;

/// Incremental 256-bit mixing digest with domain separation. This is a
/// simulation-grade one-way function, not a cryptographic hash: real hashing
/// and signing are modeled, the properties exercised here are determinism,
/// practical collision freedom, and non-invertibility through the public API.
class DigestBuilder {
public:
    explicit DigestBuilder(std::string_view domain);

    DigestBuilder& update(std::span<const std::uint8_t> bytes);
    DigestBuilder& update(std::string_view text);
    DigestBuilder& update(const Digest& d);
    DigestBuilder& update_u64(std::uint64_t v);

    Digest finish() const;

private:
    std::uint64_t h0_;
    std::uint64_t h1_;
};

Digest digest_of(std::string_view domain, std::span<const std::uint8_t> bytes);

std::string to_hex(const Digest& d);

} // namespace tanglesim
