#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "tanglesim/digest.hpp"
#include "tanglesim/tangle.hpp"

namespace tanglesim::mam {

/// Structurally invalid bundle or payload bytes.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Authentication failure: wrong channel key, wrong owner, or tampered data.
struct DecodeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// 32-byte symmetric masking key for a channel.
struct ChannelKey {
    Digest bytes{};

    static ChannelKey from_passphrase(std::string_view phrase);
    static ChannelKey from_bytes(const Digest& raw) { return ChannelKey{raw}; }

    /// Deterministic successor key, distinct from every ancestor.
    ChannelKey rotated() const;

    friend bool operator==(const ChannelKey& a, const ChannelKey& b) {
        return a.bytes == b.bytes;
    }
};

/// One publication unit: three ledger transactions (one data, two signature).
/// `masked_payload` is the keystream-masked message body; the signature
/// payloads carry the owner MAC split in two halves. `timestamp` is filled
/// from the ledger once the bundle has been attached.
struct MamBundle {
    Digest address{};
    Digest next_address{};
    Digest chain_reveal{};
    std::uint32_t index = 0;
    std::vector<std::uint8_t> masked_payload;
    std::array<std::vector<std::uint8_t>, 2> signature_payloads;
    double timestamp = 0.0;

    /// Serialized payload of the data transaction.
    std::vector<std::uint8_t> data_transaction_payload() const;
};

struct MamMessage {
    std::vector<std::uint8_t> plaintext;
    std::uint32_t index = 0;
    double publish_time = 0.0;
};

/// Owner-side channel state: a forward-only hash chain over addresses. Each
/// publish advances the chain; the address of message i-1 is not recoverable
/// from the bundle at i.
class MamChannel {
public:
    /// Throws std::invalid_argument on an empty owner secret.
    static MamChannel create(std::vector<std::uint8_t> owner_secret, ChannelKey key);
    static MamChannel create(std::string_view owner_secret, ChannelKey key);

    /// Builds the 3-payload bundle for `plaintext` at the current address and
    /// advances channel state (index + 1, address = bundle.next_address).
    MamBundle publish(std::span<const std::uint8_t> plaintext);
    MamBundle publish(std::string_view plaintext);

    /// Installs a new masking key; subsequent bundles are undecodable with
    /// keys issued before the rotation.
    void rotate_key(ChannelKey next) { key_ = next; }

    const Digest& current_address() const { return address_; }
    std::uint32_t message_index() const { return index_; }
    const ChannelKey& key() const { return key_; }

private:
    MamChannel() = default;

    std::vector<std::uint8_t> owner_secret_;
    ChannelKey key_{};
    Digest chain_state_{}; // preimage of the current address
    Digest address_{};
    std::uint32_t index_ = 0;
};

/// Authenticates and unmasks a bundle. Throws ParseError on structural
/// damage and DecodeError when the key is wrong or the bundle was not
/// produced by the owner of the address chain.
MamMessage decode_bundle(const MamBundle& bundle, const ChannelKey& key);

/// Reassembles a bundle from ledger payload bytes (one data payload plus the
/// signature payloads). Throws ParseError unless exactly two well-formed
/// signature payloads are supplied.
MamBundle assemble_bundle(std::span<const std::uint8_t> data_payload,
                          std::span<const std::vector<std::uint8_t>> signature_payloads,
                          double timestamp = 0.0);

/// Walks the channel from `start_address`, decoding every bundle found in
/// the ledger, in chronological order. Messages published before the start
/// address are unreachable. An unpublished start address yields an empty
/// list.
std::vector<MamMessage> follow_channel(const Tangle& ledger, const Digest& start_address,
                                       const ChannelKey& key);

} // namespace tanglesim::mam
