#include "tanglesim/mam.hpp"

#include <cstring>
#include <map>
#include <optional>

namespace tanglesim::mam {

namespace {

constexpr std::uint8_t kDataKind = 0x01;
constexpr std::uint8_t kSignatureKind = 0x02;
constexpr std::uint8_t kFormatVersion = 0x01;
constexpr std::size_t kMacHalf = 16;
// kind + version + half index + address + mac half
constexpr std::size_t kSignaturePayloadSize = 3 + 32 + kMacHalf;

Digest address_of(const Digest& chain_state) {
    return DigestBuilder("mam.addr").update(chain_state).finish();
}

Digest chain_successor(const Digest& chain_state,
                       std::span<const std::uint8_t> masked) {
    const Digest body = digest_of("mam.body", masked);
    return DigestBuilder("mam.chain").update(chain_state).update(body).finish();
}

Digest owner_mac(const Digest& chain_reveal, const ChannelKey& key,
                 const Digest& address, const Digest& next_address,
                 std::uint32_t index, std::span<const std::uint8_t> masked) {
    return DigestBuilder("mam.sig")
        .update(chain_reveal)
        .update(key.bytes)
        .update(address)
        .update(next_address)
        .update_u64(index)
        .update(masked)
        .finish();
}

std::vector<std::uint8_t> mask(std::span<const std::uint8_t> input, const ChannelKey& key,
                               const Digest& address) {
    std::vector<std::uint8_t> out(input.begin(), input.end());
    for (std::size_t block = 0; block * 32 < out.size(); ++block) {
        const Digest stream = DigestBuilder("mam.keystream")
                                  .update(key.bytes)
                                  .update(address)
                                  .update_u64(block)
                                  .finish();
        const std::size_t base = block * 32;
        const std::size_t len = std::min<std::size_t>(32, out.size() - base);
        for (std::size_t i = 0; i < len; ++i) {
            out[base + i] ^= stream[i];
        }
    }
    return out;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        v |= static_cast<std::uint32_t>(in[at + static_cast<std::size_t>(i)]) << (8 * i);
    }
    return v;
}

Digest get_digest(std::span<const std::uint8_t> in, std::size_t at) {
    Digest d{};
    std::memcpy(d.data(), in.data() + at, 32);
    return d;
}

std::vector<std::uint8_t> make_signature_payload(const Digest& address, const Digest& mac,
                                                 std::uint8_t half) {
    std::vector<std::uint8_t> out;
    out.reserve(kSignaturePayloadSize);
    out.push_back(kSignatureKind);
    out.push_back(kFormatVersion);
    out.push_back(half);
    out.insert(out.end(), address.begin(), address.end());
    const std::size_t at = half == 0 ? 0 : kMacHalf;
    out.insert(out.end(), mac.begin() + at, mac.begin() + at + kMacHalf);
    return out;
}

struct ParsedData {
    std::uint32_t index;
    Digest address;
    Digest next_address;
    Digest chain_reveal;
    std::vector<std::uint8_t> masked;
};

// Returns nothing for payloads that are not MAM data transactions; throws
// ParseError for data payloads that are damaged.
std::optional<ParsedData> parse_data_payload(std::span<const std::uint8_t> payload) {
    if (payload.size() < 2 || payload[0] != kDataKind) {
        return std::nullopt;
    }
    if (payload[1] != kFormatVersion) {
        throw ParseError("mam: unsupported data payload version");
    }
    constexpr std::size_t header = 2 + 4 + 32 + 32 + 32 + 4;
    if (payload.size() < header) {
        throw ParseError("mam: truncated data payload");
    }
    ParsedData d;
    d.index = get_u32(payload, 2);
    d.address = get_digest(payload, 6);
    d.next_address = get_digest(payload, 38);
    d.chain_reveal = get_digest(payload, 70);
    const std::uint32_t body_len = get_u32(payload, 102);
    if (payload.size() != header + body_len) {
        throw ParseError("mam: data payload length mismatch");
    }
    d.masked.assign(payload.begin() + header, payload.end());
    return d;
}

// Extracts the MAC half from a signature payload belonging to `address`.
std::array<std::uint8_t, kMacHalf> parse_signature_payload(
    std::span<const std::uint8_t> payload, const Digest& address, std::uint8_t half) {
    if (payload.size() != kSignaturePayloadSize || payload[0] != kSignatureKind) {
        throw ParseError("mam: malformed signature payload");
    }
    if (payload[1] != kFormatVersion) {
        throw ParseError("mam: unsupported signature payload version");
    }
    if (payload[2] != half) {
        throw ParseError("mam: signature half out of order");
    }
    if (get_digest(payload, 3) != address) {
        throw ParseError("mam: signature payload address mismatch");
    }
    std::array<std::uint8_t, kMacHalf> out{};
    std::memcpy(out.data(), payload.data() + 35, kMacHalf);
    return out;
}

} // namespace

ChannelKey ChannelKey::from_passphrase(std::string_view phrase) {
    return ChannelKey{DigestBuilder("mam.key").update(phrase).finish()};
}

ChannelKey ChannelKey::rotated() const {
    return ChannelKey{DigestBuilder("mam.rotate").update(bytes).finish()};
}

std::vector<std::uint8_t> MamBundle::data_transaction_payload() const {
    std::vector<std::uint8_t> out;
    out.reserve(2 + 4 + 96 + 4 + masked_payload.size());
    out.push_back(kDataKind);
    out.push_back(kFormatVersion);
    put_u32(out, index);
    out.insert(out.end(), address.begin(), address.end());
    out.insert(out.end(), next_address.begin(), next_address.end());
    out.insert(out.end(), chain_reveal.begin(), chain_reveal.end());
    put_u32(out, static_cast<std::uint32_t>(masked_payload.size()));
    out.insert(out.end(), masked_payload.begin(), masked_payload.end());
    return out;
}

MamChannel MamChannel::create(std::vector<std::uint8_t> owner_secret, ChannelKey key) {
    if (owner_secret.empty()) {
        throw std::invalid_argument("MamChannel: owner secret must be non-empty");
    }
    MamChannel ch;
    ch.owner_secret_ = std::move(owner_secret);
    ch.key_ = key;
    ch.chain_state_ = DigestBuilder("mam.root")
                          .update(std::span<const std::uint8_t>(ch.owner_secret_))
                          .finish();
    ch.address_ = address_of(ch.chain_state_);
    return ch;
}

MamChannel MamChannel::create(std::string_view owner_secret, ChannelKey key) {
    return create(std::vector<std::uint8_t>(owner_secret.begin(), owner_secret.end()),
                  std::move(key));
}

MamBundle MamChannel::publish(std::span<const std::uint8_t> plaintext) {
    MamBundle bundle;
    bundle.index = index_;
    bundle.address = address_;
    bundle.chain_reveal = chain_state_;
    bundle.masked_payload = mask(plaintext, key_, address_);

    const Digest next_state = chain_successor(chain_state_, bundle.masked_payload);
    bundle.next_address = address_of(next_state);

    const Digest mac = owner_mac(bundle.chain_reveal, key_, bundle.address,
                                 bundle.next_address, bundle.index, bundle.masked_payload);
    bundle.signature_payloads[0] = make_signature_payload(bundle.address, mac, 0);
    bundle.signature_payloads[1] = make_signature_payload(bundle.address, mac, 1);

    chain_state_ = next_state;
    address_ = bundle.next_address;
    ++index_;
    return bundle;
}

MamBundle MamChannel::publish(std::string_view plaintext) {
    return publish(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(plaintext.data()), plaintext.size()));
}

MamMessage decode_bundle(const MamBundle& bundle, const ChannelKey& key) {
    std::array<std::uint8_t, kMacHalf> half0 =
        parse_signature_payload(bundle.signature_payloads[0], bundle.address, 0);
    std::array<std::uint8_t, kMacHalf> half1 =
        parse_signature_payload(bundle.signature_payloads[1], bundle.address, 1);

    // The revealed chain state must be the preimage of the bundle's address;
    // only the owner of the channel secret can know it before publication.
    if (address_of(bundle.chain_reveal) != bundle.address) {
        throw DecodeError("mam: bundle not produced by the address chain owner");
    }

    const Digest expected = owner_mac(bundle.chain_reveal, key, bundle.address,
                                      bundle.next_address, bundle.index,
                                      bundle.masked_payload);
    if (std::memcmp(expected.data(), half0.data(), kMacHalf) != 0 ||
        std::memcmp(expected.data() + kMacHalf, half1.data(), kMacHalf) != 0) {
        throw DecodeError("mam: authentication failed (wrong key or tampered bundle)");
    }

    MamMessage msg;
    msg.plaintext = mask(bundle.masked_payload, key, bundle.address); // XOR involution
    msg.index = bundle.index;
    msg.publish_time = bundle.timestamp;
    return msg;
}

MamBundle assemble_bundle(std::span<const std::uint8_t> data_payload,
                          std::span<const std::vector<std::uint8_t>> signature_payloads,
                          double timestamp) {
    if (signature_payloads.size() != 2) {
        throw ParseError("mam: a bundle carries exactly two signature payloads");
    }
    std::optional<ParsedData> data = parse_data_payload(data_payload);
    if (!data) {
        throw ParseError("mam: not a data payload");
    }
    MamBundle bundle;
    bundle.index = data->index;
    bundle.address = data->address;
    bundle.next_address = data->next_address;
    bundle.chain_reveal = data->chain_reveal;
    bundle.masked_payload = std::move(data->masked);
    bundle.signature_payloads[0] = signature_payloads[0];
    bundle.signature_payloads[1] = signature_payloads[1];
    bundle.timestamp = timestamp;
    return bundle;
}

std::vector<MamMessage> follow_channel(const Tangle& ledger, const Digest& start_address,
                                       const ChannelKey& key) {
    // Index the ledger once: data payloads and signature halves by address.
    std::map<Digest, std::pair<TxId, ParsedData>> data_by_address;
    std::map<std::pair<Digest, std::uint8_t>, std::vector<std::uint8_t>> sig_by_address;

    for (std::uint64_t i = 0; i < ledger.size(); ++i) {
        const Transaction& tx = ledger.transaction(TxId{i});
        const std::span<const std::uint8_t> payload(tx.payload);
        if (payload.size() < 2) {
            continue;
        }
        if (payload[0] == kDataKind) {
            std::optional<ParsedData> d;
            try {
                d = parse_data_payload(payload);
            } catch (const ParseError&) {
                continue; // foreign payload that happens to share the marker byte
            }
            if (d) {
                data_by_address.try_emplace(d->address, tx.id, std::move(*d));
            }
        } else if (payload[0] == kSignatureKind && payload.size() == kSignaturePayloadSize) {
            const Digest addr = get_digest(payload, 3);
            sig_by_address.try_emplace({addr, payload[2]},
                                       std::vector<std::uint8_t>(payload.begin(), payload.end()));
        }
    }

    std::vector<MamMessage> messages;
    Digest cursor = start_address;
    while (true) {
        auto it = data_by_address.find(cursor);
        if (it == data_by_address.end()) {
            break;
        }
        auto sig0 = sig_by_address.find({cursor, 0});
        auto sig1 = sig_by_address.find({cursor, 1});
        if (sig0 == sig_by_address.end() || sig1 == sig_by_address.end()) {
            break; // incomplete bundle; treat as unpublished
        }
        const ParsedData& data = it->second.second;
        MamBundle bundle;
        bundle.address = data.address;
        bundle.next_address = data.next_address;
        bundle.chain_reveal = data.chain_reveal;
        bundle.index = data.index;
        bundle.masked_payload = data.masked;
        bundle.signature_payloads[0] = sig0->second;
        bundle.signature_payloads[1] = sig1->second;
        bundle.timestamp = ledger.transaction(it->second.first).timestamp;
        messages.push_back(decode_bundle(bundle, key));
        cursor = data.next_address;
    }
    return messages;
}

} // namespace tanglesim::mam
