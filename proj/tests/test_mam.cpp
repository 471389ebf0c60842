#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "tanglesim/mam.hpp"

using namespace tanglesim;
using namespace tanglesim::mam;

namespace {

ChannelKey key1() { return ChannelKey::from_passphrase("fleet key one"); }

MamChannel channel(const std::string& secret = "bus-secret-0",
                   ChannelKey key = key1()) {
    return MamChannel::create(secret, key);
}

// Publishes `bundle` into the ledger the way a node does: three transactions
// approving freshly selected tips.
void attach_bundle(Tangle& tangle, const MamBundle& bundle, double t, RngStream& rng) {
    const auto attach_one = [&](std::vector<std::uint8_t> payload) {
        const auto [a, b] = tangle.select_tips(rng);
        tangle.attach(std::move(payload), a, b, t);
    };
    attach_one(bundle.data_transaction_payload());
    attach_one(bundle.signature_payloads[0]);
    attach_one(bundle.signature_payloads[1]);
}

} // namespace

TEST_CASE("channel creation is deterministic in the owner secret") {
    CHECK(channel("alpha").current_address() == channel("alpha").current_address());
    CHECK(channel("alpha").current_address() != channel("beta").current_address());
    CHECK(channel().message_index() == 0);
    CHECK_THROWS_AS(MamChannel::create(std::string(), key1()), std::invalid_argument);
}

TEST_CASE("every publication is a three-payload bundle") {
    MamChannel ch = channel();
    const MamBundle bundle = ch.publish("hello");
    CHECK(bundle.signature_payloads[0].size() > 0);
    CHECK(bundle.signature_payloads[1].size() > 0);
    // one data payload + two signature payloads
    CHECK(bundle.data_transaction_payload().size() > bundle.masked_payload.size());
}

TEST_CASE("consecutive bundles chain through next_address") {
    MamChannel ch = channel();
    const MamBundle first = ch.publish("m0");
    CHECK(ch.message_index() == 1);
    const MamBundle second = ch.publish("m1");
    CHECK(second.address == first.next_address);
    CHECK(second.index == 1);
}

TEST_CASE("empty plaintext still yields a valid bundle") {
    MamChannel ch = channel();
    const MamBundle bundle = ch.publish(std::string_view{});
    CHECK(bundle.masked_payload.empty());
    const MamMessage msg = decode_bundle(bundle, key1());
    CHECK(msg.plaintext.empty());
}

TEST_CASE("decode round-trips the plaintext with the right key") {
    MamChannel ch = channel();
    const std::string text = "bus=007;lat=-22.9;lon=-43.2";
    const MamBundle bundle = ch.publish(text);
    const MamMessage msg = decode_bundle(bundle, key1());
    CHECK(std::string(msg.plaintext.begin(), msg.plaintext.end()) == text);
    CHECK(msg.index == 0);
}

TEST_CASE("the wrong key fails authenticated decode") {
    MamChannel ch = channel();
    const MamBundle bundle = ch.publish("payload");
    CHECK_THROWS_AS(decode_bundle(bundle, ChannelKey::from_passphrase("other")),
                    DecodeError);
    CHECK_THROWS_AS(decode_bundle(bundle, key1().rotated()), DecodeError);
}

TEST_CASE("key rotation revokes access to later messages") {
    const ChannelKey old_key = key1();
    MamChannel ch = channel("rotating", old_key);
    ch.publish("before rotation");
    ch.rotate_key(old_key.rotated());
    const MamBundle after = ch.publish("after rotation");
    CHECK_THROWS_AS(decode_bundle(after, old_key), DecodeError);
    CHECK_NOTHROW(decode_bundle(after, old_key.rotated()));
}

TEST_CASE("structurally damaged bundles are parse errors") {
    MamChannel ch = channel();
    MamBundle bundle = ch.publish("x");

    SUBCASE("missing signature payload") {
        bundle.signature_payloads[1].clear();
        CHECK_THROWS_AS(decode_bundle(bundle, key1()), ParseError);
    }
    SUBCASE("truncated signature payload") {
        bundle.signature_payloads[0].resize(10);
        CHECK_THROWS_AS(decode_bundle(bundle, key1()), ParseError);
    }
    SUBCASE("assembling with two payloads only is rejected") {
        std::vector<std::vector<std::uint8_t>> sigs{bundle.signature_payloads[0]};
        CHECK_THROWS_AS(assemble_bundle(bundle.data_transaction_payload(), sigs, 0.0),
                        ParseError);
    }
}

TEST_CASE("a bundle forged under a different owner secret fails verification") {
    MamChannel owner = channel("owner-secret");
    MamChannel forger = channel("forger-secret");
    MamBundle forged = forger.publish("fake reading");
    // Target the owner's current address with the forger's bundle.
    forged.address = owner.current_address();
    CHECK_THROWS_AS(decode_bundle(forged, key1()), ParseError); // sig address mismatch

    // Rebuilding the signature payloads for the stolen address still fails:
    // the revealed chain state is not the preimage of the owner's address.
    MamChannel forger2 = channel("forger-secret-2");
    MamBundle forged2 = forger2.publish("fake reading");
    MamBundle assembled;
    assembled = forged2;
    assembled.address = owner.current_address();
    // splice the forged address into fresh signature payloads
    for (int half = 0; half < 2; ++half) {
        auto& sig = assembled.signature_payloads[static_cast<std::size_t>(half)];
        std::copy(assembled.address.begin(), assembled.address.end(), sig.begin() + 3);
    }
    CHECK_THROWS_AS(decode_bundle(assembled, key1()), DecodeError);
}

TEST_CASE("follow_channel returns the stream from the start address onward") {
    Tangle tangle;
    RngStream rng(5, "node");
    MamChannel ch = channel("stream-bus");
    std::vector<MamBundle> bundles;
    std::vector<Digest> addresses;
    for (int i = 0; i < 5; ++i) {
        addresses.push_back(ch.current_address());
        MamBundle bundle = ch.publish("msg-" + std::to_string(i));
        attach_bundle(tangle, bundle, 10.0 * (i + 1), rng);
        bundles.push_back(std::move(bundle));
    }

    SUBCASE("from the head: all messages, in order, with ledger timestamps") {
        const auto messages = follow_channel(tangle, addresses[0], key1());
        REQUIRE(messages.size() == 5);
        for (std::size_t i = 0; i < messages.size(); ++i) {
            CHECK(messages[i].index == i);
            CHECK(messages[i].publish_time == doctest::Approx(10.0 * (i + 1.0)));
            const std::string text(messages[i].plaintext.begin(),
                                   messages[i].plaintext.end());
            CHECK(text == "msg-" + std::to_string(i));
        }
    }

    SUBCASE("joining at message 2 hides earlier history") {
        const auto messages = follow_channel(tangle, addresses[2], key1());
        REQUIRE(messages.size() == 3);
        CHECK(messages.front().index == 2);
        for (std::size_t i = 1; i < messages.size(); ++i) {
            CHECK(messages[i].index > messages[i - 1].index);
        }
    }

    SUBCASE("an unpublished start address yields nothing") {
        const Digest unpublished = ch.current_address(); // next, not yet published
        CHECK(follow_channel(tangle, unpublished, key1()).empty());
    }
}

TEST_CASE("randomized property campaign: structure, chaining, revocation") {
    RngStream rng(77, "prop");
    for (int i = 0; i < 300; ++i) {
        const std::string secret = "s" + std::to_string(rng.uniform_index(1u << 30));
        const ChannelKey key =
            ChannelKey::from_passphrase("k" + std::to_string(rng.uniform_index(1u << 30)));
        MamChannel ch = MamChannel::create(secret, key);
        std::string text;
        const auto len = rng.uniform_index(64);
        for (std::uint64_t j = 0; j < len; ++j) {
            text.push_back(static_cast<char>('a' + rng.uniform_index(26)));
        }
        const Digest expected_next_home = ch.current_address();
        MamBundle bundle = ch.publish(text);
        CHECK(bundle.address == expected_next_home);
        CHECK(ch.current_address() == bundle.next_address);
        const MamMessage msg = decode_bundle(bundle, key);
        CHECK(std::string(msg.plaintext.begin(), msg.plaintext.end()) == text);
        CHECK_THROWS_AS(decode_bundle(bundle, key.rotated()), DecodeError);
    }
}
