// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "raychan/protocol.hpp"
#include "wire_gen.hpp"

using namespace raychan;

TEST_CASE("shutdown request is a 5-byte frame") {
    const auto bytes = encode(ShutdownRequest{});
    REQUIRE(bytes.size() == 5);
    CHECK(bytes[0] == 1);  // payload length 1, little-endian
    CHECK(bytes[1] == 0);
    CHECK(bytes[2] == 0);
    CHECK(bytes[3] == 0);
    CHECK(bytes[4] == static_cast<std::uint8_t>(MessageTag::shutdown_request));
}

TEST_CASE("channel request wire layout: tag + f64 + u64, length 17") {
    const auto bytes = encode(ChannelRequest{1.0, 0});
    REQUIRE(bytes.size() == 21);
    CHECK(bytes[0] == 17);
    CHECK(bytes[4] == static_cast<std::uint8_t>(MessageTag::channel_request));
    // IEEE-754 double 1.0 little-endian: 00 00 00 00 00 00 f0 3f
    const std::uint8_t expected[8] = {0, 0, 0, 0, 0, 0, 0xf0, 0x3f};
    for (int i = 0; i < 8; ++i) CHECK(bytes[5 + i] == expected[i]);
    for (int i = 0; i < 8; ++i) CHECK(bytes[13 + i] == 0);
}

TEST_CASE("round trip identity and canonical bytes over random messages") {
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 3000; ++i) {
        const WireMessage msg = testgen::random_message(rng);
        const auto bytes = encode(msg);
        const WireMessage back = decode(bytes);
        CHECK(back == msg);
        CHECK(encode(back) == bytes);
    }
}

TEST_CASE("unknown tag is a distinct error") {
    std::vector<std::uint8_t> frame{1, 0, 0, 0, 0xFF};
    try {
        decode(frame);
        FAIL("expected ProtocolError");
    } catch (const ProtocolError& e) {
        CHECK(e.kind == ProtocolErrorKind::unknown_tag);
    }
}

TEST_CASE("truncated frames are rejected without a partial message") {
    // declared length exceeds available bytes
    std::vector<std::uint8_t> frame{42, 0, 0, 0, static_cast<std::uint8_t>(MessageTag::shutdown_request)};
    try {
        decode(frame);
        FAIL("expected ProtocolError");
    } catch (const ProtocolError& e) {
        CHECK(e.kind == ProtocolErrorKind::truncated);
    }

    // field runs past the declared payload: ChannelRequest with a short body
    std::vector<std::uint8_t> short_body{9, 0, 0, 0,
                                         static_cast<std::uint8_t>(MessageTag::channel_request),
                                         1, 2, 3, 4, 5, 6, 7, 8};
    try {
        decode(short_body);
        FAIL("expected ProtocolError");
    } catch (const ProtocolError& e) {
        CHECK(e.kind == ProtocolErrorKind::truncated);
    }
}

TEST_CASE("length mismatch: trailing bytes inside the declared length") {
    auto bytes = encode(ChannelRequest{2.5, 9});
    // grow the declared payload and append a stray byte
    bytes[0] = static_cast<std::uint8_t>(bytes[0] + 1);
    bytes.push_back(0xAB);
    try {
        decode(bytes);
        FAIL("expected ProtocolError");
    } catch (const ProtocolError& e) {
        CHECK(e.kind == ProtocolErrorKind::length_mismatch);
    }

    // bytes beyond the declared frame end
    auto extra = encode(ShutdownRequest{});
    extra.push_back(0x00);
    try {
        decode(extra);
        FAIL("expected ProtocolError");
    } catch (const ProtocolError& e) {
        CHECK(e.kind == ProtocolErrorKind::length_mismatch);
    }
}

TEST_CASE("concatenated frames split unambiguously") {
    std::mt19937_64 rng(77);
    std::vector<WireMessage> messages;
    std::vector<std::uint8_t> stream;
    for (int i = 0; i < 50; ++i) {
        messages.push_back(testgen::random_message(rng));
        const auto bytes = encode(messages.back());
        stream.insert(stream.end(), bytes.begin(), bytes.end());
    }
    std::size_t offset = 0;
    for (const WireMessage& expected : messages) {
        const std::span<const std::uint8_t> rest(stream.data() + offset, stream.size() - offset);
        const std::size_t size = frame_size(rest);
        REQUIRE(size > 0);
        CHECK(decode(rest.subspan(0, size)) == expected);
        offset += size;
    }
    CHECK(offset == stream.size());

    // incomplete tail reports "need more"
    CHECK(frame_size(std::span<const std::uint8_t>(stream.data(), 3)) == 0);
}

TEST_CASE("documented hex example: ChannelRequest{sim_time=1.0, tx_id=0}") {
    // 11 00 00 00 | 03 | 00 00 00 00 00 00 f0 3f | 00 00 00 00 00 00 00 00
    const std::vector<std::uint8_t> expected{0x11, 0x00, 0x00, 0x00, 0x03, 0x00, 0x00, 0x00,
                                             0x00, 0x00, 0x00, 0xf0, 0x3f, 0x00, 0x00, 0x00,
                                             0x00, 0x00, 0x00, 0x00, 0x00};
    CHECK(encode(ChannelRequest{1.0, 0}) == expected);
}
