// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "raychan/geom.hpp"

namespace raychan {

// Wire format: every message travels as one frame
//
//   u32 payload_length | payload
//   payload = u8 tag | fields in declared order
//
// little-endian throughout; integers are 8-byte unsigned (booleans 0/1),
// reals 8-byte IEEE-754, strings and lists a u32 length/count followed by
// the elements, complex numbers (re, im) pairs of f64.

enum class MessageTag : std::uint8_t {
    init_request = 1,
    init_response = 2,
    channel_request = 3,
    channel_response = 4,
    shutdown_request = 5,
    shutdown_response = 6,
};

struct NodeInit {
    std::uint64_t id = 0;
    std::uint64_t model = 0;  // 0 constant_position, 1 random_walk_3d
    Vec3 position;
    double speed = 0.0;
    std::uint64_t seed = 0;

    bool operator==(const NodeInit&) const = default;
};

struct InitRequest {
    std::string scene_path;        // descriptor on the server's filesystem, or
    std::string scene_inline_xml;  // descriptor text (takes precedence when non-empty)
    double center_frequency = 0.0;
    double bandwidth = 0.0;
    std::uint64_t fft_size = 0;
    double noise_floor_dbm = 0.0;
    double tx_power_dbm = 0.0;
    std::uint64_t max_reflection_order = 0;
    std::uint64_t prefetch_horizon = 0;
    std::uint64_t batch_budget = 0;
    double dt_mob = 0.0;
    double direction_hold = 0.0;
    std::vector<NodeInit> nodes;

    bool operator==(const InitRequest&) const = default;
};

struct InitResponse {
    bool ok = false;
    std::string error_text;

    bool operator==(const InitResponse&) const = default;
};

struct ChannelRequest {
    double sim_time = 0.0;
    std::uint64_t tx_id = 0;

    bool operator==(const ChannelRequest&) const = default;
};

struct ResponseRecord {
    std::uint64_t rx_id = 0;
    double valid_from = 0.0;  // simulation time the record becomes usable
    double path_loss = 0.0;   // dB
    double delay = 0.0;       // s
    double ttl = 0.0;         // s, +inf for stationary pairs
    std::vector<std::complex<double>> cfr;

    bool operator==(const ResponseRecord&) const = default;
};

struct ChannelResponse {
    bool ok = false;
    std::string error_text;
    std::vector<ResponseRecord> records;

    bool operator==(const ChannelResponse&) const = default;
};

struct ShutdownRequest {
    bool operator==(const ShutdownRequest&) const = default;
};

struct ShutdownResponse {
    bool operator==(const ShutdownResponse&) const = default;
};

using WireMessage = std::variant<InitRequest, InitResponse, ChannelRequest, ChannelResponse,
                                 ShutdownRequest, ShutdownResponse>;

enum class ProtocolErrorKind { unknown_tag, truncated, length_mismatch, too_long };

struct ProtocolError : std::runtime_error {
    ProtocolError(ProtocolErrorKind k, const std::string& what)
        : std::runtime_error(what), kind(k) {}
    ProtocolErrorKind kind;
};

/// Complete frame (length prefix included); canonical, equal messages give
/// identical bytes. Throws too_long if any list exceeds 2^32 - 1 entries.
std::vector<std::uint8_t> encode(const WireMessage& msg);

/// Inverse of encode over exactly one complete frame. Truncated input,
/// an unknown tag, or bytes left over inside the declared length each raise
/// a distinct ProtocolError.
WireMessage decode(std::span<const std::uint8_t> frame);

/// Total size of the first frame in buffer (prefix + payload), or 0 when
/// more data is needed. Splits concatenated frames unambiguously.
std::size_t frame_size(std::span<const std::uint8_t> buffer);

}  // namespace raychan
