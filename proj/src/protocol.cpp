// SPDX-License-Identifier: Apache-2.0

#include "raychan/protocol.hpp"

#include <bit>
#include <cstring>
#include <limits>

namespace raychan {

namespace {

class Writer {
public:
    void u8(std::uint8_t v) { bytes_.push_back(v); }

    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }

    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }

    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

    void boolean(bool v) { u64(v ? 1 : 0); }

    void string(const std::string& s) {
        length(s.size(), "string");
        bytes_.insert(bytes_.end(), s.begin(), s.end());
    }

    void length(std::size_t n, const char* what) {
        if (n > std::numeric_limits<std::uint32_t>::max())
            throw ProtocolError(ProtocolErrorKind::too_long,
                                std::string(what) + " exceeds 2^32-1 elements");
        u32(static_cast<std::uint32_t>(n));
    }

    void vec3(const Vec3& v) {
        f64(v.x);
        f64(v.y);
        f64(v.z);
    }

    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

    std::uint8_t u8() {
        need(1);
        return data_[pos_++];
    }

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }

    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
        pos_ += 8;
        return v;
    }

    double f64() { return std::bit_cast<double>(u64()); }

    bool boolean() { return u64() != 0; }

    std::string string() {
        const std::uint32_t n = u32();
        need(n);
        std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
        pos_ += n;
        return s;
    }

    Vec3 vec3() {
        Vec3 v;
        v.x = f64();
        v.y = f64();
        v.z = f64();
        return v;
    }

    std::size_t remaining() const { return data_.size() - pos_; }

private:
    void need(std::size_t n) {
        if (data_.size() - pos_ < n)
            throw ProtocolError(ProtocolErrorKind::truncated,
                                "frame truncated: field extends past the declared length");
    }

    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

void write_payload(Writer& w, const InitRequest& m) {
    w.u8(static_cast<std::uint8_t>(MessageTag::init_request));
    w.string(m.scene_path);
    w.string(m.scene_inline_xml);
    w.f64(m.center_frequency);
    w.f64(m.bandwidth);
    w.u64(m.fft_size);
    w.f64(m.noise_floor_dbm);
    w.f64(m.tx_power_dbm);
    w.u64(m.max_reflection_order);
    w.u64(m.prefetch_horizon);
    w.u64(m.batch_budget);
    w.f64(m.dt_mob);
    w.f64(m.direction_hold);
    w.length(m.nodes.size(), "node list");
    for (const NodeInit& n : m.nodes) {
        w.u64(n.id);
        w.u64(n.model);
        w.vec3(n.position);
        w.f64(n.speed);
        w.u64(n.seed);
    }
}

void write_payload(Writer& w, const InitResponse& m) {
    w.u8(static_cast<std::uint8_t>(MessageTag::init_response));
    w.boolean(m.ok);
    w.string(m.error_text);
}

void write_payload(Writer& w, const ChannelRequest& m) {
    w.u8(static_cast<std::uint8_t>(MessageTag::channel_request));
    w.f64(m.sim_time);
    w.u64(m.tx_id);
}

void write_payload(Writer& w, const ChannelResponse& m) {
    w.u8(static_cast<std::uint8_t>(MessageTag::channel_response));
    w.boolean(m.ok);
    w.string(m.error_text);
    w.length(m.records.size(), "record list");
    for (const ResponseRecord& r : m.records) {
        w.u64(r.rx_id);
        w.f64(r.valid_from);
        w.f64(r.path_loss);
        w.f64(r.delay);
        w.f64(r.ttl);
        w.length(r.cfr.size(), "cfr");
        for (const std::complex<double>& c : r.cfr) {
            w.f64(c.real());
            w.f64(c.imag());
        }
    }
}

void write_payload(Writer& w, const ShutdownRequest&) {
    w.u8(static_cast<std::uint8_t>(MessageTag::shutdown_request));
}

void write_payload(Writer& w, const ShutdownResponse&) {
    w.u8(static_cast<std::uint8_t>(MessageTag::shutdown_response));
}

InitRequest read_init_request(Reader& r) {
    InitRequest m;
    m.scene_path = r.string();
    m.scene_inline_xml = r.string();
    m.center_frequency = r.f64();
    m.bandwidth = r.f64();
    m.fft_size = r.u64();
    m.noise_floor_dbm = r.f64();
    m.tx_power_dbm = r.f64();
    m.max_reflection_order = r.u64();
    m.prefetch_horizon = r.u64();
    m.batch_budget = r.u64();
    m.dt_mob = r.f64();
    m.direction_hold = r.f64();
    const std::uint32_t count = r.u32();
    m.nodes.resize(count);
    for (NodeInit& n : m.nodes) {
        n.id = r.u64();
        n.model = r.u64();
        n.position = r.vec3();
        n.speed = r.f64();
        n.seed = r.u64();
    }
    return m;
}

ChannelResponse read_channel_response(Reader& r) {
    ChannelResponse m;
    m.ok = r.boolean();
    m.error_text = r.string();
    const std::uint32_t count = r.u32();
    m.records.resize(count);
    for (ResponseRecord& rec : m.records) {
        rec.rx_id = r.u64();
        rec.valid_from = r.f64();
        rec.path_loss = r.f64();
        rec.delay = r.f64();
        rec.ttl = r.f64();
        const std::uint32_t n = r.u32();
        rec.cfr.resize(n);
        for (std::complex<double>& c : rec.cfr) {
            const double re = r.f64();
            const double im = r.f64();
            c = {re, im};
        }
    }
    return m;
}

}  // namespace

std::vector<std::uint8_t> encode(const WireMessage& msg) {
    Writer payload;
    std::visit([&](const auto& m) { write_payload(payload, m); }, msg);
    std::vector<std::uint8_t> body = payload.take();

    Writer frame;
    frame.length(body.size(), "payload");
    std::vector<std::uint8_t> out = frame.take();
    out.insert(out.end(), body.begin(), body.end());
    return out;
}

WireMessage decode(std::span<const std::uint8_t> frame) {
    if (frame.size() < 4)
        throw ProtocolError(ProtocolErrorKind::truncated, "frame shorter than the length prefix");
    Reader prefix(frame.subspan(0, 4));
    const std::uint32_t length = prefix.u32();
    if (frame.size() < 4u + length)
        throw ProtocolError(ProtocolErrorKind::truncated,
                            "frame truncated: length field exceeds available bytes");
    if (frame.size() > 4u + length)
        throw ProtocolError(ProtocolErrorKind::length_mismatch,
                            "bytes beyond the declared frame length");
    if (length == 0)
        throw ProtocolError(ProtocolErrorKind::truncated, "empty payload (missing tag)");

    Reader r(frame.subspan(4, length));
    const std::uint8_t tag = r.u8();
    WireMessage msg;
    switch (static_cast<MessageTag>(tag)) {
        case MessageTag::init_request:
            msg = read_init_request(r);
            break;
        case MessageTag::init_response: {
            InitResponse m;
            m.ok = r.boolean();
            m.error_text = r.string();
            msg = m;
            break;
        }
        case MessageTag::channel_request: {
            ChannelRequest m;
            m.sim_time = r.f64();
            m.tx_id = r.u64();
            msg = m;
            break;
        }
        case MessageTag::channel_response:
            msg = read_channel_response(r);
            break;
        case MessageTag::shutdown_request:
            msg = ShutdownRequest{};
            break;
        case MessageTag::shutdown_response:
            msg = ShutdownResponse{};
            break;
        default:
            throw ProtocolError(ProtocolErrorKind::unknown_tag,
                                "unknown message tag " + std::to_string(tag));
    }
    if (r.remaining() != 0)
        throw ProtocolError(ProtocolErrorKind::length_mismatch,
                            "trailing bytes within the declared frame length");
    return msg;
}

std::size_t frame_size(std::span<const std::uint8_t> buffer) {
    if (buffer.size() < 4) return 0;
    std::uint32_t length = 0;
    for (int i = 0; i < 4; ++i) length |= static_cast<std::uint32_t>(buffer[i]) << (8 * i);
    const std::size_t total = 4u + length;
    return buffer.size() >= total ? total : 0;
}

}  // namespace raychan
