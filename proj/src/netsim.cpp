// SPDX-License-Identifier: Apache-2.0

#include "raychan/netsim.hpp"

#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "raychan/channel_server.hpp"
#include "raychan/net.hpp"

namespace raychan {

namespace {

// RNG purpose tags (node trajectories use tag 0 on the server side)
constexpr std::uint64_t kJitterTag = 1;

constexpr const char* kFreeSpaceXml = "<scene></scene>";

}  // namespace

void EventQueue::schedule(double time, Event::Kind kind, std::uint64_t packet_id,
                          std::uint64_t tx, std::uint64_t rx) {
    if (time < current_time_)
        throw std::logic_error("event scheduled in the past: " + std::to_string(time) + " < " +
                               std::to_string(current_time_));
    Event ev;
    ev.time = time;
    ev.sequence = next_sequence_++;
    ev.kind = kind;
    ev.packet_id = packet_id;
    ev.tx = tx;
    ev.rx = rx;
    heap_.push(ev);
}

std::optional<Event> EventQueue::pop() {
    if (heap_.empty()) return std::nullopt;
    Event ev = heap_.top();
    heap_.pop();
    current_time_ = ev.time;
    return ev;
}

// ---------------------------------------------------------------------------
// Scenario configuration
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

double require_number(const json& j, const std::string& key, const std::string& context) {
    if (!j.contains(key) || !j[key].is_number())
        throw ConfigError(context + ": missing or non-numeric field '" + key + "'");
    return j[key].get<double>();
}

std::uint64_t require_uint(const json& j, const std::string& key, const std::string& context) {
    if (!j.contains(key) || !j[key].is_number_unsigned())
        throw ConfigError(context + ": missing or non-unsigned field '" + key + "'");
    return j[key].get<std::uint64_t>();
}

Vec3 require_vec3(const json& j, const std::string& key, const std::string& context) {
    if (!j.contains(key) || !j[key].is_array() || j[key].size() != 3)
        throw ConfigError(context + ": field '" + key + "' must be [x, y, z]");
    const json& a = j[key];
    for (const auto& v : a)
        if (!v.is_number()) throw ConfigError(context + ": '" + key + "' has a non-number entry");
    return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
}

MobilityModel parse_model(const std::string& text, const std::string& context) {
    if (text == "constant_position") return MobilityModel::constant_position;
    if (text == "random_walk_3d") return MobilityModel::random_walk_3d;
    throw ConfigError(context + ": unknown mobility model '" + text + "'");
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& json_text, const std::string& diag_name) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(diag_name + ": " + e.what());
    }

    ScenarioConfig cfg;
    if (j.contains("scene")) cfg.scene_path = j["scene"].get<std::string>();
    cfg.duration_s = require_number(j, "duration_s", diag_name);
    cfg.seed = require_uint(j, "seed", diag_name);

    if (!j.contains("traffic") || !j["traffic"].is_object())
        throw ConfigError(diag_name + ": missing object 'traffic'");
    cfg.packets_per_second = require_number(j["traffic"], "packets_per_second", diag_name);

    if (j.contains("radio")) {
        const json& r = j["radio"];
        if (r.contains("center_frequency_hz"))
            cfg.radio.center_frequency = require_number(r, "center_frequency_hz", diag_name);
        if (r.contains("bandwidth_hz"))
            cfg.radio.bandwidth = require_number(r, "bandwidth_hz", diag_name);
        if (r.contains("fft_size"))
            cfg.radio.fft_size = static_cast<std::uint32_t>(require_uint(r, "fft_size", diag_name));
        if (r.contains("max_reflection_order"))
            cfg.radio.max_reflection_order =
                static_cast<int>(require_uint(r, "max_reflection_order", diag_name));
        if (r.contains("tx_power_dbm"))
            cfg.radio.tx_power_dbm = require_number(r, "tx_power_dbm", diag_name);
        if (r.contains("noise_floor_dbm"))
            cfg.noise_floor_dbm = require_number(r, "noise_floor_dbm", diag_name);
        if (r.contains("snr_threshold_db"))
            cfg.snr_threshold_db = require_number(r, "snr_threshold_db", diag_name);
    }
    if (j.contains("mobility")) {
        const json& m = j["mobility"];
        if (m.contains("dt_mob_s")) cfg.mobility.dt_mob = require_number(m, "dt_mob_s", diag_name);
        if (m.contains("direction_hold_s"))
            cfg.mobility.direction_hold = require_number(m, "direction_hold_s", diag_name);
    }
    if (j.contains("prefetch")) {
        const json& p = j["prefetch"];
        if (p.contains("horizon")) cfg.prefetch_horizon = require_uint(p, "horizon", diag_name);
        if (p.contains("budget")) cfg.batch_budget = require_uint(p, "budget", diag_name);
    }
    if (j.contains("prescreen_margin_db"))
        cfg.prescreen_margin_db = require_number(j, "prescreen_margin_db", diag_name);
    if (j.contains("server")) {
        const json& s = j["server"];
        if (s.contains("embedded")) cfg.embedded_server = s["embedded"].get<bool>();
        if (s.contains("endpoint")) cfg.endpoint = s["endpoint"].get<std::string>();
    }

    if (!j.contains("ap") || !j["ap"].is_object())
        throw ConfigError(diag_name + ": missing object 'ap'");
    cfg.ap_id = require_uint(j["ap"], "id", diag_name + ": ap");
    cfg.ap_position = require_vec3(j["ap"], "position", diag_name + ": ap");

    if (!j.contains("stas") || !j["stas"].is_array())
        throw ConfigError(diag_name + ": missing array 'stas'");
    for (std::size_t i = 0; i < j["stas"].size(); ++i) {
        const json& s = j["stas"][i];
        const std::string context = diag_name + ": stas[" + std::to_string(i) + "]";
        StaConfig sta;
        sta.id = require_uint(s, "id", context);
        sta.position = require_vec3(s, "position", context);
        if (s.contains("model")) sta.model = parse_model(s["model"].get<std::string>(), context);
        if (s.contains("speed_mps")) sta.speed = require_number(s, "speed_mps", context);
        if (sta.model == MobilityModel::constant_position) sta.speed = 0.0;
        cfg.stas.push_back(sta);
    }

    validate_scenario(cfg);
    return cfg;
}

ScenarioConfig load_scenario(const std::string& json_path) {
    std::ifstream in(json_path);
    if (!in) throw ConfigError("cannot open scenario config: " + json_path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario(buffer.str(), json_path);
}

void validate_scenario(const ScenarioConfig& cfg) {
    if (!(cfg.duration_s > 0.0)) throw ConfigError("duration_s: must be > 0");
    if (!(cfg.packets_per_second >= 0.0)) throw ConfigError("packets_per_second: must be >= 0");
    if (!(cfg.radio.center_frequency > 0.0)) throw ConfigError("center_frequency_hz: must be > 0");
    if (!(cfg.radio.bandwidth > 0.0)) throw ConfigError("bandwidth_hz: must be > 0");
    if (cfg.radio.fft_size < 1) throw ConfigError("fft_size: must be >= 1");
    if (cfg.radio.max_reflection_order < 0 || cfg.radio.max_reflection_order > 5)
        throw ConfigError("max_reflection_order: must be in [0, 5]");
    if (!(cfg.mobility.dt_mob > 0.0)) throw ConfigError("dt_mob_s: must be > 0");
    if (!(cfg.mobility.direction_hold > 0.0)) throw ConfigError("direction_hold_s: must be > 0");
    if (cfg.stas.empty()) throw ConfigError("stas: must not be empty");
    std::vector<std::uint64_t> ids{cfg.ap_id};
    for (const StaConfig& s : cfg.stas) {
        for (std::uint64_t seen : ids)
            if (seen == s.id)
                throw ConfigError("stas: duplicate node id " + std::to_string(s.id));
        ids.push_back(s.id);
        if (s.model == MobilityModel::random_walk_3d && !(s.speed > 0.0))
            throw ConfigError("stas: random_walk_3d requires speed_mps > 0 (node " +
                              std::to_string(s.id) + ")");
    }
    if (!cfg.embedded_server && cfg.endpoint.empty())
        throw ConfigError("server.endpoint: required when embedded is false");
}

// ---------------------------------------------------------------------------
// Scenario execution
// ---------------------------------------------------------------------------

namespace {

InitRequest build_init_request(const ScenarioConfig& cfg) {
    InitRequest init;
    if (cfg.scene_path.empty())
        init.scene_inline_xml = kFreeSpaceXml;
    else
        init.scene_path = cfg.scene_path;
    init.center_frequency = cfg.radio.center_frequency;
    init.bandwidth = cfg.radio.bandwidth;
    init.fft_size = cfg.radio.fft_size;
    init.noise_floor_dbm = cfg.noise_floor_dbm;
    init.tx_power_dbm = cfg.radio.tx_power_dbm;
    init.max_reflection_order = static_cast<std::uint64_t>(cfg.radio.max_reflection_order);
    init.prefetch_horizon = cfg.prefetch_horizon;
    init.batch_budget = cfg.batch_budget;
    init.dt_mob = cfg.mobility.dt_mob;
    init.direction_hold = cfg.mobility.direction_hold;
    init.nodes.push_back({cfg.ap_id, 0, cfg.ap_position, 0.0, cfg.seed});
    for (const StaConfig& s : cfg.stas) {
        const std::uint64_t model = s.model == MobilityModel::random_walk_3d ? 1 : 0;
        init.nodes.push_back({s.id, model, s.position, s.speed, cfg.seed});
    }
    return init;
}

struct EmbeddedServer {
    explicit EmbeddedServer(TcpListener listener)
        : port(listener.port()), thread([l = std::move(listener)]() mutable {
              ChannelServer server;
              server.serve(l, /*once=*/true);
          }) {}
    ~EmbeddedServer() {
        if (thread.joinable()) thread.join();
    }
    std::uint16_t port;
    std::thread thread;
};

}  // namespace

ScenarioMetrics run_scenario(const ScenarioConfig& cfg) {
    validate_scenario(cfg);

    std::unique_ptr<EmbeddedServer> embedded;
    std::string host;
    std::uint16_t port = 0;
    if (cfg.embedded_server) {
        embedded = std::make_unique<EmbeddedServer>(TcpListener::bind("127.0.0.1", 0));
        host = "127.0.0.1";
        port = embedded->port;
    } else {
        std::tie(host, port) = parse_endpoint(cfg.endpoint);
    }

    TcpConnection conn = TcpConnection::connect(host, port);
    conn.send_frame(build_init_request(cfg));
    {
        const auto reply = conn.recv_frame();
        if (!reply) throw NetError("server closed the connection during init");
        const auto* init = std::get_if<InitResponse>(&*reply);
        if (!init) throw NetError("unexpected reply kind to init request");
        if (!init->ok) throw NetError("server init failed: " + init->error_text);
    }

    const auto wall_start = std::chrono::steady_clock::now();

    EventQueue queue;
    std::uint64_t next_packet = 0;
    const double U = cfg.packets_per_second;
    if (U > 0.0) {
        for (const StaConfig& sta : cfg.stas) {
            RngStream jitter{rng_stream_key(cfg.seed, sta.id, kJitterTag)};
            for (std::uint64_t i = 0;; ++i) {
                const double base = static_cast<double>(i) / U;
                if (base >= cfg.duration_s) break;
                const double t = base + rng_next_unit(jitter) * (1e-3 / U);
                if (t > cfg.duration_s) break;
                queue.schedule(t, Event::Kind::generate_packet, next_packet++, cfg.ap_id, sta.id);
            }
        }
    }

    std::map<std::uint64_t, const StaConfig*> sta_by_id;
    for (const StaConfig& s : cfg.stas) sta_by_id[s.id] = &s;

    ChannelCache cache;
    ScenarioMetrics metrics;
    std::map<std::uint64_t, PacketResult> in_flight;

    while (auto ev = queue.pop()) {
        if (ev->time > cfg.duration_s) break;
        switch (ev->kind) {
            case Event::Kind::generate_packet: {
                const double now = ev->time;
                const StaConfig& sta = *sta_by_id.at(ev->rx);

                auto record = cache.lookup(cfg.ap_id, sta.id, now);
                const bool hit = record.has_value();
                if (!record && sta.model == MobilityModel::constant_position) {
                    // client only knows positions of stationary nodes
                    record = cache.prescreen(cfg.ap_id, sta.id, cfg.ap_position, sta.position,
                                             cfg.radio, cfg.noise_floor_dbm,
                                             cfg.prescreen_margin_db, now,
                                             std::numeric_limits<double>::infinity());
                }
                if (!record) {
                    conn.send_frame(ChannelRequest{now, cfg.ap_id});
                    ++metrics.requests_issued;
                    const auto reply = conn.recv_frame();
                    if (!reply) throw NetError("server closed the connection mid-run");
                    const auto* resp = std::get_if<ChannelResponse>(&*reply);
                    if (!resp) throw NetError("unexpected reply kind to channel request");
                    if (!resp->ok) throw NetError("channel request failed: " + resp->error_text);
                    for (const ResponseRecord& r : resp->records) {
                        ChannelRecord cr;
                        cr.path_loss = r.path_loss;
                        cr.delay = r.delay;
                        cr.cfr.values = r.cfr;
                        cr.cfr.subcarrier_spacing =
                            cfg.radio.bandwidth / static_cast<double>(cfg.radio.fft_size);
                        cr.computed_at = r.valid_from;
                        cr.ttl = r.ttl;
                        cr.source = r.valid_from > now ? RecordSource::prefetched
                                                       : RecordSource::raytraced;
                        cache.insert(cfg.ap_id, r.rx_id, std::move(cr));
                        ++metrics.records_received;
                        if (r.rx_id == sta.id && r.valid_from == now) {
                            ChannelRecord current;
                            current.path_loss = r.path_loss;
                            current.delay = r.delay;
                            current.computed_at = r.valid_from;
                            current.ttl = r.ttl;
                            record = current;
                        }
                    }
                    if (!record)
                        throw std::logic_error("response lacks a current record for rx " +
                                               std::to_string(sta.id));
                }

                PacketResult pr;
                pr.packet_id = ev->packet_id;
                pr.tx = cfg.ap_id;
                pr.rx = sta.id;
                pr.tx_time = now;
                pr.rx_power_dbm = cfg.radio.tx_power_dbm - record->path_loss;
                pr.snr_db = pr.rx_power_dbm - cfg.noise_floor_dbm;
                pr.prop_delay = record->delay;
                pr.delivered = pr.snr_db >= cfg.snr_threshold_db;
                pr.cache_hit = hit;
                in_flight[ev->packet_id] = pr;
                queue.schedule(now + record->delay, Event::Kind::start_rx, ev->packet_id, ev->tx,
                               ev->rx);
                break;
            }
            case Event::Kind::start_rx:
                // threshold PHY: zero air time, reception completes immediately
                queue.schedule(ev->time, Event::Kind::end_rx, ev->packet_id, ev->tx, ev->rx);
                break;
            case Event::Kind::end_rx: {
                const auto it = in_flight.find(ev->packet_id);
                if (it != in_flight.end()) {
                    metrics.packets.push_back(it->second);
                    in_flight.erase(it);
                }
                break;
            }
        }
    }

    metrics.cache = cache.stats();
    metrics.wall_clock_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();

    conn.send_frame(ShutdownRequest{});
    (void)conn.recv_frame();
    conn.close();
    return metrics;
}

void write_packets_csv(const std::vector<PacketResult>& packets, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot write " + path);
    std::fprintf(f, "packet_id,tx,rx,tx_time_s,rx_power_dbm,snr_db,prop_delay_s,delivered,cache_hit\n");
    for (const PacketResult& p : packets) {
        std::fprintf(f, "%" PRIu64 ",%" PRIu64 ",%" PRIu64 ",%.17g,%.17g,%.17g,%.17g,%d,%d\n",
                     p.packet_id, p.tx, p.rx, p.tx_time, p.rx_power_dbm, p.snr_db, p.prop_delay,
                     p.delivered ? 1 : 0, p.cache_hit ? 1 : 0);
    }
    std::fclose(f);
}

void write_summary_json(const ScenarioConfig& cfg, const ScenarioMetrics& metrics,
                        const std::string& path) {
    using nlohmann::json;
    std::uint64_t delivered = 0;
    double rx_power_sum = 0.0;
    for (const PacketResult& p : metrics.packets) {
        if (p.delivered) ++delivered;
        rx_power_sum += p.rx_power_dbm;
    }
    const std::size_t n = metrics.packets.size();
    const std::uint64_t lookups = metrics.cache.hits + metrics.cache.misses;
    json j;
    j["packets"] = n;
    j["delivered"] = delivered;
    j["delivery_ratio"] = n ? static_cast<double>(delivered) / static_cast<double>(n) : 0.0;
    j["mean_rx_power_dbm"] = n ? rx_power_sum / static_cast<double>(n) : 0.0;
    j["cache"] = {{"hits", metrics.cache.hits},
                  {"misses", metrics.cache.misses},
                  {"prescreen_skips", metrics.cache.prescreen_skips},
                  {"prefetch_hits", metrics.cache.prefetch_hits},
                  {"hit_rate", lookups ? static_cast<double>(metrics.cache.hits) /
                                             static_cast<double>(lookups)
                                       : 0.0}};
    j["requests_issued"] = metrics.requests_issued;
    j["records_received"] = metrics.records_received;
    j["wall_clock_s"] = metrics.wall_clock_s;
    j["config"] = {{"duration_s", cfg.duration_s},
                   {"seed", cfg.seed},
                   {"packets_per_second", cfg.packets_per_second},
                   {"n_sta", cfg.stas.size()},
                   {"scene", cfg.scene_path.empty() ? "<free space>" : cfg.scene_path}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

}  // namespace raychan
