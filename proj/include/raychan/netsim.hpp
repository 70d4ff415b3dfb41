// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "raychan/channel.hpp"
#include "raychan/channel_cache.hpp"
#include "raychan/mobility.hpp"

namespace raychan {

struct Event {
    enum class Kind : std::uint8_t { generate_packet, start_rx, end_rx };

    double time = 0.0;
    std::uint64_t sequence = 0;  // FIFO tie-break at equal times
    Kind kind = Kind::generate_packet;
    std::uint64_t packet_id = 0;
    std::uint64_t tx = 0;
    std::uint64_t rx = 0;
};

/// Min-heap in (time, sequence) order. Scheduling earlier than the last
/// popped time is a fatal logic error.
class EventQueue {
public:
    void schedule(double time, Event::Kind kind, std::uint64_t packet_id, std::uint64_t tx,
                  std::uint64_t rx);
    std::optional<Event> pop();
    bool empty() const { return heap_.empty(); }

private:
    struct Later {
        bool operator()(const Event& a, const Event& b) const {
            if (a.time != b.time) return a.time > b.time;
            return a.sequence > b.sequence;
        }
    };
    std::priority_queue<Event, std::vector<Event>, Later> heap_;
    std::uint64_t next_sequence_ = 0;
    double current_time_ = 0.0;
};

struct PacketResult {
    std::uint64_t packet_id = 0;
    std::uint64_t tx = 0;
    std::uint64_t rx = 0;
    double tx_time = 0.0;       // s
    double rx_power_dbm = 0.0;  // tx_power - path_loss
    double snr_db = 0.0;        // rx_power - noise_floor
    double prop_delay = 0.0;    // s
    bool delivered = false;     // snr >= threshold
    bool cache_hit = false;     // served without a server round-trip
};

struct StaConfig {
    std::uint64_t id = 0;
    Vec3 position;
    MobilityModel model = MobilityModel::constant_position;
    double speed = 0.0;
};

struct ScenarioConfig {
    std::string scene_path;  // empty: free space
    double duration_s = 0.0;
    std::uint64_t seed = 0;
    double packets_per_second = 0.0;  // downlink rate per STA
    RadioParams radio;
    double noise_floor_dbm = -94.0;
    double snr_threshold_db = 5.0;
    double prescreen_margin_db = 0.0;
    MobilityParams mobility;
    std::uint64_t prefetch_horizon = 4;
    std::uint64_t batch_budget = 256;
    std::uint64_t ap_id = 0;
    Vec3 ap_position;
    std::vector<StaConfig> stas;
    bool embedded_server = true;
    std::string endpoint;  // used when embedded_server is false
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Parses and validates the scenario JSON document; errors name the field.
ScenarioConfig load_scenario(const std::string& json_path);
ScenarioConfig parse_scenario(const std::string& json_text, const std::string& diag_name);
void validate_scenario(const ScenarioConfig& config);

struct ScenarioMetrics {
    std::vector<PacketResult> packets;
    CacheStats cache;
    std::uint64_t requests_issued = 0;
    std::uint64_t records_received = 0;
    double wall_clock_s = 0.0;
};

/// Runs the downlink scenario against the channel server (spawned in-process
/// when embedded_server is set), one threshold-PHY packet at a time.
ScenarioMetrics run_scenario(const ScenarioConfig& config);

void write_packets_csv(const std::vector<PacketResult>& packets, const std::string& path);
void write_summary_json(const ScenarioConfig& config, const ScenarioMetrics& metrics,
                        const std::string& path);

}  // namespace raychan
