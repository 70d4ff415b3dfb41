// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>

#include "raychan/channel_cache.hpp"
#include "raychan/mobility.hpp"
#include "raychan/net.hpp"
#include "raychan/protocol.hpp"
#include "raychan/raytracer.hpp"
#include "raychan/scene.hpp"

namespace raychan {

/// Owns the scene, radio parameters and node trajectories; answers each
/// ChannelRequest with the full point-to-multipoint batch plus prefetched
/// future (virtual-node) channels. Node positions live here only: the client
/// never sends positions after init.
class ChannelServer {
public:
    struct Options {
        bool log_requests = false;
    };

    ChannelServer() = default;
    explicit ChannelServer(Options options) : options_(options) {}

    InitResponse handle_init(const InitRequest& request);
    ChannelResponse handle_channel_request(const ChannelRequest& request);

    /// Accept loop, one connection at a time. Returns after a shutdown
    /// request, or after the first connection closes when `once` is set.
    void serve(TcpListener& listener, bool once = false);

    bool initialized() const { return initialized_; }
    const std::map<std::uint64_t, NodeState>& nodes() const { return nodes_; }

private:
    void advance_to(double sim_time);
    bool serve_connection(TcpConnection connection);  // true on shutdown request

    Options options_;
    bool initialized_ = false;
    Scene scene_;
    RadioParams params_;
    double noise_floor_dbm_ = 0.0;
    MobilityParams mobility_;
    std::uint64_t prefetch_horizon_ = 0;
    std::uint64_t batch_budget_ = 0;
    std::map<std::uint64_t, NodeState> nodes_;  // ordered: deterministic batches
    std::int64_t current_tick_ = 0;
    double last_sim_time_ = 0.0;
};

}  // namespace raychan
