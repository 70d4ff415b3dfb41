// SPDX-License-Identifier: Apache-2.0

#include "raychan/channel_server.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

namespace raychan {

InitResponse ChannelServer::handle_init(const InitRequest& request) {
    initialized_ = false;
    nodes_.clear();
    current_tick_ = 0;
    last_sim_time_ = 0.0;

    const auto reject = [](const std::string& text) { return InitResponse{false, text}; };

    if (request.center_frequency <= 0.0) return reject("center_frequency must be > 0");
    if (request.bandwidth <= 0.0) return reject("bandwidth must be > 0");
    if (request.fft_size < 1) return reject("fft_size must be >= 1");
    if (request.max_reflection_order > 5) return reject("max_reflection_order must be <= 5");
    if (request.dt_mob <= 0.0) return reject("dt_mob must be > 0");
    if (request.direction_hold <= 0.0) return reject("direction_hold must be > 0");
    if (request.nodes.empty()) return reject("node list is empty");

    try {
        if (!request.scene_inline_xml.empty()) {
            scene_ = load_scene_from_string(request.scene_inline_xml, ".");
        } else {
            scene_ = load_scene(request.scene_path);
        }
    } catch (const SceneError& e) {
        return reject(e.what());
    }

    params_.center_frequency = request.center_frequency;
    params_.bandwidth = request.bandwidth;
    params_.fft_size = static_cast<std::uint32_t>(request.fft_size);
    params_.max_reflection_order = static_cast<int>(request.max_reflection_order);
    params_.tx_power_dbm = request.tx_power_dbm;
    noise_floor_dbm_ = request.noise_floor_dbm;
    mobility_.dt_mob = request.dt_mob;
    mobility_.direction_hold = request.direction_hold;
    prefetch_horizon_ = request.prefetch_horizon;
    batch_budget_ = request.batch_budget;

    for (const NodeInit& n : request.nodes) {
        if (nodes_.count(n.id)) {
            nodes_.clear();
            return reject("duplicate node id " + std::to_string(n.id));
        }
        if (n.model > 1) {
            nodes_.clear();
            return reject("node " + std::to_string(n.id) + ": unknown mobility model " +
                          std::to_string(n.model));
        }
        const auto model =
            n.model == 0 ? MobilityModel::constant_position : MobilityModel::random_walk_3d;
        if (!scene_.bounds().empty() && !scene_.bounds().contains(n.position, 1e-9)) {
            nodes_.clear();
            return reject("node " + std::to_string(n.id) + " starts outside the scene bounds");
        }
        nodes_.emplace(n.id, make_node_state(n.id, n.position, model, n.speed, n.seed, mobility_));
    }

    initialized_ = true;
    return InitResponse{true, ""};
}

void ChannelServer::advance_to(double sim_time) {
    const auto target = static_cast<std::int64_t>(std::floor(sim_time / mobility_.dt_mob + 1e-9));
    while (current_tick_ < target) {
        for (auto& [id, node] : nodes_)
            node = step(std::move(node), mobility_.dt_mob, scene_, mobility_);
        ++current_tick_;
    }
}

ChannelResponse ChannelServer::handle_channel_request(const ChannelRequest& request) {
    const auto reject = [](const std::string& text) {
        ChannelResponse r;
        r.ok = false;
        r.error_text = text;
        return r;
    };
    if (!initialized_) return reject("channel request before init");
    if (request.sim_time < last_sim_time_)
        return reject("sim_time regression: " + std::to_string(request.sim_time) + " < " +
                      std::to_string(last_sim_time_));
    const auto tx_it = nodes_.find(request.tx_id);
    if (tx_it == nodes_.end())
        return reject("unknown tx node " + std::to_string(request.tx_id));

    advance_to(request.sim_time);
    last_sim_time_ = request.sim_time;
    const NodeState& tx = tx_it->second;

    struct Task {
        std::uint64_t rx_id;
        Vec3 position;
        double valid_from;
        double ttl;
    };
    std::vector<Task> tasks;
    for (const auto& [id, node] : nodes_) {
        if (id == request.tx_id) continue;
        const double rel_speed = norm(node.velocity - tx.velocity);
        tasks.push_back(
            {id, node.position, request.sim_time, coherence_ttl(rel_speed, params_.center_frequency)});
    }

    // Virtual receivers at predicted positions, one per future coherence
    // interval. Only sound when the transmitter holds still: a moving tx
    // would need a different source position per horizon.
    const bool tx_stationary =
        tx.model == MobilityModel::constant_position || tx.speed == 0.0;
    if (tx_stationary && prefetch_horizon_ > 0) {
        struct Virtual {
            std::uint64_t rx_id;
            NodeState copy;
            std::int64_t tick;
            double ttl;
        };
        std::vector<Virtual> mobiles;
        for (const auto& [id, node] : nodes_) {
            if (id == request.tx_id) continue;
            if (node.model != MobilityModel::random_walk_3d || node.speed == 0.0) continue;
            mobiles.push_back(
                {id, node, current_tick_, coherence_ttl(node.speed, params_.center_frequency)});
        }
        for (std::uint64_t i = 1; i <= prefetch_horizon_ && !mobiles.empty(); ++i) {
            for (Virtual& v : mobiles) {
                if (tasks.size() >= batch_budget_) break;
                const double t_future = request.sim_time + static_cast<double>(i) * v.ttl;
                const auto target_tick =
                    static_cast<std::int64_t>(std::floor(t_future / mobility_.dt_mob + 1e-9));
                while (v.tick < target_tick) {
                    v.copy = step(std::move(v.copy), mobility_.dt_mob, scene_, mobility_);
                    ++v.tick;
                }
                tasks.push_back({v.rx_id, v.copy.position, t_future, v.ttl});
            }
            if (tasks.size() >= batch_budget_) break;
        }
    }

    const auto start = std::chrono::steady_clock::now();
    // receivers sitting exactly on the transmitter get a fixed lossless
    // record; the tracer needs distinct endpoints
    constexpr std::size_t kCoincident = static_cast<std::size_t>(-1);
    std::vector<std::size_t> record_index(tasks.size(), kCoincident);
    std::vector<Vec3> positions;
    positions.reserve(tasks.size());
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (distance(tasks[i].position, tx.position) == 0.0) continue;
        record_index[i] = positions.size();
        positions.push_back(tasks[i].position);
    }
    const std::vector<ChannelRecord> records =
        compute_p2mp(scene_, tx.position, positions, params_);

    ChannelResponse response;
    response.ok = true;
    response.records.reserve(tasks.size());
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        ResponseRecord r;
        r.rx_id = tasks[i].rx_id;
        r.valid_from = tasks[i].valid_from;
        r.ttl = tasks[i].ttl;
        if (record_index[i] == kCoincident) {
            r.path_loss = 0.0;
            r.delay = 0.0;
            r.cfr.assign(params_.fft_size, {0.0, 0.0});
        } else {
            const ChannelRecord& rec = records[record_index[i]];
            r.path_loss = rec.path_loss;
            r.delay = rec.delay;
            r.cfr = rec.cfr.values;
        }
        response.records.push_back(std::move(r));
    }

    if (options_.log_requests) {
        const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(
                                std::chrono::steady_clock::now() - start)
                                .count();
        std::fprintf(stdout, "request sim_time=%.6f tx=%llu records=%zu compute_us=%lld\n",
                     request.sim_time, static_cast<unsigned long long>(request.tx_id),
                     response.records.size(), static_cast<long long>(micros));
        std::fflush(stdout);
    }
    return response;
}

bool ChannelServer::serve_connection(TcpConnection connection) {
    for (;;) {
        std::optional<WireMessage> msg;
        try {
            msg = connection.recv_frame();
        } catch (const std::exception&) {
            return false;  // malformed frame or broken pipe: drop the connection
        }
        if (!msg) return false;
        if (auto* init = std::get_if<InitRequest>(&*msg)) {
            connection.send_frame(handle_init(*init));
        } else if (auto* req = std::get_if<ChannelRequest>(&*msg)) {
            connection.send_frame(handle_channel_request(*req));
        } else if (std::get_if<ShutdownRequest>(&*msg)) {
            connection.send_frame(ShutdownResponse{});
            return true;
        } else {
            return false;  // a response kind is not a valid request
        }
    }
}

void ChannelServer::serve(TcpListener& listener, bool once) {
    for (;;) {
        const bool shutdown = serve_connection(listener.accept());
        if (shutdown || once) return;
    }
}

}  // namespace raychan
