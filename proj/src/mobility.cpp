// SPDX-License-Identifier: Apache-2.0

#include "raychan/mobility.hpp"

#include <cmath>
#include <numbers>

namespace raychan {

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

std::uint64_t splitmix_mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

Vec3 horizontal_direction(RngStream& rng, double speed) {
    const double angle = 2.0 * std::numbers::pi * rng_next_unit(rng);
    return {speed * std::cos(angle), speed * std::sin(angle), 0.0};
}

}  // namespace

std::uint64_t rng_stream_key(std::uint64_t seed, std::uint64_t node_id, std::uint64_t tag) {
    return splitmix_mix(splitmix_mix(seed + kGamma * (node_id + 1)) + kGamma * (tag + 1));
}

std::uint64_t rng_next_u64(RngStream& stream) {
    stream.state += kGamma;
    return splitmix_mix(stream.state);
}

double rng_next_unit(RngStream& stream) {
    return static_cast<double>(rng_next_u64(stream) >> 11) * 0x1.0p-53;
}

NodeState make_node_state(std::uint64_t node_id, const Vec3& position, MobilityModel model,
                          double speed, std::uint64_t seed, const MobilityParams& params) {
    NodeState state;
    state.node_id = node_id;
    state.position = position;
    state.model = model;
    state.rng.state = rng_stream_key(seed, node_id);
    if (model == MobilityModel::random_walk_3d) {
        state.speed = speed;
        state.velocity = horizontal_direction(state.rng, speed);
        state.direction_hold_remaining = params.direction_hold;
    }
    return state;
}

Vec3 reflect_velocity(const Vec3& v, const Vec3& normal) {
    return v - normal * (2.0 * dot(v, normal));
}

NodeState step(NodeState state, double dt, const Scene& scene, const MobilityParams& params) {
    if (state.model == MobilityModel::constant_position || state.speed == 0.0) return state;

    state.direction_hold_remaining -= dt;
    if (state.direction_hold_remaining <= 1e-12) {
        state.velocity = horizontal_direction(state.rng, state.speed);
        state.direction_hold_remaining += params.direction_hold;
    }

    constexpr double kBounceOffset = 1e-4;  // m, keeps the node off the wall
    double remaining = state.speed * dt;
    int bounces = 0;
    while (remaining > 0.0) {
        const Vec3 dir = state.velocity / state.speed;
        const auto hit = scene.intersect(state.position, dir, remaining);
        if (!hit) {
            state.position += dir * remaining;
            break;
        }
        if (++bounces > 16) break;  // halt in place for this step
        state.position = hit->point + hit->normal * kBounceOffset;
        state.velocity = reflect_velocity(state.velocity, hit->normal);
        remaining -= hit->distance;
    }
    return state;
}

std::vector<std::pair<double, Vec3>> predict(const NodeState& state, double horizon, double dt,
                                             const Scene& scene, const MobilityParams& params,
                                             double now) {
    const auto samples = static_cast<std::size_t>(std::floor(horizon / dt + 1e-9));
    std::vector<std::pair<double, Vec3>> result;
    result.reserve(samples);
    NodeState copy = state;
    for (std::size_t i = 1; i <= samples; ++i) {
        copy = step(std::move(copy), dt, scene, params);
        result.emplace_back(now + static_cast<double>(i) * dt, copy.position);
    }
    return result;
}

}  // namespace raychan
