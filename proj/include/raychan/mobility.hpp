// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "raychan/geom.hpp"
#include "raychan/scene.hpp"

namespace raychan {

/// Counter-based deterministic generator: a SplitMix64 stream whose key is
/// derived from (seed, node id, purpose tag). The i-th output is a pure
/// function of (key, i), so copies of a stream replay identically.
struct RngStream {
    std::uint64_t state = 0;
};

std::uint64_t rng_stream_key(std::uint64_t seed, std::uint64_t node_id, std::uint64_t tag = 0);
std::uint64_t rng_next_u64(RngStream& stream);
/// Uniform in [0, 1) with 53 random bits.
double rng_next_unit(RngStream& stream);

enum class MobilityModel : std::uint8_t { constant_position, random_walk_3d };

struct MobilityParams {
    double dt_mob = 0.01;         // s, mobility tick
    double direction_hold = 2.0;  // s of travel between direction redraws
};

struct NodeState {
    std::uint64_t node_id = 0;
    Vec3 position;
    Vec3 velocity;
    double speed = 0.0;
    MobilityModel model = MobilityModel::constant_position;
    double direction_hold_remaining = 0.0;
    RngStream rng;
};

/// Initial state: random-walk nodes draw their first horizontal direction
/// from the node's stream.
NodeState make_node_state(std::uint64_t node_id, const Vec3& position, MobilityModel model,
                          double speed, std::uint64_t seed, const MobilityParams& params);

/// Specular velocity reflection v - 2 (v . n) n; magnitude preserved.
Vec3 reflect_velocity(const Vec3& v, const Vec3& normal);

/// Advances one tick: redraws the direction when the hold expires, then
/// travels speed*dt along the velocity, bouncing specularly off scene
/// surfaces (at most 16 bounces, then the node halts for this step).
NodeState step(NodeState state, double dt, const Scene& scene, const MobilityParams& params);

/// floor(horizon/dt) future (time, position) samples from a copy of the
/// state; consuming the copy's stream leaves the original untouched, and
/// actually stepping later reproduces the same positions exactly.
std::vector<std::pair<double, Vec3>> predict(const NodeState& state, double horizon, double dt,
                                             const Scene& scene, const MobilityParams& params,
                                             double now = 0.0);

}  // namespace raychan
