// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "raychan/channel.hpp"

namespace raychan {

/// Unordered node pair under channel reciprocity: the record for (a, b)
/// serves (b, a) as well.
struct PairKey {
    std::uint64_t lo = 0;
    std::uint64_t hi = 0;

    bool operator==(const PairKey&) const = default;
};

PairKey make_pair_key(std::uint64_t a, std::uint64_t b);

struct PairKeyHash {
    std::size_t operator()(const PairKey& k) const {
        std::uint64_t h = k.lo * 0x9E3779B97F4A7C15ull ^ (k.hi + 0xBF58476D1CE4E5B9ull);
        h ^= h >> 29;
        h *= 0x94D049BB133111EBull;
        return static_cast<std::size_t>(h ^ (h >> 32));
    }
};

struct CacheStats {
    std::uint64_t hits = 0;
    std::uint64_t misses = 0;
    std::uint64_t prescreen_skips = 0;
    std::uint64_t prefetch_hits = 0;
};

/// Coherence time (9 / 16 pi) * c / (v f); infinite for a stationary pair.
double coherence_ttl(double relative_speed, double frequency);

/// Friis-based skip test: when even lossless free-space propagation lands
/// below the noise floor (minus margin), returns a synthetic record so ray
/// tracing can be skipped. Delay is d/c, CFR all-zero.
std::optional<ChannelRecord> friis_prescreen(const Vec3& tx_pos, const Vec3& rx_pos,
                                             const RadioParams& params, double noise_floor_dbm,
                                             double margin_db = 0.0);

/// Client-side channel store keyed by unordered pairs, holding a short
/// timeline of records per pair (current plus prefetched future windows).
/// A record serves lookups in [computed_at, computed_at + ttl). Expired
/// entries are evicted lazily; future-dated entries stay until valid.
/// Single-threaded by contract.
class ChannelCache {
public:
    /// Valid record for the pair at `now`, counting a hit or a miss.
    std::optional<ChannelRecord> lookup(std::uint64_t a, std::uint64_t b, double now);

    /// Stores under the canonical key. An entry with the same computed_at is
    /// replaced; other validity windows are kept.
    void insert(std::uint64_t a, std::uint64_t b, ChannelRecord record);

    /// friis_prescreen plus bookkeeping: on a skip the record is counted and
    /// inserted with the given timing so subsequent lookups hit.
    std::optional<ChannelRecord> prescreen(std::uint64_t a, std::uint64_t b, const Vec3& a_pos,
                                           const Vec3& b_pos, const RadioParams& params,
                                           double noise_floor_dbm, double margin_db, double now,
                                           double ttl);

    const CacheStats& stats() const { return stats_; }

private:
    std::unordered_map<PairKey, std::vector<ChannelRecord>, PairKeyHash> entries_;
    CacheStats stats_;
};

}  // namespace raychan
