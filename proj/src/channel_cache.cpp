// SPDX-License-Identifier: Apache-2.0

#include "raychan/channel_cache.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "raychan/raytracer.hpp"

namespace raychan {

PairKey make_pair_key(std::uint64_t a, std::uint64_t b) {
    if (a == b) throw std::invalid_argument("pair key requires two distinct nodes");
    return a < b ? PairKey{a, b} : PairKey{b, a};
}

double coherence_ttl(double relative_speed, double frequency) {
    if (relative_speed == 0.0) return std::numeric_limits<double>::infinity();
    return (9.0 / (16.0 * std::numbers::pi)) * kSpeedOfLight / (relative_speed * frequency);
}

std::optional<ChannelRecord> friis_prescreen(const Vec3& tx_pos, const Vec3& rx_pos,
                                             const RadioParams& params, double noise_floor_dbm,
                                             double margin_db) {
    const double d = distance(tx_pos, rx_pos);
    const double loss = friis_path_loss_db(d, params.center_frequency);
    if (params.tx_power_dbm - loss >= noise_floor_dbm - margin_db) return std::nullopt;
    ChannelRecord record;
    record.path_loss = loss;
    record.delay = d / kSpeedOfLight;
    record.cfr.values.assign(params.fft_size, {0.0, 0.0});
    record.cfr.subcarrier_spacing = params.bandwidth / static_cast<double>(params.fft_size);
    record.source = RecordSource::friis_prescreen;
    return record;
}

std::optional<ChannelRecord> ChannelCache::lookup(std::uint64_t a, std::uint64_t b, double now) {
    const auto it = entries_.find(make_pair_key(a, b));
    if (it != entries_.end()) {
        std::vector<ChannelRecord>& timeline = it->second;
        timeline.erase(std::remove_if(timeline.begin(), timeline.end(),
                                      [&](const ChannelRecord& r) {
                                          return now - r.computed_at >= r.ttl;
                                      }),
                       timeline.end());
        // latest window containing `now`; future-dated records are not served
        const ChannelRecord* best = nullptr;
        for (const ChannelRecord& r : timeline) {
            if (r.computed_at <= now && now - r.computed_at < r.ttl &&
                (!best || r.computed_at > best->computed_at)) {
                best = &r;
            }
        }
        if (best) {
            ++stats_.hits;
            if (best->source == RecordSource::prefetched) ++stats_.prefetch_hits;
            return *best;
        }
        if (timeline.empty()) entries_.erase(it);
    }
    ++stats_.misses;
    return std::nullopt;
}

void ChannelCache::insert(std::uint64_t a, std::uint64_t b, ChannelRecord record) {
    std::vector<ChannelRecord>& timeline = entries_[make_pair_key(a, b)];
    for (ChannelRecord& r : timeline) {
        if (r.computed_at == record.computed_at) {
            r = std::move(record);
            return;
        }
    }
    timeline.push_back(std::move(record));
    std::sort(timeline.begin(), timeline.end(),
              [](const ChannelRecord& x, const ChannelRecord& y) {
                  return x.computed_at < y.computed_at;
              });
}

std::optional<ChannelRecord> ChannelCache::prescreen(std::uint64_t a, std::uint64_t b,
                                                     const Vec3& a_pos, const Vec3& b_pos,
                                                     const RadioParams& params,
                                                     double noise_floor_dbm, double margin_db,
                                                     double now, double ttl) {
    auto record = friis_prescreen(a_pos, b_pos, params, noise_floor_dbm, margin_db);
    if (!record) return std::nullopt;
    record->computed_at = now;
    record->ttl = ttl;
    ++stats_.prescreen_skips;
    insert(a, b, *record);
    return record;
}

}  // namespace raychan
