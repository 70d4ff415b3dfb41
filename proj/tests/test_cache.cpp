// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "raychan/channel_cache.hpp"
#include "raychan/raytracer.hpp"

using namespace raychan;

namespace {

ChannelRecord make_record(double loss, double computed_at, double ttl,
                          RecordSource source = RecordSource::raytraced) {
    ChannelRecord r;
    r.path_loss = loss;
    r.delay = 1e-8;
    r.computed_at = computed_at;
    r.ttl = ttl;
    r.source = source;
    return r;
}

}  // namespace

TEST_CASE("coherence ttl closed forms") {
    // (9 / 16 pi) c / (v f)
    CHECK(coherence_ttl(1.0, 5e9) == doctest::Approx(10.735e-3).epsilon(1e-4));
    CHECK(coherence_ttl(7.0, 5e9) == doctest::Approx(1.5336e-3).epsilon(1e-4));
    CHECK(std::isinf(coherence_ttl(0.0, 5e9)));

    // strictly decreasing in v and f
    double prev = coherence_ttl(0.5, 5e9);
    for (double v : {1.0, 2.0, 4.0, 8.0}) {
        const double ttl = coherence_ttl(v, 5e9);
        CHECK(ttl < prev);
        prev = ttl;
    }
    prev = coherence_ttl(1.0, 1e9);
    for (double f : {2e9, 4e9, 8e9}) {
        const double ttl = coherence_ttl(1.0, f);
        CHECK(ttl < prev);
        prev = ttl;
    }
}

TEST_CASE("lookup honors the half-open ttl window") {
    ChannelCache cache;
    const double ttl = 10.74e-3;
    cache.insert(1, 2, make_record(60.0, 0.0, ttl));

    const auto hit = cache.lookup(1, 2, 5e-3);
    REQUIRE(hit.has_value());
    CHECK(hit->path_loss == 60.0);
    CHECK(cache.stats().hits == 1);

    CHECK(!cache.lookup(1, 2, 12e-3).has_value());
    CHECK(cache.stats().misses == 1);

    // boundary: at exactly computed_at + ttl the record is expired
    ChannelCache boundary;
    boundary.insert(1, 2, make_record(60.0, 0.0, 1.0));
    CHECK(boundary.lookup(1, 2, 1.0 - 1e-12).has_value());
    CHECK(!boundary.lookup(1, 2, 1.0).has_value());
}

TEST_CASE("reciprocity: both orders share one entry and the same stats") {
    ChannelCache cache;
    cache.insert(3, 7, make_record(70.0, 0.0, 1.0));
    const auto a = cache.lookup(7, 3, 0.5);
    const auto b = cache.lookup(3, 7, 0.5);
    REQUIRE(a.has_value());
    REQUIRE(b.has_value());
    CHECK(a->path_loss == b->path_loss);
    CHECK(cache.stats().hits == 2);
    CHECK(cache.stats().misses == 0);
    CHECK_THROWS_AS(make_pair_key(4, 4), std::invalid_argument);
}

TEST_CASE("second insert with the same timestamp wins") {
    ChannelCache cache;
    cache.insert(1, 2, make_record(60.0, 0.0, 1.0));
    cache.insert(1, 2, make_record(61.0, 0.0, 1.0));
    const auto hit = cache.lookup(1, 2, 0.1);
    REQUIRE(hit.has_value());
    CHECK(hit->path_loss == 61.0);
}

TEST_CASE("future-dated prefetch records serve only inside their window") {
    ChannelCache cache;
    cache.insert(1, 2, make_record(60.0, 0.0, 10e-3));
    cache.insert(1, 2, make_record(62.0, 10e-3, 10e-3, RecordSource::prefetched));
    cache.insert(1, 2, make_record(64.0, 20e-3, 10e-3, RecordSource::prefetched));

    const auto now0 = cache.lookup(1, 2, 5e-3);
    REQUIRE(now0.has_value());
    CHECK(now0->path_loss == 60.0);

    const auto now1 = cache.lookup(1, 2, 12e-3);
    REQUIRE(now1.has_value());
    CHECK(now1->path_loss == 62.0);
    CHECK(cache.stats().prefetch_hits == 1);

    const auto now2 = cache.lookup(1, 2, 25e-3);
    REQUIRE(now2.has_value());
    CHECK(now2->path_loss == 64.0);

    // past every window
    CHECK(!cache.lookup(1, 2, 50e-3).has_value());
    CHECK(cache.stats().hits >= cache.stats().prefetch_hits);
}

TEST_CASE("friis prescreen skips only below the noise floor") {
    RadioParams params;  // 5 GHz, 20 dBm
    const double noise = -94.0;

    // close pair must be ray traced
    CHECK(!friis_prescreen({0, 0, 0}, {10, 0, 0}, params, noise).has_value());

    // threshold distance ~2392 m at 5 GHz: 20 - PL < -94 iff PL > 114 dB
    CHECK(!friis_prescreen({0, 0, 0}, {2300, 0, 0}, params, noise).has_value());
    const auto far = friis_prescreen({0, 0, 0}, {2500, 0, 0}, params, noise);
    REQUIRE(far.has_value());
    CHECK(far->source == RecordSource::friis_prescreen);
    CHECK(far->path_loss == doctest::Approx(friis_path_loss_db(2500.0, 5e9)));
    CHECK(far->delay == doctest::Approx(2500.0 / kSpeedOfLight).epsilon(1e-15));
    for (const auto& v : far->cfr.values) CHECK(std::abs(v) == 0.0);

    // hopeless transmitter: always prescreened
    RadioParams feeble = params;
    feeble.tx_power_dbm = -200.0;
    CHECK(friis_prescreen({0, 0, 0}, {1, 0, 0}, feeble, noise).has_value());

    // margin shifts the threshold
    CHECK(friis_prescreen({0, 0, 0}, {2500, 0, 0}, params, noise, -10.0).has_value());
    CHECK(!friis_prescreen({0, 0, 0}, {2500, 0, 0}, params, noise, 10.0).has_value());
}

TEST_CASE("prescreen wrapper counts skips and inserts the record") {
    ChannelCache cache;
    RadioParams params;
    const auto rec = cache.prescreen(1, 2, {0, 0, 0}, {5000, 0, 0}, params, -94.0, 0.0, 0.0,
                                     std::numeric_limits<double>::infinity());
    REQUIRE(rec.has_value());
    CHECK(cache.stats().prescreen_skips == 1);
    const auto hit = cache.lookup(1, 2, 100.0);
    REQUIRE(hit.has_value());
    CHECK(hit->source == RecordSource::friis_prescreen);
}

TEST_CASE("stats counters start at zero and follow the request sequence") {
    ChannelCache cache;
    CHECK(cache.stats().hits == 0);
    CHECK(cache.stats().misses == 0);
    CHECK(cache.stats().prescreen_skips == 0);
    CHECK(cache.stats().prefetch_hits == 0);

    CHECK(!cache.lookup(1, 2, 0.0).has_value());
    cache.insert(1, 2, make_record(60.0, 0.0, 1.0));
    CHECK(cache.lookup(1, 2, 0.5).has_value());
    CHECK(cache.stats().hits == 1);
    CHECK(cache.stats().misses == 1);

    // determinism: replaying the same sequence gives the same stats
    ChannelCache replay;
    (void)replay.lookup(1, 2, 0.0);
    replay.insert(1, 2, make_record(60.0, 0.0, 1.0));
    (void)replay.lookup(1, 2, 0.5);
    CHECK(replay.stats().hits == cache.stats().hits);
    CHECK(replay.stats().misses == cache.stats().misses);
}

TEST_CASE("no stale serve: expired entries never return") {
    ChannelCache cache;
    const double ttl = 2e-3;
    for (int i = 0; i < 50; ++i) {
        const double computed = i * 5e-3;
        cache.insert(5, 9, make_record(60.0 + i, computed, ttl));
        // in-window
        const auto fresh = cache.lookup(5, 9, computed + 1e-3);
        REQUIRE(fresh.has_value());
        CHECK(fresh->path_loss == 60.0 + i);
        // expired
        CHECK(!cache.lookup(5, 9, computed + ttl + 1e-6).has_value());
    }
}
