// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <limits>
#include <vector>

#include "raychan/geom.hpp"

namespace raychan {

struct RadioParams {
    double center_frequency = 5.0e9;  // Hz
    double bandwidth = 20.0e6;        // Hz
    std::uint32_t fft_size = 64;      // OFDM subcarriers
    int max_reflection_order = 3;     // K, 0..5
    double tx_power_dbm = 20.0;
};

/// One multipath component. Geometry first (trace), then amplitude/phase
/// (finalize).
struct PropagationPath {
    std::vector<Vec3> reflection_points;  // ordered bounce positions, size <= K
    std::vector<std::uint32_t> faces;     // triangle index per bounce
    double total_length = 0.0;            // m, unfolded
    double delay = 0.0;                   // s, total_length / c
    double amplitude = 0.0;               // dimensionless, >= 0
    double phase = 0.0;                   // rad, [0, 2pi)
};

/// Channel impulse response: components sorted by ascending delay. May be
/// empty (fully blocked pair).
struct Cir {
    std::vector<PropagationPath> components;
};

/// Channel frequency response sampled on the OFDM subcarrier grid.
struct Cfr {
    std::vector<std::complex<double>> values;  // length fft_size
    double subcarrier_spacing = 0.0;           // Hz
};

enum class RecordSource : std::uint8_t { raytraced, friis_prescreen, prefetched };

/// The cacheable per-pair result.
struct ChannelRecord {
    double path_loss = 0.0;  // dB; 400.0 encodes a fully blocked channel
    double delay = 0.0;      // s
    Cfr cfr;
    double computed_at = 0.0;  // simulation time, s
    double ttl = std::numeric_limits<double>::infinity();  // s
    RecordSource source = RecordSource::raytraced;
};

/// Blocked-channel path loss sentinel; below any detection threshold.
inline constexpr double kBlockedPathLossDb = 400.0;

}  // namespace raychan
