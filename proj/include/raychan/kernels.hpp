// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>

#include "raychan/geom.hpp"

namespace raychan::kernels {

/// Up to four triangles in SoA layout with precomputed edge vectors; the unit
/// of work for the leaf intersection kernel. Unused lanes are padded with
/// degenerate triangles (zero edges) which can never produce a hit.
struct TriPacket {
    alignas(32) double v0x[4];
    alignas(32) double v0y[4];
    alignas(32) double v0z[4];
    alignas(32) double e1x[4];
    alignas(32) double e1y[4];
    alignas(32) double e1z[4];
    alignas(32) double e2x[4];
    alignas(32) double e2y[4];
    alignas(32) double e2z[4];
    std::uint32_t tri_index[4] = {0, 0, 0, 0};
    int count = 0;
};

/// One interchangeable set of inner-loop kernels. All variants implement the
/// same contracts; the scalar set is the reference semantics.
struct KernelOps {
    const char* name;

    /// Moller-Trumbore over one packet. Writes the hit distance per lane into
    /// t_out, +inf for a miss. A lane hits iff u >= 0, v >= 0, u + v <= 1 and
    /// t in (t_min, t_max]. Two-sided: the sign of the determinant is not
    /// tested.
    void (*intersect_packet)(const TriPacket& packet, const Vec3& origin, const Vec3& dir,
                             double t_min, double t_max, double t_out[4]);

    /// re[k] += amp*cos(theta0 + k*dtheta), im[k] -= amp*sin(theta0 + k*dtheta)
    /// for k in [0, n): accumulates amp * e^{-j(theta0 + k*dtheta)}.
    /// Valid for |theta0 + k*dtheta| < 1e8.
    void (*accumulate_phasor)(double* re, double* im, std::size_t n, double amp, double theta0,
                              double dtheta);

    /// Sum of x[k]^2 over [0, n).
    double (*sum_squares)(const double* x, std::size_t n);
};

const KernelOps& scalar_ops();

/// Null when this build carries no AVX2 translation unit.
const KernelOps* avx2_ops();

/// True when the running CPU can execute the AVX2 variants.
bool avx2_supported();

/// The variant selected at startup: AVX2 when supported, scalar otherwise.
/// RAYCHAN_KERNEL=scalar|avx2|auto overrides (an explicit request for an
/// unavailable variant throws on first use).
const KernelOps& active_ops();

}  // namespace raychan::kernels
