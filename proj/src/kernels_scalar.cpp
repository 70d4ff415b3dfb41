// SPDX-License-Identifier: Apache-2.0
//
// Reference kernels. This translation unit is compiled for the baseline ISA
// (no FMA contraction), so the arithmetic below is the defining semantics the
// vector variants are tested against.

#include <cmath>
#include <limits>

#include "raychan/kernels.hpp"

namespace raychan::kernels {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void intersect_packet_scalar(const TriPacket& p, const Vec3& o, const Vec3& d, double t_min,
                             double t_max, double t_out[4]) {
    for (int lane = 0; lane < 4; ++lane) {
        if (lane >= p.count) {
            t_out[lane] = kInf;
            continue;
        }
        const double e1x = p.e1x[lane], e1y = p.e1y[lane], e1z = p.e1z[lane];
        const double e2x = p.e2x[lane], e2y = p.e2y[lane], e2z = p.e2z[lane];
        const double px = d.y * e2z - d.z * e2y;
        const double py = d.z * e2x - d.x * e2z;
        const double pz = d.x * e2y - d.y * e2x;
        const double det = e1x * px + e1y * py + e1z * pz;
        const double inv = 1.0 / det;  // parallel rays give NaN lanes; all tests below fail
        const double tx = o.x - p.v0x[lane];
        const double ty = o.y - p.v0y[lane];
        const double tz = o.z - p.v0z[lane];
        const double u = (tx * px + ty * py + tz * pz) * inv;
        const double qx = ty * e1z - tz * e1y;
        const double qy = tz * e1x - tx * e1z;
        const double qz = tx * e1y - ty * e1x;
        const double v = (d.x * qx + d.y * qy + d.z * qz) * inv;
        const double t = (e2x * qx + e2y * qy + e2z * qz) * inv;
        const bool hit = u >= 0.0 && v >= 0.0 && u + v <= 1.0 && t > t_min && t <= t_max;
        t_out[lane] = hit ? t : kInf;
    }
}

void accumulate_phasor_scalar(double* re, double* im, std::size_t n, double amp, double theta0,
                              double dtheta) {
    for (std::size_t k = 0; k < n; ++k) {
        const double theta = theta0 + static_cast<double>(k) * dtheta;
        re[k] += amp * std::cos(theta);
        im[k] -= amp * std::sin(theta);
    }
}

double sum_squares_scalar(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        acc += x[k] * x[k];
    }
    return acc;
}

}  // namespace

const KernelOps& scalar_ops() {
    static const KernelOps ops{"scalar", intersect_packet_scalar, accumulate_phasor_scalar,
                               sum_squares_scalar};
    return ops;
}

}  // namespace raychan::kernels
