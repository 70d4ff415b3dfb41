// SPDX-License-Identifier: Apache-2.0
//
// AVX2 kernel variants. Intersection math uses plain mul/add (no FMA) in the
// same association order as the scalar reference, so per-lane results are
// bit-identical to it. The phasor kernel evaluates sin/cos with a Cody-Waite
// reduction plus Taylor polynomials on |r| <= pi/4 and agrees with libm to a
// few ulp.

#include "raychan/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <limits>

namespace raychan::kernels {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void intersect_packet_avx2(const TriPacket& p, const Vec3& o, const Vec3& d, double t_min,
                           double t_max, double t_out[4]) {
    const __m256d dx = _mm256_set1_pd(d.x);
    const __m256d dy = _mm256_set1_pd(d.y);
    const __m256d dz = _mm256_set1_pd(d.z);
    const __m256d e1x = _mm256_load_pd(p.e1x);
    const __m256d e1y = _mm256_load_pd(p.e1y);
    const __m256d e1z = _mm256_load_pd(p.e1z);
    const __m256d e2x = _mm256_load_pd(p.e2x);
    const __m256d e2y = _mm256_load_pd(p.e2y);
    const __m256d e2z = _mm256_load_pd(p.e2z);

    const __m256d px = _mm256_sub_pd(_mm256_mul_pd(dy, e2z), _mm256_mul_pd(dz, e2y));
    const __m256d py = _mm256_sub_pd(_mm256_mul_pd(dz, e2x), _mm256_mul_pd(dx, e2z));
    const __m256d pz = _mm256_sub_pd(_mm256_mul_pd(dx, e2y), _mm256_mul_pd(dy, e2x));
    const __m256d det = _mm256_add_pd(
        _mm256_add_pd(_mm256_mul_pd(e1x, px), _mm256_mul_pd(e1y, py)), _mm256_mul_pd(e1z, pz));
    const __m256d inv = _mm256_div_pd(_mm256_set1_pd(1.0), det);

    const __m256d tx = _mm256_sub_pd(_mm256_set1_pd(o.x), _mm256_load_pd(p.v0x));
    const __m256d ty = _mm256_sub_pd(_mm256_set1_pd(o.y), _mm256_load_pd(p.v0y));
    const __m256d tz = _mm256_sub_pd(_mm256_set1_pd(o.z), _mm256_load_pd(p.v0z));
    const __m256d u = _mm256_mul_pd(
        _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(tx, px), _mm256_mul_pd(ty, py)),
                      _mm256_mul_pd(tz, pz)),
        inv);
    const __m256d qx = _mm256_sub_pd(_mm256_mul_pd(ty, e1z), _mm256_mul_pd(tz, e1y));
    const __m256d qy = _mm256_sub_pd(_mm256_mul_pd(tz, e1x), _mm256_mul_pd(tx, e1z));
    const __m256d qz = _mm256_sub_pd(_mm256_mul_pd(tx, e1y), _mm256_mul_pd(ty, e1x));
    const __m256d v = _mm256_mul_pd(
        _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(dx, qx), _mm256_mul_pd(dy, qy)),
                      _mm256_mul_pd(dz, qz)),
        inv);
    const __m256d t = _mm256_mul_pd(
        _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(e2x, qx), _mm256_mul_pd(e2y, qy)),
                      _mm256_mul_pd(e2z, qz)),
        inv);

    const __m256d zero = _mm256_setzero_pd();
    __m256d ok = _mm256_and_pd(_mm256_cmp_pd(u, zero, _CMP_GE_OQ),
                               _mm256_cmp_pd(v, zero, _CMP_GE_OQ));
    ok = _mm256_and_pd(ok, _mm256_cmp_pd(_mm256_add_pd(u, v), _mm256_set1_pd(1.0), _CMP_LE_OQ));
    ok = _mm256_and_pd(ok, _mm256_cmp_pd(t, _mm256_set1_pd(t_min), _CMP_GT_OQ));
    ok = _mm256_and_pd(ok, _mm256_cmp_pd(t, _mm256_set1_pd(t_max), _CMP_LE_OQ));

    const __m256d result = _mm256_blendv_pd(_mm256_set1_pd(kInf), t, ok);
    _mm256_storeu_pd(t_out, result);
    for (int lane = p.count; lane < 4; ++lane) t_out[lane] = kInf;
}

// pi/2 split with 27 zeroed low mantissa bits per piece; n * piece is exact
// for |n| < 2^26, i.e. arguments up to ~1e8.
constexpr double kTwoOverPi = 0.6366197723675814;
constexpr double kPio2Hi = 1.5707963109016418;
constexpr double kPio2Mid = 1.5893254712295857e-08;
constexpr double kPio2Lo = 6.123233995736766e-17;

inline void sincos4(__m256d x, __m256d& s_out, __m256d& c_out) {
    const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(kTwoOverPi)),
                                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(n, _mm256_set1_pd(kPio2Hi), x);
    r = _mm256_fnmadd_pd(n, _mm256_set1_pd(kPio2Mid), r);
    r = _mm256_fnmadd_pd(n, _mm256_set1_pd(kPio2Lo), r);

    // quadrant bits of n via the 1.5*2^52 mantissa-alignment trick
    const __m256d shifted = _mm256_add_pd(n, _mm256_set1_pd(6755399441055744.0));
    const __m256i qi = _mm256_castpd_si256(shifted);

    const __m256d z = _mm256_mul_pd(r, r);

    __m256d sp = _mm256_set1_pd(-1.0 / 1307674368000.0);  // -1/15!
    sp = _mm256_fmadd_pd(sp, z, _mm256_set1_pd(1.0 / 6227020800.0));
    sp = _mm256_fmadd_pd(sp, z, _mm256_set1_pd(-1.0 / 39916800.0));
    sp = _mm256_fmadd_pd(sp, z, _mm256_set1_pd(1.0 / 362880.0));
    sp = _mm256_fmadd_pd(sp, z, _mm256_set1_pd(-1.0 / 5040.0));
    sp = _mm256_fmadd_pd(sp, z, _mm256_set1_pd(1.0 / 120.0));
    sp = _mm256_fmadd_pd(sp, z, _mm256_set1_pd(-1.0 / 6.0));
    const __m256d sinr = _mm256_fmadd_pd(_mm256_mul_pd(sp, z), r, r);

    __m256d cp = _mm256_set1_pd(1.0 / 20922789888000.0);  // 1/16!
    cp = _mm256_fmadd_pd(cp, z, _mm256_set1_pd(-1.0 / 87178291200.0));
    cp = _mm256_fmadd_pd(cp, z, _mm256_set1_pd(1.0 / 479001600.0));
    cp = _mm256_fmadd_pd(cp, z, _mm256_set1_pd(-1.0 / 3628800.0));
    cp = _mm256_fmadd_pd(cp, z, _mm256_set1_pd(1.0 / 40320.0));
    cp = _mm256_fmadd_pd(cp, z, _mm256_set1_pd(-1.0 / 720.0));
    cp = _mm256_fmadd_pd(cp, z, _mm256_set1_pd(1.0 / 24.0));
    cp = _mm256_fmadd_pd(cp, z, _mm256_set1_pd(-0.5));
    const __m256d cosr = _mm256_fmadd_pd(cp, z, _mm256_set1_pd(1.0));

    // sin(r + q*pi/2): swap sin/cos when q&1, negate sin when q&2,
    // negate cos when (q+1)&2
    const __m256i one = _mm256_set1_epi64x(1);
    const __m256i two = _mm256_set1_epi64x(2);
    const __m256d swap_mask =
        _mm256_castsi256_pd(_mm256_cmpeq_epi64(_mm256_and_si256(qi, one), one));
    const __m256d s1 = _mm256_blendv_pd(sinr, cosr, swap_mask);
    const __m256d c1 = _mm256_blendv_pd(cosr, sinr, swap_mask);
    const __m256d sin_neg =
        _mm256_castsi256_pd(_mm256_cmpeq_epi64(_mm256_and_si256(qi, two), two));
    const __m256d cos_neg = _mm256_castsi256_pd(
        _mm256_cmpeq_epi64(_mm256_and_si256(_mm256_add_epi64(qi, one), two), two));
    const __m256d signbit = _mm256_set1_pd(-0.0);
    s_out = _mm256_xor_pd(s1, _mm256_and_pd(sin_neg, signbit));
    c_out = _mm256_xor_pd(c1, _mm256_and_pd(cos_neg, signbit));
}

void accumulate_phasor_avx2(double* re, double* im, std::size_t n, double amp, double theta0,
                            double dtheta) {
    const __m256d vamp = _mm256_set1_pd(amp);
    const __m256d vtheta0 = _mm256_set1_pd(theta0);
    const __m256d vdtheta = _mm256_set1_pd(dtheta);
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const __m256d kv = _mm256_set_pd(static_cast<double>(k + 3), static_cast<double>(k + 2),
                                         static_cast<double>(k + 1), static_cast<double>(k));
        const __m256d theta = _mm256_add_pd(_mm256_mul_pd(kv, vdtheta), vtheta0);
        __m256d s, c;
        sincos4(theta, s, c);
        const __m256d r = _mm256_add_pd(_mm256_loadu_pd(re + k), _mm256_mul_pd(vamp, c));
        const __m256d i = _mm256_sub_pd(_mm256_loadu_pd(im + k), _mm256_mul_pd(vamp, s));
        _mm256_storeu_pd(re + k, r);
        _mm256_storeu_pd(im + k, i);
    }
    if (k < n) {
        alignas(32) double theta_in[4] = {0, 0, 0, 0};
        alignas(32) double sv[4], cv[4];
        for (std::size_t j = k; j < n; ++j)
            theta_in[j - k] = theta0 + static_cast<double>(j) * dtheta;
        __m256d s, c;
        sincos4(_mm256_load_pd(theta_in), s, c);
        _mm256_store_pd(sv, s);
        _mm256_store_pd(cv, c);
        for (std::size_t j = k; j < n; ++j) {
            re[j] += amp * cv[j - k];
            im[j] -= amp * sv[j - k];
        }
    }
}

double sum_squares_avx2(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const __m256d v = _mm256_loadu_pd(x + k);
        acc = _mm256_fmadd_pd(v, v, acc);
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double sum = lanes[0] + lanes[1] + lanes[2] + lanes[3];
    for (; k < n; ++k) sum += x[k] * x[k];
    return sum;
}

}  // namespace

const KernelOps* avx2_ops() {
    static const KernelOps ops{"avx2", intersect_packet_avx2, accumulate_phasor_avx2,
                               sum_squares_avx2};
    return &ops;
}

}  // namespace raychan::kernels

#else

namespace raychan::kernels {
const KernelOps* avx2_ops() { return nullptr; }
}  // namespace raychan::kernels

#endif
