// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

namespace raychan {

/// 3D vector in meters (positions) or meters/second (velocities).
struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    constexpr Vec3& operator+=(const Vec3& o) {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }
    constexpr bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }
};

constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline Vec3 normalized(const Vec3& v) { return v / norm(v); }

inline double distance(const Vec3& a, const Vec3& b) { return norm(a - b); }

inline bool finite(const Vec3& v) {
    return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

/// Axis-aligned box. The empty box uses the min > max sentinel.
struct Aabb {
    Vec3 min{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
             std::numeric_limits<double>::infinity()};
    Vec3 max{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
             -std::numeric_limits<double>::infinity()};

    bool empty() const { return min.x > max.x; }

    void extend(const Vec3& p) {
        min = {std::min(min.x, p.x), std::min(min.y, p.y), std::min(min.z, p.z)};
        max = {std::max(max.x, p.x), std::max(max.y, p.y), std::max(max.z, p.z)};
    }

    void extend(const Aabb& b) {
        if (b.empty()) return;
        extend(b.min);
        extend(b.max);
    }

    bool contains(const Vec3& p, double tol = 0.0) const {
        return p.x >= min.x - tol && p.x <= max.x + tol && p.y >= min.y - tol &&
               p.y <= max.y + tol && p.z >= min.z - tol && p.z <= max.z + tol;
    }

    Vec3 extent() const { return max - min; }

    /// Slab test against a ray segment [t0, t1]; inv_dir has per-axis 1/d.
    bool hit(const Vec3& origin, const Vec3& inv_dir, double t0, double t1) const {
        double tx1 = (min.x - origin.x) * inv_dir.x;
        double tx2 = (max.x - origin.x) * inv_dir.x;
        t0 = std::max(t0, std::min(tx1, tx2));
        t1 = std::min(t1, std::max(tx1, tx2));
        double ty1 = (min.y - origin.y) * inv_dir.y;
        double ty2 = (max.y - origin.y) * inv_dir.y;
        t0 = std::max(t0, std::min(ty1, ty2));
        t1 = std::min(t1, std::max(ty1, ty2));
        double tz1 = (min.z - origin.z) * inv_dir.z;
        double tz2 = (max.z - origin.z) * inv_dir.z;
        t0 = std::max(t0, std::min(tz1, tz2));
        t1 = std::min(t1, std::max(tz1, tz2));
        return t0 <= t1;
    }
};

/// Exact speed of light in vacuum [m/s].
inline constexpr double kSpeedOfLight = 299792458.0;

/// Vacuum permittivity [F/m].
inline constexpr double kVacuumPermittivity = 8.8541878128e-12;

}  // namespace raychan
