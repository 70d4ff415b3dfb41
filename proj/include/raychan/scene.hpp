// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "raychan/geom.hpp"
#include "raychan/kernels.hpp"

namespace raychan {

/// Electromagnetic surface description.
struct Material {
    std::string name;
    double relative_permittivity = 1.0;  // >= 1
    double conductivity = 0.0;           // S/m, >= 0
};

struct Triangle {
    Vec3 v0, v1, v2;
    std::uint32_t material_index = 0;
};

struct Hit {
    double distance = 0.0;
    std::uint32_t triangle_index = 0;
    Vec3 point;
    Vec3 normal;  // unit, oriented against the incoming ray
};

struct SceneError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {
struct BvhNode {
    Aabb bounds;
    std::int32_t left = -1;    // child node index, -1 for leaf
    std::int32_t right = -1;
    std::int32_t packet = -1;  // leaf packet index
};
}  // namespace detail

/// Immutable triangle soup with materials, a BVH and plane grouping for the
/// image method. Safe for concurrent read-only queries.
class Scene {
public:
    Scene() = default;
    Scene(std::vector<Triangle> triangles, std::vector<Material> materials);

    const std::vector<Triangle>& triangles() const { return triangles_; }
    const std::vector<Material>& materials() const { return materials_; }
    const Aabb& bounds() const { return bounds_; }

    /// Coplanar triangles share a plane id (consecutive bounces off the same
    /// plane are geometrically impossible, so the tracer prunes them).
    std::uint32_t plane_id(std::uint32_t triangle_index) const { return plane_ids_[triangle_index]; }
    std::uint32_t plane_count() const { return plane_count_; }

    /// Nearest hit with distance in (eps, t_max]; eps = 1e-6 m guards against
    /// re-hitting the surface a ray starts on. |direction| must be 1.
    std::optional<Hit> intersect(const Vec3& origin, const Vec3& direction, double t_max) const;

    /// True iff no triangle intersects the open segment (a, b), with the same
    /// 1e-6 m guard applied at both endpoints.
    bool segment_visible(const Vec3& a, const Vec3& b) const;

    static constexpr double kIntersectEpsilon = 1e-6;

private:
    bool any_hit(const Vec3& origin, const Vec3& direction, double t_min, double t_max) const;

    std::vector<Triangle> triangles_;
    std::vector<Material> materials_;
    std::vector<std::uint32_t> plane_ids_;
    std::uint32_t plane_count_ = 0;
    Aabb bounds_;
    std::vector<detail::BvhNode> nodes_;
    std::vector<kernels::TriPacket> packets_;
};

/// Reflection of a point across the triangle's supporting plane.
Vec3 mirror_point(const Vec3& point, const Triangle& triangle);

/// Loads an XML scene descriptor referencing OBJ meshes with materials.
Scene load_scene(const std::string& descriptor_path);

/// Same, from descriptor text; relative OBJ paths resolve against base_dir.
Scene load_scene_from_string(const std::string& xml, const std::string& base_dir,
                             const std::string& diag_name = "<inline>");

}  // namespace raychan
