// SPDX-License-Identifier: Apache-2.0

#include "raychan/scene.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

namespace raychan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double triangle_area(const Triangle& t) {
    return 0.5 * norm(cross(t.v1 - t.v0, t.v2 - t.v0));
}

Vec3 face_normal(const Triangle& t) { return normalized(cross(t.v1 - t.v0, t.v2 - t.v0)); }

// ---------------------------------------------------------------------------
// Restricted XML reader for the scene descriptor: declaration, comments, and
// elements with quoted attributes. No text content, no entities.
// ---------------------------------------------------------------------------

struct XmlElement {
    std::string name;
    std::map<std::string, std::string> attributes;
    std::vector<XmlElement> children;
};

class XmlParser {
public:
    XmlParser(const std::string& text, const std::string& diag_name)
        : text_(text), name_(diag_name) {}

    XmlElement parse_root() {
        skip_misc();
        XmlElement root = parse_element();
        skip_misc();
        if (pos_ != text_.size()) fail("trailing content after root element");
        return root;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        std::size_t line = 1;
        for (std::size_t i = 0; i < pos_ && i < text_.size(); ++i)
            if (text_[i] == '\n') ++line;
        throw SceneError(name_ + ":" + std::to_string(line) + ": " + what);
    }

    bool starts_with(const char* s) const { return text_.compare(pos_, std::strlen(s), s) == 0; }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    void skip_misc() {
        for (;;) {
            skip_ws();
            if (starts_with("<?")) {
                const auto end = text_.find("?>", pos_);
                if (end == std::string::npos) fail("unterminated processing instruction");
                pos_ = end + 2;
            } else if (starts_with("<!--")) {
                const auto end = text_.find("-->", pos_);
                if (end == std::string::npos) fail("unterminated comment");
                pos_ = end + 3;
            } else {
                return;
            }
        }
    }

    std::string parse_name() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' ||
                text_[pos_] == '-' || text_[pos_] == ':')) {
            ++pos_;
        }
        if (pos_ == start) fail("expected a name");
        return text_.substr(start, pos_ - start);
    }

    XmlElement parse_element() {
        if (pos_ >= text_.size() || text_[pos_] != '<') fail("expected '<'");
        ++pos_;
        XmlElement el;
        el.name = parse_name();
        for (;;) {
            skip_ws();
            if (pos_ >= text_.size()) fail("unterminated element '" + el.name + "'");
            if (starts_with("/>")) {
                pos_ += 2;
                return el;
            }
            if (text_[pos_] == '>') {
                ++pos_;
                parse_children(el);
                return el;
            }
            const std::string attr = parse_name();
            skip_ws();
            if (pos_ >= text_.size() || text_[pos_] != '=') fail("expected '=' after attribute");
            ++pos_;
            skip_ws();
            if (pos_ >= text_.size() || (text_[pos_] != '"' && text_[pos_] != '\''))
                fail("expected quoted attribute value");
            const char quote = text_[pos_++];
            const auto end = text_.find(quote, pos_);
            if (end == std::string::npos) fail("unterminated attribute value");
            el.attributes[attr] = text_.substr(pos_, end - pos_);
            pos_ = end + 1;
        }
    }

    void parse_children(XmlElement& el) {
        for (;;) {
            skip_misc();
            if (pos_ >= text_.size()) fail("unterminated element '" + el.name + "'");
            if (starts_with("</")) {
                pos_ += 2;
                const std::string closing = parse_name();
                if (closing != el.name)
                    fail("mismatched closing tag '" + closing + "' for '" + el.name + "'");
                skip_ws();
                if (pos_ >= text_.size() || text_[pos_] != '>') fail("expected '>'");
                ++pos_;
                return;
            }
            el.children.push_back(parse_element());
        }
    }

    const std::string& text_;
    std::string name_;
    std::size_t pos_ = 0;
};

double parse_number(const std::string& value, const std::string& context) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw SceneError(context + ": not a number: '" + value + "'");
    }
}

const std::string& require_attr(const XmlElement& el, const std::string& name,
                                const std::string& diag) {
    const auto it = el.attributes.find(name);
    if (it == el.attributes.end())
        throw SceneError(diag + ": <" + el.name + "> is missing attribute '" + name + "'");
    return it->second;
}

// ---------------------------------------------------------------------------
// OBJ subset: 'v' and 'f' records, 1-based indices, fan triangulation.
// ---------------------------------------------------------------------------

void load_obj(const std::string& path, std::uint32_t material_index,
              std::vector<Triangle>& out) {
    std::ifstream in(path);
    if (!in) throw SceneError("cannot open OBJ file: " + path);

    std::vector<Vec3> vertices;
    std::string line;
    std::size_t face_index = 0;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string keyword;
        if (!(ls >> keyword) || keyword[0] == '#') continue;
        if (keyword == "v") {
            Vec3 v;
            if (!(ls >> v.x >> v.y >> v.z))
                throw SceneError(path + ":" + std::to_string(line_no) + ": malformed vertex");
            vertices.push_back(v);
        } else if (keyword == "f") {
            std::vector<std::uint32_t> idx;
            std::string field;
            while (ls >> field) {
                // take the position index, ignoring /vt/vn suffixes
                const std::string first = field.substr(0, field.find('/'));
                long v = 0;
                try {
                    v = std::stol(first);
                } catch (const std::exception&) {
                    throw SceneError(path + ":" + std::to_string(line_no) + ": malformed face index");
                }
                if (v < 1 || static_cast<std::size_t>(v) > vertices.size())
                    throw SceneError(path + ":" + std::to_string(line_no) +
                                     ": face index out of range");
                idx.push_back(static_cast<std::uint32_t>(v - 1));
            }
            if (idx.size() < 3)
                throw SceneError(path + ":" + std::to_string(line_no) + ": face with < 3 vertices");
            for (std::size_t i = 1; i + 1 < idx.size(); ++i) {
                Triangle t{vertices[idx[0]], vertices[idx[i]], vertices[idx[i + 1]],
                           material_index};
                if (triangle_area(t) <= 1e-12)
                    throw SceneError("zero-area face in " + path + " (face " +
                                     std::to_string(face_index) + ")");
                out.push_back(t);
            }
            ++face_index;
        }
        // other record types (vn, vt, o, g, s, usemtl, ...) are ignored
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Scene construction: bounds, plane grouping, BVH with <= 4 triangles/leaf.
// ---------------------------------------------------------------------------

Scene::Scene(std::vector<Triangle> triangles, std::vector<Material> materials)
    : triangles_(std::move(triangles)), materials_(std::move(materials)) {
    if (!triangles_.empty() && materials_.empty())
        throw SceneError("scene has triangles but no materials");
    for (std::size_t i = 0; i < triangles_.size(); ++i) {
        const Triangle& t = triangles_[i];
        if (t.material_index >= materials_.size())
            throw SceneError("triangle " + std::to_string(i) + " references material index " +
                             std::to_string(t.material_index) + " out of range");
        if (triangle_area(t) <= 1e-12)
            throw SceneError("triangle " + std::to_string(i) + " is degenerate (area <= 1e-12)");
        bounds_.extend(t.v0);
        bounds_.extend(t.v1);
        bounds_.extend(t.v2);
    }
    for (const Material& m : materials_) {
        if (!(m.relative_permittivity >= 1.0))
            throw SceneError("material '" + m.name + "': relative_permittivity must be >= 1");
        if (!(m.conductivity >= 0.0))
            throw SceneError("material '" + m.name + "': conductivity must be >= 0");
    }

    // plane grouping: canonical (unit normal, signed offset), matched with tolerance
    struct Plane {
        Vec3 n;
        double d;
    };
    std::vector<Plane> planes;
    plane_ids_.resize(triangles_.size());
    for (std::size_t i = 0; i < triangles_.size(); ++i) {
        Vec3 n = face_normal(triangles_[i]);
        // canonical sign: first component larger than tolerance is positive
        double lead = std::abs(n.x) > 1e-12 ? n.x : (std::abs(n.y) > 1e-12 ? n.y : n.z);
        if (lead < 0.0) n = -n;
        const double d = dot(n, triangles_[i].v0);
        std::uint32_t id = static_cast<std::uint32_t>(planes.size());
        for (std::uint32_t p = 0; p < planes.size(); ++p) {
            if (norm(planes[p].n - n) < 1e-9 && std::abs(planes[p].d - d) < 1e-9) {
                id = p;
                break;
            }
        }
        if (id == planes.size()) planes.push_back({n, d});
        plane_ids_[i] = id;
    }
    plane_count_ = static_cast<std::uint32_t>(planes.size());

    if (triangles_.empty()) return;

    // BVH: median split on the longest centroid axis, max 4 triangles per leaf
    std::vector<std::uint32_t> order(triangles_.size());
    std::iota(order.begin(), order.end(), 0u);
    std::vector<Vec3> centroids(triangles_.size());
    for (std::size_t i = 0; i < triangles_.size(); ++i) {
        const Triangle& t = triangles_[i];
        centroids[i] = (t.v0 + t.v1 + t.v2) / 3.0;
    }

    const auto tri_bounds = [&](std::uint32_t i) {
        Aabb b;
        b.extend(triangles_[i].v0);
        b.extend(triangles_[i].v1);
        b.extend(triangles_[i].v2);
        return b;
    };

    struct BuildTask {
        std::size_t begin, end;
        std::int32_t node;
    };
    nodes_.push_back({});
    std::vector<BuildTask> stack{{0, order.size(), 0}};
    while (!stack.empty()) {
        const BuildTask task = stack.back();
        stack.pop_back();
        Aabb b;
        for (std::size_t i = task.begin; i < task.end; ++i) b.extend(tri_bounds(order[i]));
        nodes_[task.node].bounds = b;
        const std::size_t count = task.end - task.begin;
        if (count <= 4) {
            kernels::TriPacket packet{};
            packet.count = static_cast<int>(count);
            for (std::size_t i = 0; i < count; ++i) {
                const std::uint32_t ti = order[task.begin + i];
                const Triangle& t = triangles_[ti];
                packet.v0x[i] = t.v0.x;
                packet.v0y[i] = t.v0.y;
                packet.v0z[i] = t.v0.z;
                packet.e1x[i] = t.v1.x - t.v0.x;
                packet.e1y[i] = t.v1.y - t.v0.y;
                packet.e1z[i] = t.v1.z - t.v0.z;
                packet.e2x[i] = t.v2.x - t.v0.x;
                packet.e2y[i] = t.v2.y - t.v0.y;
                packet.e2z[i] = t.v2.z - t.v0.z;
                packet.tri_index[i] = ti;
            }
            nodes_[task.node].packet = static_cast<std::int32_t>(packets_.size());
            packets_.push_back(packet);
            continue;
        }
        Aabb cb;
        for (std::size_t i = task.begin; i < task.end; ++i) cb.extend(centroids[order[i]]);
        const Vec3 ext = cb.extent();
        const int axis = (ext.x >= ext.y && ext.x >= ext.z) ? 0 : (ext.y >= ext.z ? 1 : 2);
        const std::size_t mid = task.begin + count / 2;
        std::nth_element(order.begin() + static_cast<std::ptrdiff_t>(task.begin),
                         order.begin() + static_cast<std::ptrdiff_t>(mid),
                         order.begin() + static_cast<std::ptrdiff_t>(task.end),
                         [&](std::uint32_t a, std::uint32_t c) {
                             const double ca = axis == 0   ? centroids[a].x
                                               : axis == 1 ? centroids[a].y
                                                           : centroids[a].z;
                             const double cc = axis == 0   ? centroids[c].x
                                               : axis == 1 ? centroids[c].y
                                                           : centroids[c].z;
                             return ca < cc || (ca == cc && a < c);
                         });
        const std::int32_t left = static_cast<std::int32_t>(nodes_.size());
        nodes_.push_back({});
        nodes_.push_back({});
        nodes_[task.node].left = left;
        nodes_[task.node].right = left + 1;
        stack.push_back({task.begin, mid, left});
        stack.push_back({mid, task.end, left + 1});
    }
}

std::optional<Hit> Scene::intersect(const Vec3& origin, const Vec3& direction, double t_max) const {
    if (nodes_.empty()) return std::nullopt;
    const kernels::KernelOps& ops = kernels::active_ops();
    const Vec3 inv_dir{1.0 / direction.x, 1.0 / direction.y, 1.0 / direction.z};

    double best_t = kInf;
    std::uint32_t best_tri = 0;
    std::int32_t node_stack[96];
    int sp = 0;
    node_stack[sp++] = 0;
    while (sp > 0) {
        const detail::BvhNode& node = nodes_[node_stack[--sp]];
        const double limit = std::min(t_max, best_t);
        if (!node.bounds.hit(origin, inv_dir, 0.0, limit)) continue;
        if (node.packet >= 0) {
            double t_out[4];
            ops.intersect_packet(packets_[node.packet], origin, direction, kIntersectEpsilon,
                                 limit, t_out);
            const kernels::TriPacket& packet = packets_[node.packet];
            for (int lane = 0; lane < packet.count; ++lane) {
                const double t = t_out[lane];
                // tie on distance resolved toward the smaller triangle index
                if (t < best_t ||
                    (t == best_t && t < kInf && packet.tri_index[lane] < best_tri)) {
                    best_t = t;
                    best_tri = packet.tri_index[lane];
                }
            }
            continue;
        }
        node_stack[sp++] = node.left;
        node_stack[sp++] = node.right;
    }
    if (!(best_t <= t_max)) return std::nullopt;

    const Triangle& tri = triangles_[best_tri];
    Vec3 n = face_normal(tri);
    if (dot(n, direction) > 0.0) n = -n;
    Hit hit;
    hit.distance = best_t;
    hit.triangle_index = best_tri;
    hit.point = origin + direction * best_t;
    hit.normal = n;
    return hit;
}

bool Scene::any_hit(const Vec3& origin, const Vec3& direction, double t_min, double t_max) const {
    if (nodes_.empty() || t_max <= t_min) return false;
    const kernels::KernelOps& ops = kernels::active_ops();
    const Vec3 inv_dir{1.0 / direction.x, 1.0 / direction.y, 1.0 / direction.z};
    std::int32_t node_stack[96];
    int sp = 0;
    node_stack[sp++] = 0;
    while (sp > 0) {
        const detail::BvhNode& node = nodes_[node_stack[--sp]];
        if (!node.bounds.hit(origin, inv_dir, 0.0, t_max)) continue;
        if (node.packet >= 0) {
            double t_out[4];
            ops.intersect_packet(packets_[node.packet], origin, direction, t_min, t_max, t_out);
            for (int lane = 0; lane < packets_[node.packet].count; ++lane)
                if (t_out[lane] < kInf) return true;
            continue;
        }
        node_stack[sp++] = node.left;
        node_stack[sp++] = node.right;
    }
    return false;
}

bool Scene::segment_visible(const Vec3& a, const Vec3& b) const {
    const double length = distance(a, b);
    if (length == 0.0) return true;
    const Vec3 dir = (b - a) / length;
    return !any_hit(a, dir, kIntersectEpsilon, length - kIntersectEpsilon);
}

Vec3 mirror_point(const Vec3& point, const Triangle& triangle) {
    const Vec3 n = face_normal(triangle);
    const double d = dot(point - triangle.v0, n);
    return point - n * (2.0 * d);
}

// ---------------------------------------------------------------------------
// Descriptor loading
// ---------------------------------------------------------------------------

namespace {

Scene load_from_element(const XmlElement& root, const std::string& base_dir,
                        const std::string& diag) {
    if (root.name != "scene") throw SceneError(diag + ": root element must be <scene>");

    std::vector<Material> materials;
    for (const XmlElement& el : root.children) {
        if (el.name != "material") continue;
        Material m;
        m.name = require_attr(el, "name", diag);
        m.relative_permittivity =
            parse_number(require_attr(el, "permittivity", diag), diag + ": material " + m.name);
        m.conductivity =
            parse_number(require_attr(el, "conductivity", diag), diag + ": material " + m.name);
        for (const Material& prev : materials)
            if (prev.name == m.name)
                throw SceneError(diag + ": duplicate material name '" + m.name + "'");
        materials.push_back(std::move(m));
    }

    std::vector<Triangle> triangles;
    for (const XmlElement& el : root.children) {
        if (el.name == "material") continue;
        if (el.name != "shape")
            throw SceneError(diag + ": unknown element <" + el.name + "> in <scene>");
        const std::string obj = require_attr(el, "obj", diag);
        const std::string material_name = require_attr(el, "material", diag);
        std::uint32_t material_index = static_cast<std::uint32_t>(materials.size());
        for (std::uint32_t i = 0; i < materials.size(); ++i)
            if (materials[i].name == material_name) material_index = i;
        if (material_index == materials.size())
            throw SceneError(diag + ": shape '" + obj + "' references unknown material '" +
                             material_name + "'");
        std::filesystem::path obj_path(obj);
        if (obj_path.is_relative()) obj_path = std::filesystem::path(base_dir) / obj_path;
        load_obj(obj_path.string(), material_index, triangles);
    }

    return Scene(std::move(triangles), std::move(materials));
}

}  // namespace

Scene load_scene(const std::string& descriptor_path) {
    std::ifstream in(descriptor_path);
    if (!in) throw SceneError("cannot open scene descriptor: " + descriptor_path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    XmlParser parser(text, descriptor_path);
    const std::string base_dir = std::filesystem::path(descriptor_path).parent_path().string();
    return load_from_element(parser.parse_root(), base_dir.empty() ? "." : base_dir,
                             descriptor_path);
}

Scene load_scene_from_string(const std::string& xml, const std::string& base_dir,
                             const std::string& diag_name) {
    XmlParser parser(xml, diag_name);
    return load_from_element(parser.parse_root(), base_dir, diag_name);
}

}  // namespace raychan
