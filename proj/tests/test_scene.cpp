// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "raychan/scene.hpp"

using namespace raychan;

namespace {

Material default_material() { return {"wall", 4.0, 0.01}; }

// two triangles covering [-5, 5]^2 at z = 0
Scene floor_pair_scene() {
    std::vector<Triangle> tris{
        {{-5, -5, 0}, {5, -5, 0}, {5, 5, 0}, 0},
        {{-5, -5, 0}, {5, 5, 0}, {-5, 5, 0}, 0},
    };
    return Scene(std::move(tris), {default_material()});
}

std::filesystem::path temp_dir() {
    const auto dir = std::filesystem::temp_directory_path() / "raychan_scene_test";
    std::filesystem::create_directories(dir);
    return dir;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

// faces contribute (vertex count - 2) triangles each under fan triangulation
std::size_t count_fan_triangles(const std::filesystem::path& obj) {
    std::ifstream in(obj);
    REQUIRE(in.good());
    std::string line;
    std::size_t total = 0;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string kw;
        if (!(ls >> kw) || kw != "f") continue;
        std::size_t verts = 0;
        std::string field;
        while (ls >> field) ++verts;
        total += verts - 2;
    }
    return total;
}

}  // namespace

TEST_CASE("empty descriptor gives an empty scene with sentinel bounds") {
    const Scene scene = load_scene_from_string("<scene></scene>", ".");
    CHECK(scene.triangles().empty());
    CHECK(scene.bounds().empty());
    CHECK(scene.bounds().min.x > scene.bounds().max.x);
    CHECK(scene.segment_visible({0, 0, 0}, {1, 1, 1}));
    CHECK(!scene.intersect({0, 0, 0}, {1, 0, 0}, 100.0));
}

TEST_CASE("two_rooms loads with triangle count equal to the fixture face sum") {
    const Scene scene = load_scene("scenes/two_rooms/two_rooms.xml");
    std::size_t expected = 0;
    for (const char* name : {"floor.obj", "ceiling.obj", "walls.obj", "divider.obj"})
        expected += count_fan_triangles(std::filesystem::path("scenes/two_rooms") / name);
    CHECK(scene.triangles().size() == expected);
    CHECK(scene.materials().size() == 2);
    CHECK(scene.bounds().min.x == doctest::Approx(0.0));
    CHECK(scene.bounds().max.x == doctest::Approx(10.0));
    CHECK(scene.bounds().max.z == doctest::Approx(3.0));
}

TEST_CASE("unknown material in a shape is reported by name") {
    const auto dir = temp_dir();
    write_file(dir / "box.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n");
    const std::string xml =
        "<scene>"
        "<material name=\"metal\" permittivity=\"1\" conductivity=\"1e7\"/>"
        "<shape obj=\"box.obj\" material=\"glass\"/>"
        "</scene>";
    CHECK_THROWS_WITH_AS(load_scene_from_string(xml, dir.string()),
                         doctest::Contains("glass"), SceneError);
}

TEST_CASE("zero-area face is rejected naming file and face index") {
    const auto dir = temp_dir();
    write_file(dir / "bad.obj",
               "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\nv 2 0 0\nv 2 0 0\nv 2 0 0\nf 4 5 6\n");
    const std::string xml =
        "<scene>"
        "<material name=\"m\" permittivity=\"2\" conductivity=\"0\"/>"
        "<shape obj=\"bad.obj\" material=\"m\"/>"
        "</scene>";
    try {
        load_scene_from_string(xml, dir.string());
        FAIL("expected SceneError");
    } catch (const SceneError& e) {
        const std::string what = e.what();
        CHECK(what.find("bad.obj") != std::string::npos);
        CHECK(what.find("face 1") != std::string::npos);
    }
}

TEST_CASE("missing OBJ file is reported") {
    const std::string xml =
        "<scene>"
        "<material name=\"m\" permittivity=\"2\" conductivity=\"0\"/>"
        "<shape obj=\"no_such_file.obj\" material=\"m\"/>"
        "</scene>";
    CHECK_THROWS_WITH_AS(load_scene_from_string(xml, temp_dir().string()),
                         doctest::Contains("no_such_file.obj"), SceneError);
}

TEST_CASE("intersect: analytic floor hit") {
    const Scene scene = floor_pair_scene();
    const auto hit = scene.intersect({0, 0, 1}, {0, 0, -1}, 10.0);
    REQUIRE(hit.has_value());
    CHECK(hit->distance == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(hit->normal.z == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(norm(hit->point - Vec3{0, 0, 0}) < 1e-12);

    // pointing away
    CHECK(!scene.intersect({0, 0, 1}, {0, 0, 1}, 10.0));
    // parallel to the plane
    CHECK(!scene.intersect({0, 0, 1}, {1, 0, 0}, 10.0));
    // two-sided: from below the normal flips toward the ray origin
    const auto from_below = scene.intersect({0, 0, -1}, {0, 0, 1}, 10.0);
    REQUIRE(from_below.has_value());
    CHECK(from_below->normal.z == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("intersect is deterministic and satisfies the point equation") {
    const Scene scene = load_scene("scenes/two_rooms/two_rooms.xml");
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> px(0.2, 9.8), py(0.2, 4.8), pz(0.2, 2.8);
    std::uniform_real_distribution<double> sphere(-1.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        const Vec3 origin{px(rng), py(rng), pz(rng)};
        Vec3 dir{sphere(rng), sphere(rng), sphere(rng)};
        if (norm(dir) < 1e-3) dir = {1, 0, 0};
        dir = normalized(dir);
        const auto a = scene.intersect(origin, dir, 100.0);
        const auto b = scene.intersect(origin, dir, 100.0);
        REQUIRE(a.has_value());  // closed shell: every interior ray hits
        REQUIRE(b.has_value());
        CHECK(a->distance == b->distance);
        CHECK(a->triangle_index == b->triangle_index);
        CHECK(a->point == b->point);
        CHECK(norm(a->point - (origin + dir * a->distance)) <= 1e-9 * a->distance);
        CHECK(std::abs(norm(a->normal) - 1.0) < 1e-9);
        CHECK(dot(a->normal, dir) < 0.0);
    }
}

TEST_CASE("mirror_point examples and involution") {
    const Triangle z0{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, 0};
    const Vec3 m = mirror_point({1, 2, 3}, z0);
    CHECK(norm(m - Vec3{1, 2, -3}) < 1e-12);
    CHECK(norm(mirror_point({0.3, 0.4, 0.0}, z0) - Vec3{0.3, 0.4, 0.0}) < 1e-12);

    // plane x + z = 1 with normal (1, 0, 1)/sqrt(2)
    const Triangle slanted{{1, 0, 0}, {1, 1, 0}, {0, 0, 1}, 0};
    const Vec3 p{0, 0, 2};
    const Vec3 n = normalized(Vec3{1, 0, 1});
    const double sd = dot(p - Vec3{1, 0, 0}, n);
    const Vec3 expected = p - n * (2.0 * sd);
    CHECK(norm(mirror_point(p, slanted) - expected) < 1e-12);

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> c(-10.0, 10.0);
    for (int i = 0; i < 200; ++i) {
        const Triangle t{{c(rng), c(rng), c(rng)}, {c(rng), c(rng), c(rng)},
                         {c(rng), c(rng), c(rng)}, 0};
        if (norm(cross(t.v1 - t.v0, t.v2 - t.v0)) < 1e-6) continue;
        const Vec3 q{c(rng), c(rng), c(rng)};
        CHECK(norm(mirror_point(mirror_point(q, t), t) - q) < 1e-9);
    }
}

TEST_CASE("segment visibility in two_rooms: wall blocks, doorway passes") {
    const Scene scene = load_scene("scenes/two_rooms/two_rooms.xml");
    const Vec3 left{2.0, 0.8, 1.5};
    const Vec3 right_blocked{8.0, 0.8, 1.5};  // straight segment crosses the wall at y=0.8
    const Vec3 left_door{2.0, 2.5, 1.5};
    const Vec3 right_door{8.0, 2.5, 1.5};     // straight segment passes the open door
    CHECK(!scene.segment_visible(left, right_blocked));
    CHECK(scene.segment_visible(left_door, right_door));
    // symmetry
    CHECK(scene.segment_visible(right_door, left_door));
    CHECK(!scene.segment_visible(right_blocked, left));
}

TEST_CASE("scaling geometry and ray scales hit distances") {
    std::vector<Triangle> tris{
        {{-5, -5, 2}, {5, -5, 2}, {5, 5, 2}, 0},
        {{-5, -5, 2}, {5, 5, 2}, {-5, 5, 2}, 0},
    };
    const Scene base(std::vector<Triangle>(tris), {default_material()});
    for (double s : {2.0, 3.7}) {
        std::vector<Triangle> scaled = tris;
        for (Triangle& t : scaled) {
            t.v0 = t.v0 * s;
            t.v1 = t.v1 * s;
            t.v2 = t.v2 * s;
        }
        const Scene scene(std::move(scaled), {default_material()});
        const Vec3 origin{0.5, -0.25, 0.0};
        const Vec3 dir = normalized(Vec3{0.1, 0.2, 1.0});
        const auto h0 = base.intersect(origin, dir, 100.0);
        const auto h1 = scene.intersect(origin * s, dir, 100.0 * s);
        REQUIRE(h0.has_value());
        REQUIRE(h1.has_value());
        CHECK(h1->distance == doctest::Approx(h0->distance * s).epsilon(1e-12));
    }
}

TEST_CASE("scene validation rejects bad materials and indices") {
    CHECK_THROWS_AS(Scene({{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, 3}}, {default_material()}),
                    SceneError);
    CHECK_THROWS_AS(Scene({{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, 0}}, {{"thin_air", 0.5, 0.0}}),
                    SceneError);
    CHECK_THROWS_AS(Scene({{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, 0}}, {{"negative", 2.0, -1.0}}),
                    SceneError);
    const std::string xml =
        "<scene>"
        "<material name=\"m\" permittivity=\"2\" conductivity=\"0\"/>"
        "<material name=\"m\" permittivity=\"3\" conductivity=\"0\"/>"
        "</scene>";
    CHECK_THROWS_AS(load_scene_from_string(xml, "."), SceneError);
}

TEST_CASE("plane grouping: coplanar fixture triangles share plane ids") {
    const Scene scene = load_scene("scenes/two_rooms/two_rooms.xml");
    // 18 triangles forming 9 quads, but the three divider pieces are coplanar:
    // floor, ceiling, 4 outer walls, 1 divider plane = 7 planes
    CHECK(scene.plane_count() == 7);
}
