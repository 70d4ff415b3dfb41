// SPDX-License-Identifier: Apache-2.0

#include "raychan/raytracer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>

#include "raychan/thread_pool.hpp"

namespace raychan {

namespace {

using std::numbers::pi;

struct SequenceWalk {
    std::vector<Vec3> points;  // reflection points, tx-to-rx order
    double total_length = 0.0;
};

bool point_in_triangle(const Vec3& p, const Triangle& t) {
    const Vec3 e1 = t.v1 - t.v0;
    const Vec3 e2 = t.v2 - t.v0;
    const Vec3 w = p - t.v0;
    const double d11 = dot(e1, e1);
    const double d12 = dot(e1, e2);
    const double d22 = dot(e2, e2);
    const double dw1 = dot(w, e1);
    const double dw2 = dot(w, e2);
    const double denom = d11 * d22 - d12 * d12;
    const double u = (d22 * dw1 - d12 * dw2) / denom;
    const double v = (d11 * dw2 - d12 * dw1) / denom;
    const double tol = 1e-9;
    return u >= -tol && v >= -tol && u + v <= 1.0 + tol;
}

// Backward crossing walk of the image method: with images[i] the transmitter
// mirrored through faces seq[0..i], the last reflection point is where the
// segment (rx, images[k-1]) pierces face seq[k-1], and so on toward tx.
std::optional<SequenceWalk> validate_sequence(const Scene& scene, const Vec3& tx, const Vec3& rx,
                                              const std::vector<std::uint32_t>& seq,
                                              const std::vector<Vec3>& images) {
    const std::size_t k = seq.size();
    std::vector<Vec3> points(k);
    Vec3 target = rx;
    for (std::size_t i = k; i-- > 0;) {
        const Triangle& tri = scene.triangles()[seq[i]];
        const Vec3 n = normalized(cross(tri.v1 - tri.v0, tri.v2 - tri.v0));
        const Vec3 toward = images[i] - target;
        const double denom = dot(n, toward);
        if (denom == 0.0) return std::nullopt;
        const double s = (dot(n, tri.v0) - dot(n, target)) / denom;
        if (!(s > 1e-12 && s < 1.0 - 1e-12)) return std::nullopt;
        const Vec3 p = target + toward * s;
        if (!point_in_triangle(p, tri)) return std::nullopt;
        points[i] = p;
        target = p;
    }

    SequenceWalk walk;
    walk.points = std::move(points);
    Vec3 prev = tx;
    for (const Vec3& p : walk.points) {
        if (!scene.segment_visible(prev, p)) return std::nullopt;
        walk.total_length += distance(prev, p);
        prev = p;
    }
    if (!scene.segment_visible(prev, rx)) return std::nullopt;
    walk.total_length += distance(prev, rx);
    return walk;
}

bool same_geometry(const PropagationPath& a, const PropagationPath& b) {
    if (a.reflection_points.size() != b.reflection_points.size()) return false;
    for (std::size_t i = 0; i < a.reflection_points.size(); ++i)
        if (norm(a.reflection_points[i] - b.reflection_points[i]) > 1e-9) return false;
    return true;
}

bool path_order(const PropagationPath& a, const PropagationPath& b) {
    if (a.delay != b.delay) return a.delay < b.delay;
    if (a.reflection_points.size() != b.reflection_points.size())
        return a.reflection_points.size() < b.reflection_points.size();
    for (std::size_t i = 0; i < a.reflection_points.size(); ++i) {
        const Vec3& pa = a.reflection_points[i];
        const Vec3& pb = b.reflection_points[i];
        if (pa.x != pb.x) return pa.x < pb.x;
        if (pa.y != pb.y) return pa.y < pb.y;
        if (pa.z != pb.z) return pa.z < pb.z;
    }
    return false;
}

}  // namespace

std::vector<PropagationPath> trace_paths(const Scene& scene, const Vec3& tx, const Vec3& rx,
                                         int max_order) {
    if (!(finite(tx) && finite(rx)) || (tx == rx))
        throw std::invalid_argument("trace_paths: tx and rx must be distinct finite positions");

    std::vector<PropagationPath> paths;
    if (scene.segment_visible(tx, rx)) {
        PropagationPath los;
        los.total_length = distance(tx, rx);
        los.delay = los.total_length / kSpeedOfLight;
        paths.push_back(std::move(los));
    }

    const std::size_t face_count = scene.triangles().size();
    std::vector<std::uint32_t> seq;
    std::vector<Vec3> images;

    const auto descend = [&](auto&& self) -> void {
        const Vec3 base = images.empty() ? tx : images.back();
        for (std::uint32_t f = 0; f < face_count; ++f) {
            if (!seq.empty() && scene.plane_id(f) == scene.plane_id(seq.back()))
                continue;  // consecutive bounces off one plane are impossible
            seq.push_back(f);
            images.push_back(mirror_point(base, scene.triangles()[f]));
            if (auto walk = validate_sequence(scene, tx, rx, seq, images)) {
                PropagationPath path;
                path.reflection_points = walk->points;
                path.faces = seq;
                path.total_length = walk->total_length;
                path.delay = walk->total_length / kSpeedOfLight;
                paths.push_back(std::move(path));
            }
            if (static_cast<int>(seq.size()) < max_order) self(self);
            seq.pop_back();
            images.pop_back();
        }
    };
    if (max_order > 0 && face_count > 0) descend(descend);

    std::sort(paths.begin(), paths.end(), path_order);
    std::vector<PropagationPath> unique;
    for (PropagationPath& p : paths) {
        bool duplicate = false;
        for (const PropagationPath& q : unique)
            if (same_geometry(p, q)) {
                duplicate = true;
                break;
            }
        if (!duplicate) unique.push_back(std::move(p));
    }
    return unique;
}

std::complex<double> fresnel_coefficient(double cos_incidence, const Material& material,
                                         double frequency) {
    const std::complex<double> eta(
        material.relative_permittivity,
        -material.conductivity / (2.0 * pi * frequency * kVacuumPermittivity));
    const double sin2 = 1.0 - cos_incidence * cos_incidence;
    const std::complex<double> root = std::sqrt(eta - sin2);
    return (cos_incidence - root) / (cos_incidence + root);
}

PropagationPath finalize_path(PropagationPath path, const Scene& scene, const Vec3& tx,
                              double frequency) {
    const double wavelength = kSpeedOfLight / frequency;
    double amplitude = wavelength / (4.0 * pi * path.total_length);
    double reflection_phase = 0.0;
    Vec3 prev = tx;
    for (std::size_t i = 0; i < path.reflection_points.size(); ++i) {
        const Triangle& tri = scene.triangles()[path.faces[i]];
        const Vec3 n = normalized(cross(tri.v1 - tri.v0, tri.v2 - tri.v0));
        const Vec3 d_in = normalized(path.reflection_points[i] - prev);
        const double cos_i = std::abs(dot(d_in, n));
        const std::complex<double> r =
            fresnel_coefficient(cos_i, scene.materials()[tri.material_index], frequency);
        amplitude *= std::abs(r);
        reflection_phase += std::arg(r);
        prev = path.reflection_points[i];
    }
    path.amplitude = amplitude;
    double phase = std::fmod(2.0 * pi * frequency * path.delay - reflection_phase, 2.0 * pi);
    if (phase < 0.0) phase += 2.0 * pi;
    path.phase = phase;
    return path;
}

Cir compute_cir(const Scene& scene, const Vec3& tx, const Vec3& rx, const RadioParams& params) {
    Cir cir;
    cir.components = trace_paths(scene, tx, rx, params.max_reflection_order);
    for (PropagationPath& p : cir.components)
        p = finalize_path(std::move(p), scene, tx, params.center_frequency);
    return cir;
}

Cfr compute_cfr(const Cir& cir, const RadioParams& params) {
    const std::size_t n = params.fft_size;
    const double df = params.bandwidth / static_cast<double>(n);
    std::vector<double> re(n, 0.0);
    std::vector<double> im(n, 0.0);
    const kernels::KernelOps& ops = kernels::active_ops();
    for (const PropagationPath& p : cir.components) {
        // theta_k = phi + 2 pi (k - N/2) df t, linear in k
        const double dtheta = 2.0 * pi * df * p.delay;
        const double theta0 = p.phase - pi * static_cast<double>(n) * df * p.delay;
        ops.accumulate_phasor(re.data(), im.data(), n, p.amplitude, theta0, dtheta);
    }
    Cfr cfr;
    cfr.subcarrier_spacing = df;
    cfr.values.resize(n);
    for (std::size_t k = 0; k < n; ++k) cfr.values[k] = {re[k], im[k]};
    return cfr;
}

double path_loss_db(const Cfr& cfr) {
    if (cfr.values.empty()) return kBlockedPathLossDb;
    const kernels::KernelOps& ops = kernels::active_ops();
    const double power = ops.sum_squares(reinterpret_cast<const double*>(cfr.values.data()),
                                         cfr.values.size() * 2);
    if (power == 0.0) return kBlockedPathLossDb;
    return -10.0 * std::log10(power / static_cast<double>(cfr.values.size()));
}

double propagation_delay(const Cir& cir, double straight_line_distance) {
    if (cir.components.empty()) return straight_line_distance / kSpeedOfLight;
    double best = cir.components.front().delay;
    for (const PropagationPath& p : cir.components) best = std::min(best, p.delay);
    return best;
}

double friis_path_loss_db(double dist, double frequency) {
    return 20.0 * std::log10(4.0 * pi * dist * frequency / kSpeedOfLight);
}

ChannelRecord compute_p2p(const Scene& scene, const Vec3& tx, const Vec3& rx,
                          const RadioParams& params) {
    const Cir cir = compute_cir(scene, tx, rx, params);
    ChannelRecord record;
    record.cfr = compute_cfr(cir, params);
    record.path_loss = path_loss_db(record.cfr);
    record.delay = propagation_delay(cir, distance(tx, rx));
    return record;
}

std::vector<ChannelRecord> compute_p2mp(const Scene& scene, const Vec3& tx,
                                        const std::vector<Vec3>& receivers,
                                        const RadioParams& params) {
    std::vector<ChannelRecord> records(receivers.size());
    ThreadPool::global().parallel_for(receivers.size(), [&](std::size_t i) {
        records[i] = compute_p2p(scene, tx, receivers[i], params);
    });
    return records;
}

}  // namespace raychan
