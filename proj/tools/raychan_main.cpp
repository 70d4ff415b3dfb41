// SPDX-License-Identifier: Apache-2.0

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "raychan/channel_server.hpp"
#include "raychan/net.hpp"
#include "raychan/netsim.hpp"
#include "raychan/raytracer.hpp"
#include "raychan/thread_pool.hpp"

namespace {

using namespace raychan;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct ServerHandle {
    std::unique_ptr<std::thread> thread;
    std::string host;
    std::uint16_t port = 0;
};

ServerHandle start_embedded_server() {
    ServerHandle handle;
    TcpListener listener = TcpListener::bind("127.0.0.1", 0);
    handle.host = "127.0.0.1";
    handle.port = listener.port();
    handle.thread = std::make_unique<std::thread>([l = std::move(listener)]() mutable {
        ChannelServer server;
        server.serve(l, /*once=*/true);
    });
    return handle;
}

int cmd_validate(const std::vector<double>& distances, double frequency,
                 const std::string& endpoint) {
    ServerHandle embedded;
    std::string host;
    std::uint16_t port = 0;
    if (endpoint.empty()) {
        embedded = start_embedded_server();
        host = embedded.host;
        port = embedded.port;
    } else {
        std::tie(host, port) = parse_endpoint(endpoint);
    }

    int exit_code = kExitOk;
    try {
        TcpConnection conn = TcpConnection::connect(host, port);

        InitRequest init;
        init.scene_inline_xml = "<scene></scene>";
        init.center_frequency = frequency;
        init.bandwidth = 20e6;
        init.fft_size = 64;
        init.noise_floor_dbm = -94.0;
        init.tx_power_dbm = 20.0;
        init.max_reflection_order = 1;
        init.prefetch_horizon = 0;
        init.batch_budget = 256;
        init.dt_mob = 0.01;
        init.direction_hold = 2.0;
        init.nodes.push_back({0, 0, {0.0, 0.0, 0.0}, 0.0, 1});
        for (std::size_t i = 0; i < distances.size(); ++i)
            init.nodes.push_back({i + 1, 0, {distances[i], 0.0, 0.0}, 0.0, 1});
        conn.send_frame(init);
        auto reply = conn.recv_frame();
        const auto* init_resp = reply ? std::get_if<InitResponse>(&*reply) : nullptr;
        if (!init_resp || !init_resp->ok) {
            std::fprintf(stderr, "validate: server init failed: %s\n",
                         init_resp ? init_resp->error_text.c_str() : "connection closed");
            return kExitRuntime;
        }

        conn.send_frame(ChannelRequest{0.0, 0});
        reply = conn.recv_frame();
        const auto* resp = reply ? std::get_if<ChannelResponse>(&*reply) : nullptr;
        if (!resp || !resp->ok) {
            std::fprintf(stderr, "validate: channel request failed\n");
            return kExitRuntime;
        }

        std::printf("%12s %16s %16s %18s %18s\n", "distance_m", "raytraced_pl_db", "friis_pl_db",
                    "raytraced_delay_s", "d_over_c_s");
        double max_pl_dev = 0.0;
        double max_delay_dev = 0.0;
        for (const ResponseRecord& r : resp->records) {
            const double d = distances[r.rx_id - 1];
            const double friis = friis_path_loss_db(d, frequency);
            const double expected_delay = d / kSpeedOfLight;
            max_pl_dev = std::max(max_pl_dev, std::abs(r.path_loss - friis));
            max_delay_dev = std::max(max_delay_dev, std::abs(r.delay - expected_delay));
            std::printf("%12g %16.6f %16.6f %18.12e %18.12e\n", d, r.path_loss, friis, r.delay,
                        expected_delay);
        }
        std::printf("max path-loss deviation: %.3e dB (limit 1e-3)\n", max_pl_dev);
        std::printf("max delay deviation:     %.3e s  (limit 1e-12)\n", max_delay_dev);
        exit_code = (max_pl_dev < 1e-3 && max_delay_dev < 1e-12) ? kExitOk : kExitValidation;

        conn.send_frame(ShutdownRequest{});
        (void)conn.recv_frame();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "validate: %s\n", e.what());
        exit_code = kExitRuntime;
    }
    if (embedded.thread && embedded.thread->joinable()) embedded.thread->join();
    return exit_code;
}

int cmd_run(const std::string& config_path, const std::string& out_dir) {
    ScenarioConfig cfg;
    try {
        cfg = load_scenario(config_path);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "run: %s\n", e.what());
        return kExitValidation;
    }
    try {
        std::filesystem::create_directories(out_dir);
        const ScenarioMetrics metrics = run_scenario(cfg);
        const std::string packets_path = out_dir + "/packets.csv";
        const std::string summary_path = out_dir + "/summary.json";
        write_packets_csv(metrics.packets, packets_path);
        write_summary_json(cfg, metrics, summary_path);
        std::printf("run: %zu packets, %" PRIu64 " requests, wall %.3f s -> %s, %s\n",
                    metrics.packets.size(), metrics.requests_issued, metrics.wall_clock_s,
                    packets_path.c_str(), summary_path.c_str());
        return kExitOk;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "run: %s\n", e.what());
        return kExitRuntime;
    }
}

struct BenchScenario {
    const char* name;
    double packets_per_second;
    double speed;
};

int cmd_bench(const std::string& scene, const std::vector<std::uint64_t>& sta_counts,
              double duration, const std::string& out_dir) {
    if (sta_counts.empty()) {
        std::fprintf(stderr, "bench: sta_counts must not be empty\n");
        return kExitValidation;
    }
    const BenchScenario matrix[] = {
        {"hT_hM", 50.0, 7.0},
        {"lT_lM", 1.0, 1.0},
        {"hT_zM", 50.0, 0.0},
    };

    try {
        std::filesystem::create_directories(out_dir);
        const std::string csv_path = out_dir + "/bench.csv";
        std::FILE* csv = std::fopen(csv_path.c_str(), "wb");
        if (!csv) throw std::runtime_error("cannot write " + csv_path);
        std::fprintf(csv,
                     "scenario,n_sta,wall_clock_s,channel_requests,records_computed,"
                     "cache_hit_rate\n");
        std::printf("%8s %6s %14s %18s %18s %15s\n", "scenario", "n_sta", "wall_clock_s",
                    "channel_requests", "records_computed", "cache_hit_rate");

        for (const BenchScenario& sc : matrix) {
            for (std::uint64_t n_sta : sta_counts) {
                ScenarioConfig cfg;
                cfg.scene_path = scene;
                cfg.duration_s = duration;
                cfg.seed = 1;
                cfg.packets_per_second = sc.packets_per_second;
                cfg.ap_id = 0;
                cfg.ap_position = {3.0, 2.5, 2.0};
                for (std::uint64_t i = 0; i < n_sta; ++i) {
                    StaConfig sta;
                    sta.id = i + 1;
                    sta.position = {0.8 + static_cast<double>(i % 5) * 1.1,
                                    0.7 + static_cast<double>(i / 5) * 0.9, 1.5};
                    sta.model = sc.speed > 0.0 ? MobilityModel::random_walk_3d
                                               : MobilityModel::constant_position;
                    sta.speed = sc.speed;
                    cfg.stas.push_back(sta);
                }
                const ScenarioMetrics m = run_scenario(cfg);
                const std::uint64_t lookups = m.cache.hits + m.cache.misses;
                const double hit_rate =
                    lookups ? static_cast<double>(m.cache.hits) / static_cast<double>(lookups)
                            : 0.0;
                std::fprintf(csv, "%s,%" PRIu64 ",%.6f,%" PRIu64 ",%" PRIu64 ",%.6f\n", sc.name,
                             n_sta, m.wall_clock_s, m.requests_issued, m.records_received,
                             hit_rate);
                std::fflush(csv);
                std::printf("%8s %6" PRIu64 " %14.6f %18" PRIu64 " %18" PRIu64 " %15.6f\n",
                            sc.name, n_sta, m.wall_clock_s, m.requests_issued,
                            m.records_received, hit_rate);
                std::fflush(stdout);
            }
        }
        std::fclose(csv);
        std::printf("bench: wrote %s\n", csv_path.c_str());
        return kExitOk;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "bench: %s\n", e.what());
        return kExitRuntime;
    }
}

int cmd_server(const std::string& listen, unsigned workers) {
    try {
        if (workers > 0) ThreadPool::set_global_width(workers);
        auto [host, port] = parse_endpoint(listen);
        TcpListener listener = TcpListener::bind(host, port);
        std::printf("raychan server listening on %s:%u (%u workers)\n", host.c_str(),
                    listener.port(), ThreadPool::global().width());
        std::fflush(stdout);
        ChannelServer server({.log_requests = true});
        server.serve(listener, /*once=*/false);
        return kExitOk;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "server: %s\n", e.what());
        return kExitRuntime;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"raychan: ray-traced wireless channels for packet-level network simulation"};
    app.require_subcommand(1);

    auto* validate = app.add_subcommand(
        "validate", "Compare ray-traced free-space path loss and delay against closed forms");
    std::vector<double> distances{1, 3, 10, 30, 100, 300, 1000};
    double frequency = 5e9;
    std::string endpoint;
    validate->add_option("--distances", distances, "TX-RX distances in meters");
    validate->add_option("--frequency", frequency, "Carrier frequency in Hz");
    validate->add_option("--endpoint", endpoint, "Use an external server instead of embedded")
        ->envname("RAYCHAN_ENDPOINT");

    auto* run = app.add_subcommand("run", "Run a scenario config and write packets.csv/summary.json");
    std::string config_path;
    std::string out_dir = "out";
    run->add_option("config", config_path, "Scenario JSON path")->required();
    run->add_option("--out", out_dir, "Output directory");

    auto* bench = app.add_subcommand("bench", "Run the traffic/mobility benchmark matrix");
    std::string bench_scene = "scenes/single_room/single_room.xml";
    std::vector<std::uint64_t> sta_counts{1, 2, 4, 8, 16};
    double bench_duration = 10.0;
    std::string bench_out = "out";
    bench->add_option("--scene", bench_scene, "Scene descriptor for the benchmark");
    bench->add_option("--sta-counts", sta_counts, "Station counts to sweep");
    bench->add_option("--duration", bench_duration, "Simulated seconds per run");
    bench->add_option("--out", bench_out, "Output directory");

    auto* server = app.add_subcommand("server", "Run the channel server");
    std::string listen = "127.0.0.1:5555";
    unsigned workers = 0;
    server->add_option("--listen", listen, "host:port to listen on");
    server->add_option("--workers", workers, "Worker pool width (default: hardware)");

    CLI11_PARSE(app, argc, argv);

    if (validate->parsed()) return cmd_validate(distances, frequency, endpoint);
    if (run->parsed()) return cmd_run(config_path, out_dir);
    if (bench->parsed()) return cmd_bench(bench_scene, sta_counts, bench_duration, bench_out);
    if (server->parsed()) return cmd_server(listen, workers);
    return kExitValidation;
}
