// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "raychan/channel_server.hpp"
#include "raychan/net.hpp"
#include "raychan/thread_pool.hpp"

int main(int argc, char** argv) {
    CLI::App app{"raychan-server: ray-traced channel computation service"};
    std::string listen = "127.0.0.1:5555";
    unsigned workers = 0;
    app.add_option("--listen", listen, "host:port to listen on");
    app.add_option("--workers", workers, "Worker pool width (default: hardware)");
    CLI11_PARSE(app, argc, argv);

    try {
        if (workers > 0) raychan::ThreadPool::set_global_width(workers);
        auto [host, port] = raychan::parse_endpoint(listen);
        raychan::TcpListener listener = raychan::TcpListener::bind(host, port);
        std::printf("raychan-server listening on %s:%u (%u workers)\n", host.c_str(),
                    listener.port(), raychan::ThreadPool::global().width());
        std::fflush(stdout);
        raychan::ChannelServer server({.log_requests = true});
        server.serve(listener);
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "raychan-server: %s\n", e.what());
        return 2;
    }
}
