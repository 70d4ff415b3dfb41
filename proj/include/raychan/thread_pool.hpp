// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

namespace raychan {

/// Persistent worker pool with a single blocking parallel_for. The caller
/// participates in the work, so a pool of width 1 runs everything inline.
/// Not reentrant: parallel_for must not be called from inside a task.
class ThreadPool {
public:
    explicit ThreadPool(unsigned workers) {
        if (workers == 0) workers = 1;
        width_ = workers;
        for (unsigned i = 0; i + 1 < workers; ++i)
            threads_.emplace_back([this] { worker_loop(); });
    }

    ~ThreadPool() {
        {
            std::lock_guard<std::mutex> lock(mutex_);
            stop_ = true;
            cv_.notify_all();
        }
        for (std::thread& t : threads_) t.join();
    }

    unsigned width() const { return width_; }

    void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
        if (n == 0) return;
        if (threads_.empty() || n == 1) {
            for (std::size_t i = 0; i < n; ++i) fn(i);
            return;
        }
        auto job = std::make_shared<Job>();
        job->fn = &fn;
        job->n = n;
        {
            std::lock_guard<std::mutex> lock(mutex_);
            job_ = job;
            ++generation_;
            cv_.notify_all();
        }
        run(*job);
        {
            std::unique_lock<std::mutex> lock(mutex_);
            done_cv_.wait(lock, [&] { return job->done.load() == job->n; });
            job_.reset();
        }
        if (job->error) std::rethrow_exception(job->error);
    }

    /// Process-wide pool; size it with set_global_width before first use.
    static ThreadPool& global() {
        static ThreadPool pool(global_width());
        return pool;
    }

    static void set_global_width(unsigned n) { global_width() = n == 0 ? 1 : n; }

private:
    struct Job {
        const std::function<void(std::size_t)>* fn = nullptr;
        std::size_t n = 0;
        std::atomic<std::size_t> next{0};
        std::atomic<std::size_t> done{0};
        std::exception_ptr error;  // first failure, rethrown by the caller
        std::mutex error_mutex;
    };

    static unsigned& global_width() {
        static unsigned width = std::max(1u, std::thread::hardware_concurrency());
        return width;
    }

    void run(Job& job) {
        for (;;) {
            const std::size_t i = job.next.fetch_add(1);
            if (i >= job.n) return;
            try {
                (*job.fn)(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(job.error_mutex);
                if (!job.error) job.error = std::current_exception();
            }
            if (job.done.fetch_add(1) + 1 == job.n) {
                std::lock_guard<std::mutex> lock(mutex_);
                done_cv_.notify_all();
            }
        }
    }

    void worker_loop() {
        std::uint64_t seen = 0;
        for (;;) {
            std::shared_ptr<Job> job;
            {
                std::unique_lock<std::mutex> lock(mutex_);
                cv_.wait(lock, [&] { return stop_ || generation_ != seen; });
                if (stop_) return;
                seen = generation_;
                job = job_;
            }
            if (job) run(*job);
        }
    }

    std::vector<std::thread> threads_;
    std::mutex mutex_;
    std::condition_variable cv_;
    std::condition_variable done_cv_;
    std::shared_ptr<Job> job_;
    std::uint64_t generation_ = 0;
    bool stop_ = false;
    unsigned width_ = 1;
};

}  // namespace raychan
