#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

namespace supersim {

// Runs fn(0) .. fn(n-1) on a pool of workers. Each index must write only its
// own result slot; callers reduce the slots in index order afterwards, so
// results never depend on the worker count or scheduling.
template <class Fn>
void parallel_replicates(std::int64_t n, int workers, Fn&& fn) {
    if (n <= 0) return;
    if (workers < 2 || n == 1) {
        for (std::int64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    auto thread_count = static_cast<std::size_t>(
        std::min<std::int64_t>(workers, n));
    std::atomic<std::int64_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    std::vector<std::thread> pool;
    pool.reserve(thread_count);
    for (std::size_t w = 0; w < thread_count; ++w) {
        pool.emplace_back([&]() {
            while (true) {
                std::int64_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    next.store(n); // drain remaining work
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace supersim
