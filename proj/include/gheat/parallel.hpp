#pragma once

#include <atomic>
#include <thread>
#include <vector>

namespace gheat::parallel {

inline std::atomic<int>& thread_count_storage() {
    static std::atomic<int> n{0};  // 0 = hardware default
    return n;
}

inline void set_thread_count(int n) { thread_count_storage() = n; }

inline int thread_count() {
    const int n = thread_count_storage();
    if (n > 0) return n;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

// Runs f(i) for i in [0,n). Results must be written to per-index slots so
// reductions can happen afterwards in fixed index order; the outcome is then
// independent of the thread count.
template <class F>
void for_range(int n, F&& f) {
    const int threads = std::min(thread_count(), n > 0 ? n : 1);
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&]() {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) f(i);
        });
    for (auto& th : pool) th.join();
}

}  // namespace gheat::parallel
