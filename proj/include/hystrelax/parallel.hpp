#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace hystrelax {

/// Worker cap: HYSTRELAX_THREADS when set (clamped to >= 1), otherwise the
/// hardware concurrency, at most 16.
inline int worker_cap() {
    if (const char* env = std::getenv("HYSTRELAX_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
        return 1;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return static_cast<int>(std::min(hw == 0 ? 1u : hw, 16u));
}

/// Runs fn(i) for i in [0, count) on up to worker_cap() threads. Results
/// must be written to disjoint slots so the outcome is order-independent.
template <typename Fn>
void parallel_for(int count, Fn&& fn) {
    const int threads = std::min(worker_cap(), count);
    if (threads <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    std::atomic<int> next{0};
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace hystrelax
