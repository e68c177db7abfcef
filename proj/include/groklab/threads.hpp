#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace groklab {

// Runs body(i) for i in [0, n) on up to n_threads workers. Results must be
// written to pre-sized slots indexed by i so aggregation order never
// depends on scheduling.
inline void parallel_for(long n, const std::function<void(long)>& body, int n_threads = 0) {
    if (n <= 0) return;
    unsigned hw = std::thread::hardware_concurrency();
    long workers = n_threads > 0 ? n_threads : (hw ? hw : 4);
    workers = std::min<long>(workers, n);
    if (workers <= 1) {
        for (long i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<long> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (long w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (long i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace groklab
