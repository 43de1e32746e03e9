#pragma once
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>
#include <functional>

namespace fluoro {

// --threads flag > FLUORO_THREADS env > hardware concurrency
inline int resolve_threads(int cli_threads) {
    if (cli_threads > 0) return cli_threads;
    if (const char* env = std::getenv("FLUORO_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? int(hw) : 1;
}

// static stride partition; work item i always computes the same result no
// matter how many threads run, so outputs stay deterministic
inline void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([=, &fn] {
            for (int i = t; i < n; i += threads) fn(i);
        });
    for (auto& th : pool) th.join();
}

} // namespace fluoro
