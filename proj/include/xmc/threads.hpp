#pragma once

#include <cstdlib>
#include <thread>
#include <vector>

namespace xmc {

// --threads flag wins; ELIAS_THREADS env var is the fallback; 0 = hardware
inline unsigned resolve_threads(unsigned requested) {
    if (requested == 0) {
        if (const char* env = std::getenv("ELIAS_THREADS")) {
            long v = std::strtol(env, nullptr, 10);
            if (v > 0) return static_cast<unsigned>(v);
        }
        unsigned hw = std::thread::hardware_concurrency();
        return hw ? hw : 1;
    }
    return requested;
}

// Static chunking; results must be written to disjoint slots so the output
// is independent of the thread count.
template <typename Fn>
void parallel_for(size_t n, unsigned threads, Fn&& fn) {
    threads = resolve_threads(threads);
    if (threads <= 1 || n < 2) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    size_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        size_t begin = t * chunk, end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&fn, begin, end] {
            for (size_t i = begin; i < end; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace xmc
