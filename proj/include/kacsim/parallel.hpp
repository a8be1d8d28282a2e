#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace kacsim {

inline unsigned worker_count() {
    if (const char* env = std::getenv("KACSIM_THREADS")) {
        const long n = std::strtol(env, nullptr, 10);
        if (n >= 1) return static_cast<unsigned>(n);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

// Sum of fn(begin,end) over a fixed partition of [0,n) into `chunks` ranges.
// Chunk partials are accumulated in index order, so the result is bit-stable
// no matter how many worker threads run (the reduction tree is fixed by the
// chunk count, not the thread count).
inline double parallel_sum(std::size_t n,
                           const std::function<double(std::size_t, std::size_t)>& fn,
                           std::size_t chunks = 256) {
    if (n == 0) return 0.0;
    if (chunks > n) chunks = n;
    std::vector<double> partial(chunks, 0.0);

    const unsigned workers = std::min<std::size_t>(worker_count(), chunks);
    if (workers <= 1) {
        for (std::size_t c = 0; c < chunks; ++c) {
            const std::size_t lo = n * c / chunks;
            const std::size_t hi = n * (c + 1) / chunks;
            partial[c] = fn(lo, hi);
        }
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w]() {
                for (std::size_t c = w; c < chunks; c += workers) {
                    const std::size_t lo = n * c / chunks;
                    const std::size_t hi = n * (c + 1) / chunks;
                    partial[c] = fn(lo, hi);
                }
            });
        }
        for (auto& t : pool) t.join();
    }

    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

}  // namespace kacsim
