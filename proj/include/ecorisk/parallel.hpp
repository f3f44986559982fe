#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace ecorisk {

// Static block partition of [0, n) over `threads` workers. Callers must write
// results into index-addressed slots; combined with per-index RNG streams this
// keeps every result independent of the thread count.
inline void parallel_for(std::size_t n, int threads,
                         const std::function<void(std::size_t, std::size_t)>& block) {
    if (n == 0) return;
    const std::size_t nt = std::max<std::size_t>(1, std::min<std::size_t>(threads, n));
    if (nt == 1) {
        block(0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (std::size_t t = 0; t < nt; ++t) {
        const std::size_t lo = n * t / nt;
        const std::size_t hi = n * (t + 1) / nt;
        pool.emplace_back([&block, lo, hi] { block(lo, hi); });
    }
    for (auto& th : pool) th.join();
}

// Order-insensitive pairwise sum; identical result for any thread count when
// the inputs are stored by index.
inline double pairwise_sum(const double* data, std::size_t n) {
    if (n == 0) return 0.0;
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += data[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

inline double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

}  // namespace ecorisk
