#pragma once

// Deterministic data-parallel reduction. Work is split into fixed chunks,
// each chunk produces a partial result, and partials are combined in chunk
// index order, so the output does not depend on the worker count or on
// thread scheduling.

#include <atomic>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace lab {

inline int default_workers() {
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

// fn(chunk_index) -> T, evaluated once per chunk; results returned in order.
template <class T, class Fn>
std::vector<T> parallel_map_chunks(int64_t nchunks, int workers, Fn fn) {
    std::vector<T> out(static_cast<size_t>(nchunks));
    if (nchunks == 0) return out;
    if (workers < 1) workers = 1;
    if (workers == 1 || nchunks == 1) {
        for (int64_t c = 0; c < nchunks; ++c) out[static_cast<size_t>(c)] = fn(c);
        return out;
    }
    std::atomic<int64_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const int64_t c = next.fetch_add(1);
            if (c >= nchunks) return;
            out[static_cast<size_t>(c)] = fn(c);
        }
    };
    std::vector<std::thread> pool;
    const int nthreads = static_cast<int>(std::min<int64_t>(workers, nchunks));
    pool.reserve(static_cast<size_t>(nthreads));
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    return out;
}

}  // namespace lab
