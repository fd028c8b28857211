#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <thread>
#include <vector>

namespace heatlab {

// Worker count resolution: explicit request wins, otherwise the HEATLAB_WORKERS
// environment variable, otherwise hardware concurrency. The count only affects
// wall time: work is partitioned into fixed-size chunks keyed by item index,
// so every result is identical for any worker count.
inline int resolve_workers(int requested = 0) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("HEATLAB_WORKERS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0 && v <= 1024) return static_cast<int>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

inline constexpr std::int64_t kDefaultChunk = 4096;

// fn(chunk_index, begin, end) must write its result into a slot owned by
// chunk_index; the caller merges slots in index order afterwards.
template <class Fn>
void parallel_chunks(std::int64_t n_items, std::int64_t chunk_size, int workers, Fn&& fn) {
    if (n_items <= 0) return;
    if (chunk_size <= 0) chunk_size = kDefaultChunk;
    const std::int64_t n_chunks = (n_items + chunk_size - 1) / chunk_size;
    workers = resolve_workers(workers);
    if (workers > n_chunks) workers = static_cast<int>(n_chunks);

    if (workers <= 1) {
        for (std::int64_t c = 0; c < n_chunks; ++c) {
            const std::int64_t lo = c * chunk_size;
            const std::int64_t hi = std::min(lo + chunk_size, n_items);
            fn(c, lo, hi);
        }
        return;
    }

    std::atomic<std::int64_t> next{0};
    auto body = [&]() {
        for (;;) {
            const std::int64_t c = next.fetch_add(1, std::memory_order_relaxed);
            if (c >= n_chunks) return;
            const std::int64_t lo = c * chunk_size;
            const std::int64_t hi = std::min(lo + chunk_size, n_items);
            fn(c, lo, hi);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers) - 1);
    for (int w = 1; w < workers; ++w) pool.emplace_back(body);
    body();
    for (auto& t : pool) t.join();
}

inline std::int64_t chunk_count(std::int64_t n_items, std::int64_t chunk_size = kDefaultChunk) {
    return n_items <= 0 ? 0 : (n_items + chunk_size - 1) / chunk_size;
}

}  // namespace heatlab
