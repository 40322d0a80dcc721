#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace sbdag {

// process-wide default worker cap, set by the CLI --threads flag
inline std::atomic<int>& detail_thread_count() {
    static std::atomic<int> t{1};
    return t;
}
inline int global_threads() { return detail_thread_count().load(); }
inline void set_global_threads(int n) { detail_thread_count().store(std::max(1, n)); }

// Static chunking of [0, total) into at most `threads` contiguous ranges.
// fn(chunk_index, lo, hi) runs once per chunk; results must go into
// chunk-indexed slots so reductions stay deterministic.
template <typename Fn>
void parallel_for_chunks(std::uint64_t total, int threads, Fn&& fn) {
    if (total == 0) return;
    const std::uint64_t nchunk =
        std::min<std::uint64_t>(static_cast<std::uint64_t>(std::max(threads, 1)), total);
    if (nchunk <= 1) {
        fn(0, std::uint64_t{0}, total);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nchunk));
    const std::uint64_t step = (total + nchunk - 1) / nchunk;
    for (std::uint64_t c = 0; c < nchunk; ++c) {
        const std::uint64_t lo = c * step;
        const std::uint64_t hi = std::min(total, lo + step);
        if (lo >= hi) break;
        pool.emplace_back([&fn, c, lo, hi] { fn(static_cast<int>(c), lo, hi); });
    }
    for (auto& t : pool) t.join();
}

// convenience: one item per index, deterministic slot writes
template <typename Fn>
void parallel_for_index(std::uint64_t total, int threads, Fn&& fn) {
    parallel_for_chunks(total, threads, [&fn](int, std::uint64_t lo, std::uint64_t hi) {
        for (std::uint64_t i = lo; i < hi; ++i) fn(i);
    });
}

}  // namespace sbdag
