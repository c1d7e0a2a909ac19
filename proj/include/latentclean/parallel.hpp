#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace latentclean {

/// Worker-count cap shared by every parallel loop in the library.
/// 0 means "use hardware concurrency".
inline std::atomic<int>& thread_cap() {
    static std::atomic<int> cap{0};
    return cap;
}

inline void set_max_threads(int n) { thread_cap().store(n < 0 ? 0 : n); }

inline int max_threads() {
    int cap = thread_cap().load();
    unsigned hw = std::thread::hardware_concurrency();
    int n = hw == 0 ? 1 : static_cast<int>(hw);
    if (cap > 0 && cap < n) n = cap;
    return n;
}

/// Runs f(begin, end) over contiguous chunks of [begin, end).
///
/// Every index is owned by exactly one chunk and every output element must be
/// written by the chunk that owns it, so results are bitwise identical for any
/// worker count. Reductions must not be carried across chunk boundaries by f.
template <typename F>
void parallel_for(size_t begin, size_t end, F&& f, size_t min_grain = 1024) {
    if (end <= begin) return;
    size_t total = end - begin;
    int nthreads = max_threads();
    size_t max_chunks = (total + min_grain - 1) / min_grain;
    size_t chunks = std::min<size_t>(static_cast<size_t>(nthreads), std::max<size_t>(1, max_chunks));
    if (chunks <= 1) {
        f(begin, end);
        return;
    }
    size_t chunk_size = (total + chunks - 1) / chunks;
    std::vector<std::thread> workers;
    workers.reserve(chunks - 1);
    for (size_t c = 1; c < chunks; ++c) {
        size_t lo = begin + c * chunk_size;
        if (lo >= end) break;
        size_t hi = std::min(end, lo + chunk_size);
        workers.emplace_back([&f, lo, hi] { f(lo, hi); });
    }
    f(begin, std::min(end, begin + chunk_size));
    for (auto& w : workers) w.join();
}

} // namespace latentclean
