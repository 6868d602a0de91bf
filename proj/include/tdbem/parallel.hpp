#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace tdbem {

inline int hardware_threads(int requested) {
    if (requested > 0) return requested;
    unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(hc) : 4;
}

/// Runs work(i) for i in [0, n) on a thread pool. Chunked dynamic scheduling;
/// callers keep determinism by writing to per-index slots only.
inline void parallel_chunks(std::size_t n, int n_threads,
                            const std::function<void(std::size_t)>& work) {
    if (n == 0) return;
    int nt = static_cast<int>(std::min<std::size_t>(hardware_threads(n_threads), n));
    if (nt <= 1) {
        for (std::size_t i = 0; i < n; ++i) work(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    constexpr std::size_t chunk = 32;
    std::vector<std::thread> threads;
    threads.reserve(nt);
    for (int t = 0; t < nt; ++t)
        threads.emplace_back([&] {
            while (true) {
                std::size_t begin = next.fetch_add(chunk);
                if (begin >= n) return;
                std::size_t end = std::min(begin + chunk, n);
                for (std::size_t i = begin; i < end; ++i) work(i);
            }
        });
    for (auto& t : threads) t.join();
}

}  // namespace tdbem
