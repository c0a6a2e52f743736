#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace qbell {

// Worker cap: QBELL_THREADS when set, hardware concurrency otherwise.
inline int worker_count() {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (n <= 0) n = 1;
    if (const char* env = std::getenv("QBELL_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1) n = std::min(n, cap);
    }
    return n;
}

// Runs f(i) for i in [0, n). Tasks own disjoint output slots, so the merge
// is deterministic regardless of scheduling.
inline void parallel_for(int n, const std::function<void(int)>& f) {
    const int workers = std::min(worker_count(), std::max(1, n));
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (int i = w; i < n; i += workers) f(i);
        });
    }
    for (std::thread& t : pool) t.join();
}

} // namespace qbell
