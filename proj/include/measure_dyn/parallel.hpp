#ifndef MEASURE_DYN_PARALLEL_HPP
#define MEASURE_DYN_PARALLEL_HPP

#include <algorithm>
#include <cstdlib>
#include <cstddef>
#include <string>
#include <thread>
#include <vector>

namespace measure_dyn {

/// Worker count: MEASURE_DYN_THREADS caps parallelism, 0 or unset means auto.
inline unsigned max_threads() {
    static const unsigned cached = [] {
        unsigned hw = std::max(1u, std::thread::hardware_concurrency());
        if (const char* env = std::getenv("MEASURE_DYN_THREADS")) {
            char* end = nullptr;
            long v = std::strtol(env, &end, 10);
            if (end != env && v > 0) return std::min<unsigned>(hw, static_cast<unsigned>(v));
        }
        return hw;
    }();
    return cached;
}

/// Runs body(begin, end) over contiguous index chunks. The partition depends
/// only on n and the thread cap, and chunks never overlap, so results are
/// identical for any thread count as long as body writes disjoint outputs.
template <class Body>
void parallel_for(std::size_t n, Body&& body, std::size_t min_grain = 2048) {
    unsigned workers = max_threads();
    if (workers <= 1 || n <= min_grain) {
        body(std::size_t{0}, n);
        return;
    }
    std::size_t chunks = std::min<std::size_t>(workers, (n + min_grain - 1) / min_grain);
    std::size_t per = (n + chunks - 1) / chunks;
    std::vector<std::thread> pool;
    pool.reserve(chunks);
    for (std::size_t c = 0; c < chunks; ++c) {
        std::size_t lo = c * per;
        std::size_t hi = std::min(n, lo + per);
        if (lo >= hi) break;
        pool.emplace_back([&body, lo, hi] { body(lo, hi); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace measure_dyn

#endif
