#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace vrmimo {

inline int resolve_threads(int requested)
{
    if (requested > 0)
        return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(i) for i in [0, n) over contiguous chunks. Callers write results by index so the
// outcome does not depend on the worker count. The first exception (by chunk) is rethrown.
template <class Fn>
void parallel_for(std::int64_t n, int threads, Fn&& fn)
{
    if (n <= 0)
        return;
    const int workers = static_cast<int>(std::min<std::int64_t>(resolve_threads(threads), n));
    if (workers == 1) {
        for (std::int64_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        const std::int64_t lo = n * w / workers;
        const std::int64_t hi = n * (w + 1) / workers;
        pool.emplace_back([&, w, lo, hi] {
            try {
                for (std::int64_t i = lo; i < hi; ++i)
                    fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool)
        t.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

} // namespace vrmimo
