#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace microloc {

/// Chunked parallel index loop. Each index is computed independently and
/// written to per-index storage by the caller, so results never depend on the
/// thread count. Exceptions are rethrown on the calling thread.
template <class F>
void parallel_for(std::size_t n, F&& fn, unsigned threads = 0) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<std::size_t>(threads, n ? n : 1);
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = t; i < n; i += threads) fn(i);
            } catch (...) {
                errs[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

} // namespace microloc
