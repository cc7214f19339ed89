#pragma once

#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "risp/error.hpp"

namespace risp {

// Runs fn(i) for i in [0, n) on up to `threads` workers. Work is split into
// contiguous chunks; callers keep determinism by writing only to slot i, so
// the result layout never depends on the thread count. The first exception
// thrown by any worker is rethrown after all workers join.
template <typename Fn>
void parallel_for(int n, int threads, Fn&& fn) {
    if (n < 0) throw DomainError("parallel_for: negative count");
    if (threads < 1) throw DomainError("parallel_for: needs at least one thread");
    if (n == 0) return;
    const int workers = std::min(threads, n);
    if (workers == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }

    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const int chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const int begin = w * chunk;
        const int end = std::min(n, begin + chunk);
        pool.emplace_back([&, begin, end] {
            try {
                for (int i = begin; i < end; ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (std::thread& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace risp
