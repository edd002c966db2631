#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace hlem {

/// Raised for every user-facing failure (bad input, bad config, violated
/// preconditions). Messages are meant to be printed as-is.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using EventIndex = std::uint32_t;
using CaseIndex = std::uint32_t;
using NameIndex = std::uint32_t;
using WindowIndex = std::int64_t;

inline constexpr EventIndex kNoEvent = static_cast<EventIndex>(-1);

/// Number of worker threads to use; 0 means "all available cores".
inline unsigned resolve_parallelism(unsigned requested) {
    if (requested != 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Work is split in
/// contiguous blocks, so callers that write to slot i get results that do not
/// depend on the thread count.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    threads = resolve_parallelism(threads);
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    if (threads > n) threads = static_cast<unsigned>(n);
    std::vector<std::thread> pool;
    pool.reserve(threads);
    std::size_t block = (n + threads - 1) / threads;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (unsigned t = 0; t < threads; ++t) {
        std::size_t lo = t * block;
        std::size_t hi = std::min(n, lo + block);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn, &failure, &failure_mutex] {
            try {
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

/// |a ∩ b| / |a ∪ b| for sorted, duplicate-free ranges; 0 when both are empty.
template <class T>
double jaccard(const std::vector<T>& a, const std::vector<T>& b) {
    std::size_t i = 0, j = 0, inter = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) {
            ++i;
        } else if (b[j] < a[i]) {
            ++j;
        } else {
            ++inter;
            ++i;
            ++j;
        }
    }
    std::size_t uni = a.size() + b.size() - inter;
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace hlem
