#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace ipcn {

inline constexpr const char* kThreadsEnv = "IPCN_THREADS";

/// Thread count from IPCN_THREADS if set and positive, else hardware concurrency.
inline unsigned default_threads() {
    if (const char* env = std::getenv(kThreadsEnv)) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<unsigned>(v);
        } catch (const std::exception&) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

inline unsigned resolve_threads(unsigned requested) {
    return requested == 0 ? default_threads() : requested;
}

/// Runs body(chunk_begin, chunk_end, worker) over [begin, end) split into
/// contiguous chunks, one per worker. The first exception thrown by any
/// worker is rethrown on the calling thread.
template <class Body>
void parallel_chunks(std::size_t begin, std::size_t end, unsigned threads, Body&& body) {
    const std::size_t n = end > begin ? end - begin : 0;
    const std::size_t workers = std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(n, 1));
    if (workers <= 1) {
        body(begin, end, 0u);
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t lo = begin + n * w / workers;
            const std::size_t hi = begin + n * (w + 1) / workers;
            pool.emplace_back([&, lo, hi, w] {
                try {
                    body(lo, hi, static_cast<unsigned>(w));
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            });
        }
    }
    if (error) std::rethrow_exception(error);
}

template <class Body>
void parallel_for(std::size_t begin, std::size_t end, unsigned threads, Body&& body) {
    parallel_chunks(begin, end, threads, [&](std::size_t lo, std::size_t hi, unsigned) {
        for (std::size_t i = lo; i < hi; ++i) body(i);
    });
}

inline std::size_t worker_count(std::size_t n, unsigned threads) {
    return std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(n, 1));
}

}  // namespace ipcn
