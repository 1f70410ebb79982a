#ifndef DFIELD_PARALLEL_HPP
#define DFIELD_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace dfield {

inline int default_thread_count() {
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

/// Runs fn(begin, end) over a contiguous chunk per worker. Chunks are a
/// fixed function of (count, n_threads), and workers write disjoint output
/// slots, so results are independent of scheduling. Exceptions are
/// collected and the first one rethrown.
template <typename Fn>
void parallel_chunks(std::size_t count, int n_threads, Fn&& fn) {
    n_threads = std::max(1, n_threads);
    std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(n_threads), count);
    if (workers <= 1 || count < 64) {
        fn(std::size_t{0}, count);
        return;
    }

    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        std::size_t begin = w * chunk;
        std::size_t end = std::min(count, begin + chunk);
        if (begin >= end)
            break;
        pool.emplace_back([&, w, begin, end] {
            try {
                fn(begin, end);
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

} // namespace dfield

#endif
