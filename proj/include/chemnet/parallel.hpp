#pragma once

/**
 * @file parallel.hpp
 * @brief Bounded worker pool for embarrassingly parallel grids.
 *
 * Work items are claimed through an atomic counter and written to
 * caller-owned slots indexed by item, so results are assembled in grid order
 * no matter how many workers run.
 */

#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace chemnet {

template <class Fn>
inline void parallel_for(std::size_t count, unsigned jobs, Fn&& fn) {
    if (jobs <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const unsigned workers = static_cast<unsigned>(
        std::min<std::size_t>(jobs, count));
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                    fn(i);
                }
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (const auto& err : errors) {
        if (err) std::rethrow_exception(err);
    }
}

}  // namespace chemnet
