#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace crdsa {

/// Worker count for Monte-Carlo loops; 0 picks the hardware concurrency.
/// Results never depend on it.
struct Parallelism {
    unsigned workers = 0;

    unsigned resolved() const noexcept
    {
        if (workers != 0)
            return workers;
        return std::max(1u, std::thread::hardware_concurrency());
    }
};

/// Calls `body(worker, begin, end)` on contiguous index blocks covering
/// [0, count). Exceptions from workers are rethrown on the caller.
template <typename Body>
void parallel_blocks(std::size_t count, Parallelism parallelism, Body&& body)
{
    const auto workers = std::min<std::size_t>(parallelism.resolved(), std::max<std::size_t>(count, 1));
    if (workers <= 1) {
        body(std::size_t{0}, std::size_t{0}, count);
        return;
    }
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(workers);
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const auto begin = count * w / workers;
        const auto end = count * (w + 1) / workers;
        threads.emplace_back([&, w, begin, end] {
            try {
                body(w, begin, end);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : threads)
        t.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

}  // namespace crdsa
