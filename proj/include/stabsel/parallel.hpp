#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace stabsel {

/// Runs body(i) for i in [0, count) on up to `threads` workers. Each index is
/// visited exactly once; callers write into per-index slots and reduce in index
/// order afterwards, so results do not depend on the worker count. If any body
/// throws, the exception from the lowest failing index is rethrown.
template <class Body>
void parallel_for(std::size_t count, std::size_t threads, Body&& body) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, count);
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(count);
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                body(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    pool.clear();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace stabsel
