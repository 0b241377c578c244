#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace augbagg {

namespace detail {
inline std::atomic<int>& thread_limit() {
    static std::atomic<int> limit{0}; // 0 = hardware_concurrency
    return limit;
}
inline thread_local bool inside_parallel_region = false;
} // namespace detail

// Global worker-count override (also used to prove results are independent of
// the parallelism degree).  0 restores the hardware default.
inline void set_thread_limit(int n) { detail::thread_limit().store(n < 0 ? 0 : n); }

inline int effective_threads() {
    const int limit = detail::thread_limit().load();
    if (limit > 0) return limit;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(i) for i in [0, count).  Each index must write only to its own
// output slot; the static block partition plus that discipline makes results
// identical for any worker count.  Nested calls degrade to serial execution.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
    const int workers = effective_threads();
    if (count == 0) return;
    if (workers <= 1 || count == 1 || detail::inside_parallel_region) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }

    const std::size_t used = std::min<std::size_t>(static_cast<std::size_t>(workers), count);
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};

    auto body = [&]() {
        detail::inside_parallel_region = true;
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count || failed.load()) break;
            try {
                fn(i);
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
                break;
            }
        }
        detail::inside_parallel_region = false;
    };

    std::vector<std::thread> pool;
    pool.reserve(used - 1);
    for (std::size_t t = 1; t < used; ++t) pool.emplace_back(body);
    body();
    for (auto& th : pool) th.join();
    if (failed.load() && error) std::rethrow_exception(error);
}

} // namespace augbagg
