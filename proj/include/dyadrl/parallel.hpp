#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace dyadrl {

/// Worker cap: the smallest of the request, the DYADRL_JOBS environment
/// variable (if set), and hardware concurrency. 0 requests the default.
inline int effective_jobs(int requested = 0) {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw <= 0) hw = 1;
    int jobs = requested > 0 ? requested : hw;
    if (const char* env = std::getenv("DYADRL_JOBS")) {
        const int cap = std::atoi(env);
        if (cap > 0) jobs = std::min(jobs, cap);
    }
    return std::max(1, std::min(jobs, hw));
}

/// Run fn(i) for i in [0, n) on up to `jobs` threads. Work items must write
/// to disjoint slots; results are then independent of scheduling, which
/// keeps parallel runs bit-identical to serial ones.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
    jobs = effective_jobs(jobs);
    if (n == 0) return;
    if (jobs == 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n || failed.load()) return;
            try {
                fn(i);
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace dyadrl
