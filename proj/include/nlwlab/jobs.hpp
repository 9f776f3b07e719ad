#pragma once
// Bounded worker pool for independent jobs. Results are stored by job index, so the output
// does not depend on the thread budget or on scheduling order.

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace nlw {

template <class R, class Fn>
std::vector<R> run_jobs(std::size_t count, int threads, Fn&& fn) {
    std::vector<R> out(count);
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                out[i] = fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                next = count;
            }
        }
    };
    const int n = std::max(1, std::min<int>(threads, static_cast<int>(count)));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int k = 0; k < n; ++k) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);
    return out;
}

}  // namespace nlw
