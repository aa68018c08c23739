#include "natural/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace natural {

int thread_count() {
    if (const char* env = std::getenv("NATURAL_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(int count, const std::function<void(int, int)>& body, int threads) {
    if (count <= 0) return;
    if (threads <= 0) threads = thread_count();
    threads = std::min(threads, count);
    if (threads == 1) {
        body(0, count);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex guard;
    const int chunk = (count + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const int begin = t * chunk;
        const int end = std::min(count, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&, begin, end] {
            try {
                body(begin, end);
            } catch (...) {
                std::lock_guard lock(guard);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace natural
