#include "fermsig/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace fermsig {

namespace {

// Positive integer value of FERMSIG_THREADS, 0 if unset, -1 if malformed.
long env_workers() {
    const char* env = std::getenv("FERMSIG_THREADS");
    if (!env) return 0;
    char* end = nullptr;
    errno = 0;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || errno != 0 || v <= 0 || v > 4096) return -1;
    return v;
}

}  // namespace

unsigned worker_count() {
    const long v = env_workers();
    if (v > 0) return static_cast<unsigned>(v);
    return std::max(1u, std::thread::hardware_concurrency());
}

bool worker_env_valid() { return env_workers() >= 0; }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    const std::size_t workers = std::min<std::size_t>(worker_count(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto run = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(n);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace fermsig
