#include "gevcast/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

#include "gevcast/random.hpp"

namespace gevcast {

namespace {

std::atomic<unsigned> g_max_threads{0};
thread_local bool t_inside_parallel = false;

}  // namespace

void set_max_threads(unsigned threads) { g_max_threads.store(threads); }

unsigned max_threads() {
    const unsigned configured = g_max_threads.load();
    if (configured > 0) return configured;
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    if (n == 0) return;
    const std::size_t workers = std::min<std::size_t>(max_threads(), n);
    std::vector<std::exception_ptr> errors(n);

    if (workers <= 1 || t_inside_parallel) {
        for (std::size_t i = 0; i < n; ++i) {
            try {
                body(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        auto run = [&] {
            t_inside_parallel = true;
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                try {
                    body(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
            t_inside_parallel = false;
        };
        std::vector<std::jthread> pool;
        pool.reserve(workers - 1);
        for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
        run();
    }

    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace gevcast
