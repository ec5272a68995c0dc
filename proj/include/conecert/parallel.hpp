#ifndef CONECERT_PARALLEL_HPP
#define CONECERT_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace conecert {

// Worker-count cap: min(hardware, CONE_CERTIFY_THREADS if set).
inline unsigned thread_cap() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("CONE_CERTIFY_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) hw = std::min<unsigned>(hw, static_cast<unsigned>(v));
    }
    return hw;
}

// Runs body(i) for i in [0,n). Work is split into fixed-size chunks that do
// not depend on the worker count, so per-index results are identical no
// matter how many threads execute them.
template <typename Body>
void parallel_for(std::size_t n, const Body& body, std::size_t chunk = 0) {
    if (n == 0) return;
    const unsigned workers = std::min<std::size_t>(thread_cap(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    if (chunk == 0) chunk = std::max<std::size_t>(1, n / (4 * workers));
    const std::size_t nchunks = (n + chunk - 1) / chunk;
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto run = [&] {
        for (;;) {
            const std::size_t c = next.fetch_add(1);
            if (c >= nchunks) return;
            const std::size_t lo = c * chunk;
            const std::size_t hi = std::min(n, lo + chunk);
            try {
                for (std::size_t i = lo; i < hi; ++i) body(i);
            } catch (...) {
                std::lock_guard<std::mutex> g(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

// Deterministic reduction: partials are produced per fixed chunk and merged
// in chunk order, independent of scheduling.
template <typename T, typename Map, typename Combine>
T parallel_reduce(std::size_t n, T init, const Map& map, const Combine& combine,
                  std::size_t chunk = 1024) {
    if (n == 0) return init;
    const std::size_t nchunks = (n + chunk - 1) / chunk;
    std::vector<T> partial(nchunks, init);
    parallel_for(nchunks, [&](std::size_t c) {
        const std::size_t lo = c * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        T acc = init;
        for (std::size_t i = lo; i < hi; ++i) acc = combine(acc, map(i));
        partial[c] = acc;
    }, 1);
    T out = init;
    for (const T& p : partial) out = combine(out, p);
    return out;
}

} // namespace conecert

#endif
