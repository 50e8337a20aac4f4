// Deterministic data-parallel helper.
//
// Work is split into fixed-size chunks whose boundaries do not depend on
// the worker count; per-chunk results land in indexed slots and are reduced
// in chunk order by the caller. Same output for 1 or N threads.
#ifndef URABOUND_PARALLEL_HPP
#define URABOUND_PARALLEL_HPP

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace urabound {

inline unsigned default_thread_count() {
    if (const char* env = std::getenv("URABOUND_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

// Runs body(chunk_index, begin, end) over [0, total) split into chunks of
// chunk_size. Chunks are claimed dynamically but identified by index, so
// any per-chunk state the body writes is schedule-independent.
inline void parallel_chunks(std::size_t total, std::size_t chunk_size, unsigned threads,
                            const std::function<void(std::size_t, std::size_t, std::size_t)>& body) {
    if (total == 0) return;
    if (chunk_size == 0) chunk_size = 1;
    const std::size_t n_chunks = (total + chunk_size - 1) / chunk_size;
    if (threads == 0) threads = 1;
    if (threads == 1 || n_chunks == 1) {
        for (std::size_t c = 0; c < n_chunks; ++c)
            body(c, c * chunk_size, std::min(total, (c + 1) * chunk_size));
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t c = next.fetch_add(1);
            if (c >= n_chunks) return;
            body(c, c * chunk_size, std::min(total, (c + 1) * chunk_size));
        }
    };
    std::vector<std::thread> pool;
    const unsigned nw = static_cast<unsigned>(std::min<std::size_t>(threads, n_chunks));
    pool.reserve(nw);
    for (unsigned t = 0; t < nw; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

}  // namespace urabound

#endif
