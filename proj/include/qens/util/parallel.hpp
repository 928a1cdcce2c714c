#ifndef QENS_UTIL_PARALLEL_HPP
#define QENS_UTIL_PARALLEL_HPP

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace qens {

inline int default_thread_count() {
    if (const char* env = std::getenv("QENS_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

inline constexpr int kRealizationChunk = 64;

// Runs body(r) for r = 0..n-1. Threads own whole chunks of kRealizationChunk
// consecutive indices and run them in order, so any chunk-indexed accumulation
// is independent of scheduling.
template <class Body>
void parallel_for_realizations(int n, const Body& body, int n_threads = default_thread_count()) {
    const int n_chunks = (n + kRealizationChunk - 1) / kRealizationChunk;
    if (n_threads <= 1 || n_chunks <= 1) {
        for (int r = 0; r < n; ++r) body(r);
        return;
    }
    std::atomic<int> next_chunk{0};
    auto worker = [&]() {
        for (;;) {
            const int c = next_chunk.fetch_add(1);
            if (c >= n_chunks) return;
            const int lo = c * kRealizationChunk;
            const int hi = std::min(n, lo + kRealizationChunk);
            for (int r = lo; r < hi; ++r) body(r);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

// Per-chunk partial sums merged in chunk order: the reduced value is
// bit-identical no matter how chunks were scheduled across threads.
template <class T>
class ChunkedAccumulator {
  public:
    ChunkedAccumulator(int n_realizations, T zero)
        : zero_(zero), chunks_((n_realizations + kRealizationChunk - 1) / kRealizationChunk, zero) {}

    void add(int realization, const T& value) { chunks_[realization / kRealizationChunk] += value; }

    T reduce() const {
        T total = zero_;
        for (const auto& c : chunks_) total += c;
        return total;
    }

  private:
    T zero_;
    std::vector<T> chunks_;
};

}  // namespace qens

#endif
