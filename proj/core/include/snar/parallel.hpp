#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <type_traits>
#include <vector>

namespace snar {

/// Finalizer of the splitmix64 generator (a bijection on 64-bit words).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Seed of replication `rep` in study `study_id`:
///   x = mix64(master + G * (study_id + 1)),  seed = mix64(x ^ (H * (rep + 1)))
/// with G = 0x9E3779B97F4A7C15 and H = 0xD1B54A32D192ED03. For fixed (master, study_id)
/// distinct reps always give distinct seeds because both steps are bijective.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t study_id, std::uint64_t rep) noexcept {
    const std::uint64_t x = mix64(master + 0x9E3779B97F4A7C15ULL * (study_id + 1));
    return mix64(x ^ (0xD1B54A32D192ED03ULL * (rep + 1)));
}

/// 0 means one worker per hardware thread.
inline unsigned resolve_workers(unsigned requested) {
    if (requested > 0) return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Evaluates f(0..count-1) on a pool of worker threads. Result i always lands in
/// slot i, so the output is independent of the worker count and scheduling.
/// The first exception thrown by f is rethrown after all workers finish.
template <class F>
auto parallel_map(std::size_t count, unsigned workers, F&& f) -> std::vector<std::invoke_result_t<F&, std::size_t>> {
    using R = std::invoke_result_t<F&, std::size_t>;
    std::vector<R> out(count);
    const unsigned nthreads = static_cast<unsigned>(std::min<std::size_t>(resolve_workers(workers), count));
    if (nthreads <= 1) {
        for (std::size_t i = 0; i < count; ++i) out[i] = f(i);
        return out;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count || failed.load()) return;
            try {
                out[i] = f(i);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                failed.store(true);
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (error) std::rethrow_exception(error);
    return out;
}

}  // namespace snar
