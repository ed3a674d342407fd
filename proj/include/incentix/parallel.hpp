#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace incentix {

/// Worker count: INCENTIX_THREADS if set to a positive integer, else the
/// hardware concurrency.
inline unsigned thread_count() {
    if (const char* env = std::getenv("INCENTIX_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return static_cast<unsigned>(n);
        } catch (const std::exception&) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Replicate block size. Fixed so that the partition of replicates, and
/// hence every floating-point sum, does not depend on the worker count.
inline constexpr std::size_t kReplicateBlock = 256;

/// Runs run_block(begin, end) over fixed-size blocks of [0, n) on up to
/// thread_count() workers and folds the block results in block order.
template <class Acc, class BlockFn, class MergeFn>
Acc reduce_replicates(std::size_t n, Acc init, BlockFn run_block, MergeFn merge,
                      unsigned workers = thread_count()) {
    const std::size_t blocks = (n + kReplicateBlock - 1) / kReplicateBlock;
    std::vector<std::optional<Acc>> partial(blocks);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        for (;;) {
            const std::size_t b = next.fetch_add(1);
            if (b >= blocks) return;
            try {
                const std::size_t begin = b * kReplicateBlock;
                partial[b].emplace(run_block(begin, std::min(n, begin + kReplicateBlock)));
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = blocks;
            }
        }
    };

    const unsigned used = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(blocks, 1)));
    if (used <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned i = 0; i < used; ++i) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
    for (auto& p : partial) merge(init, std::move(*p));
    return init;
}

}  // namespace incentix
