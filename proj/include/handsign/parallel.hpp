#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace handsign {

/// Runs fn(i) for every i in [0, n). With more than one worker, indices are
/// dealt round-robin to threads; callers that reduce results must do so by
/// index afterwards so the reduction order never depends on scheduling.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn)
{
    const auto threads = static_cast<std::size_t>(std::max(1, workers));
    if (threads == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::vector<std::exception_ptr> errors(threads);
    {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                try {
                    for (std::size_t i = t; i < n; i += threads) {
                        fn(i);
                    }
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
        }
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

/// Splits [0, n) into at most `parts` contiguous ranges of near-equal size.
inline std::vector<std::pair<std::size_t, std::size_t>> split_ranges(std::size_t n, int parts)
{
    const auto p = std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(std::max(1, parts)), n));
    std::vector<std::pair<std::size_t, std::size_t>> out;
    out.reserve(p);
    for (std::size_t i = 0; i < p; ++i) {
        out.emplace_back(n * i / p, n * (i + 1) / p);
    }
    return out;
}

}  // namespace handsign
