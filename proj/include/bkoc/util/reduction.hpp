#pragma once

#include <cstddef>
#include <span>

namespace bkoc::util {

/// Deterministic blocked pairwise sum. The reduction tree depends only on the
/// length, never on thread count or scheduling, so results are reproducible.
/// fn(i) produces the i-th term.
template <typename Fn>
double pairwise_sum(std::size_t n, Fn&& fn, std::size_t base_offset = 0) {
    constexpr std::size_t kLeaf = 512;
    if (n <= kLeaf) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += fn(base_offset + i);
        return acc;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(half, fn, base_offset) + pairwise_sum(n - half, fn, base_offset + half);
}

inline double pairwise_sum(std::span<const double> values) {
    return pairwise_sum(values.size(), [&](std::size_t i) { return values[i]; });
}

}  // namespace bkoc::util
