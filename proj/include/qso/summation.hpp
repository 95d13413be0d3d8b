#pragma once

#include <cstddef>
#include <span>

namespace qso {

/// Pairwise (tree) sum of f(i) for i in [begin, end). The split points depend
/// only on the range, so the rounding is reproducible; error grows like
/// log(n) ulp rather than n ulp.
template <typename F>
double pairwise_sum(std::size_t begin, std::size_t end, const F& f) {
    constexpr std::size_t kBlock = 16;
    if (end - begin <= kBlock) {
        double s = 0.0;
        for (std::size_t i = begin; i < end; ++i) s += f(i);
        return s;
    }
    const std::size_t mid = begin + (end - begin) / 2;
    return pairwise_sum(begin, mid, f) + pairwise_sum(mid, end, f);
}

inline double pairwise_sum(std::span<const double> values) {
    return pairwise_sum(0, values.size(), [&](std::size_t i) { return values[i]; });
}

}  // namespace qso
