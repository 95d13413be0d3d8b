#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "qso/cf_engine.hpp"
#include "qso/distributions.hpp"

namespace qso {

/// (1/K) sum_k exp(i s x_k) on each grid point.
CFGrid empirical_cf(std::span<const double> values, std::span<const double> points,
                    unsigned threads = 1);

/// Sample mean and unbiased variance (pairwise summation). A single value
/// gives variance 0 with `degenerate` set.
MomentSummary summarize(std::span<const double> values);

struct KSResult {
    double statistic = 0.0;
    double critical_value_1pct = 0.0;
    std::size_t n_a = 0;
    std::size_t n_b = 0;

    bool rejects() const noexcept { return statistic > critical_value_1pct; }
};

/// Two-sample Kolmogorov-Smirnov: sup |ECDF_a - ECDF_b| over the pooled
/// points (ties handled exactly), with the asymptotic 1% critical value
/// 1.628 sqrt((n_a + n_b) / (n_a n_b)).
KSResult ks_two_sample(std::span<const double> a, std::span<const double> b);

enum class HistogramNorm { counts, density };

struct HistogramSpec {
    std::size_t bin_count = 50;
    /// [lo, hi); nullopt selects [min, max] of the data.
    std::optional<std::pair<double, double>> range;
    HistogramNorm normalization = HistogramNorm::counts;
};

struct Histogram {
    std::vector<double> edges;   // bin_count + 1 edges, bin i is [edges[i], edges[i+1])
    std::vector<double> values;  // counts, or count / (total * width)
    std::size_t underflow = 0;
    std::size_t overflow = 0;
    std::size_t total = 0;
};

Histogram histogram(std::span<const double> values, const HistogramSpec& spec);

}  // namespace qso
