#include "qso/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "qso/errors.hpp"
#include "qso/parallel.hpp"
#include "qso/summation.hpp"

namespace qso {

CFGrid empirical_cf(std::span<const double> values, std::span<const double> points, unsigned threads) {
    if (values.empty()) throw InvalidInput("empirical_cf needs at least one value");
    CFGrid g;
    g.points.assign(points.begin(), points.end());
    g.values.resize(points.size());
    g.flags.assign(points.size(), kCfClean);
    const auto n = static_cast<double>(values.size());
    parallel_for(points.size(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const double s = points[i];
            const double re = pairwise_sum(0, values.size(), [&](std::size_t k) { return std::cos(s * values[k]); });
            const double im = pairwise_sum(0, values.size(), [&](std::size_t k) { return std::sin(s * values[k]); });
            g.values[i] = {re / n, im / n};
        }
    });
    return g;
}

MomentSummary summarize(std::span<const double> values) {
    if (values.empty()) throw InvalidInput("summarize needs at least one value");
    MomentSummary m;
    m.count = values.size();
    m.max_moment_order = std::numeric_limits<double>::infinity();
    m.mean = pairwise_sum(values) / static_cast<double>(values.size());
    if (values.size() == 1) {
        m.degenerate = true;
        return m;
    }
    const double ss = pairwise_sum(0, values.size(), [&](std::size_t i) {
        const double c = values[i] - m.mean;
        return c * c;
    });
    m.variance = ss / static_cast<double>(values.size() - 1);
    return m;
}

KSResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw InvalidInput("ks_two_sample needs two nonempty samples");
    std::vector<double> x(a.begin(), a.end());
    std::vector<double> y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double na = static_cast<double>(x.size());
    const double nb = static_cast<double>(y.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double t = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == t) ++i;
        while (j < y.size() && y[j] == t) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    KSResult r;
    r.statistic = d;
    r.n_a = x.size();
    r.n_b = y.size();
    r.critical_value_1pct = 1.628 * std::sqrt((na + nb) / (na * nb));
    return r;
}

Histogram histogram(std::span<const double> values, const HistogramSpec& spec) {
    if (spec.bin_count == 0) throw InvalidSpec("histogram needs at least one bin");
    if (values.empty()) throw InvalidInput("histogram needs at least one value");
    for (double v : values)
        if (std::isnan(v)) throw InvalidInput("histogram input contains NaN");

    double lo;
    double hi;
    if (spec.range) {
        std::tie(lo, hi) = *spec.range;
        if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
            throw InvalidSpec("histogram range needs finite lo < hi");
    } else {
        const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
        lo = *mn;
        hi = std::nextafter(*mx, std::numeric_limits<double>::infinity());
        if (lo == *mx) {
            lo -= 0.5;
            hi = *mx + 0.5;
        }
    }

    const std::size_t bins = spec.bin_count;
    Histogram h;
    h.edges.resize(bins + 1);
    for (std::size_t k = 0; k <= bins; ++k)
        h.edges[k] = k == bins ? hi : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(bins);
    std::vector<std::size_t> counts(bins, 0);
    for (double v : values) {
        if (v < lo) {
            ++h.underflow;
            continue;
        }
        if (v >= hi) {
            ++h.overflow;
            continue;
        }
        auto k = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(bins));
        k = std::min(k, bins - 1);
        // Agree with the stored edges when the division rounds across one.
        if (v < h.edges[k]) --k;
        else if (k + 1 < bins && v >= h.edges[k + 1]) ++k;
        ++counts[k];
    }
    h.total = values.size();
    h.values.resize(bins);
    for (std::size_t k = 0; k < bins; ++k) {
        h.values[k] = static_cast<double>(counts[k]);
        if (spec.normalization == HistogramNorm::density)
            h.values[k] /= static_cast<double>(h.total) * (h.edges[k + 1] - h.edges[k]);
    }
    return h;
}

}  // namespace qso
