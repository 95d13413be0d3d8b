#include "qso/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace qso {

QuadratureResult wynn_epsilon(std::span<const double> partial_sums) {
    const std::size_t n = partial_sums.size();
    if (n == 0) return {};
    if (n < 3) return {partial_sums.back(), std::abs(partial_sums.back() - partial_sums.front())};

    // eps[k] holds column k of the epsilon table restricted to the newest
    // entries; only even columns are estimates.
    std::vector<double> prev(n + 1, 0.0);  // column k-1
    std::vector<double> cur(partial_sums.begin(), partial_sums.end());  // column k
    double best = cur.back();
    double best_prev = cur[n - 2];
    for (std::size_t col = 1; cur.size() > 1; ++col) {
        std::vector<double> next(cur.size() - 1);
        bool broke = false;
        for (std::size_t i = 0; i + 1 < cur.size(); ++i) {
            const double diff = cur[i + 1] - cur[i];
            if (diff == 0.0 || !std::isfinite(diff)) {
                broke = true;
                break;
            }
            next[i] = prev[i + 1] + 1.0 / diff;
        }
        if (broke) break;
        prev = std::move(cur);
        cur = std::move(next);
        if (col % 2 == 0 && cur.size() >= 2) {
            best = cur.back();
            best_prev = cur[cur.size() - 2];
        }
    }
    return {best, std::abs(best - best_prev)};
}

namespace {

double integrate_piece(const std::function<double(double)>& g, double omega, double a,
                       double b) {
    using boost::math::quadrature::gauss_kronrod;
    auto f = [&](double x) { return g(x) * std::sin(omega * x); };
    // Pieces spanning several decades are split geometrically so the
    // adaptive rule never has to resolve structure near the left end of a
    // huge interval.
    double total = 0.0;
    double lo = a;
    if (lo <= 0.0) {
        const double hi = std::min(b, 1.0);
        total += gauss_kronrod<double, 31>::integrate(f, 0.0, hi, 12, 1e-13);
        lo = hi;
    }
    while (lo < b) {
        const double hi = std::min(b, lo * 8.0);
        total += gauss_kronrod<double, 31>::integrate(f, lo, hi, 12, 1e-13);
        lo = hi;
    }
    return total;
}

}  // namespace

QuadratureResult sine_transform(const std::function<double(double)>& g, double omega,
                                double rel_tol) {
    const double half_period = std::numbers::pi / omega;
    constexpr int kMaxPieces = 400;
    constexpr int kMinPieces = 8;

    std::vector<double> partial;
    partial.reserve(kMaxPieces);
    double sum = 0.0;
    QuadratureResult last{};
    int stable_steps = 0;
    for (int k = 0; k < kMaxPieces; ++k) {
        const double a = k * half_period;
        const double term = integrate_piece(g, omega, a, a + half_period);
        sum += term;
        partial.push_back(sum);
        if (k + 1 < kMinPieces) continue;

        const double scale = std::max(std::abs(sum), std::numeric_limits<double>::min());
        // Rapidly decaying integrands converge without acceleration.
        if (std::abs(term) <= rel_tol * scale * 1e-2) return {sum, std::abs(term)};

        // Wynn on a sliding window keeps the table small.
        const std::size_t window = std::min<std::size_t>(partial.size(), 24);
        const auto est = wynn_epsilon(std::span(partial).last(window));
        const double change = std::abs(est.value - last.value);
        last = {est.value, std::max(est.error, change)};
        if (last.error <= rel_tol * std::max(std::abs(est.value), 1e-300)) {
            if (++stable_steps >= 2) return last;
        } else {
            stable_steps = 0;
        }
    }
    return last;
}

}  // namespace qso
