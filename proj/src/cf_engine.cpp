#include "qso/cf_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qso/errors.hpp"
#include "qso/parallel.hpp"

namespace qso {

namespace {

constexpr double kPi = std::numbers::pi;
const double kLogTiny = std::log(1e-300);

bool branch_exceeded(std::complex<double> log_factor) {
    return std::abs(std::remainder(log_factor.imag(), 2.0 * kPi)) > kPi / 2.0;
}

void finish_point(CFGrid& grid, std::size_t i, std::complex<double> total) {
    if (!(total.real() >= kLogTiny)) {
        grid.values[i] = {0.0, 0.0};
        grid.flags[i] |= kCfZero;
        return;
    }
    const double phase = std::remainder(total.imag(), 2.0 * kPi);
    grid.values[i] = std::polar(std::exp(total.real()), phase);
}

CFGrid empty_grid(std::span<const double> points) {
    CFGrid g;
    g.points.assign(points.begin(), points.end());
    g.values.assign(points.size(), {1.0, 0.0});
    g.flags.assign(points.size(), kCfClean);
    return g;
}

void require_finite(std::span<const double> points) {
    for (double s : points)
        if (!std::isfinite(s)) throw InvalidInput("CF grid contains a non-finite point");
}

// Index pairs (i of s, h of s/2) for the even-index points of a symmetric
// arithmetic grid.
std::vector<std::pair<std::size_t, std::size_t>> dyadic_pairs(const CFGrid& grid) {
    const auto& pts = grid.points;
    if (grid.values.size() != pts.size()) throw InvalidInput("CF grid: values and points differ in length");
    if (pts.size() % 2 == 0 || pts.size() < 5)
        throw InvalidInput("residual needs a symmetric grid {k*delta : |k| <= K} with K >= 2");
    const std::size_t K = pts.size() / 2;
    const double delta = pts[K + 1] - pts[K];
    if (pts[K] != 0.0 || !(delta > 0.0)) throw InvalidInput("residual grid must be centred at 0 with positive spacing");
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double k = static_cast<double>(i) - static_cast<double>(K);
        if (std::abs(pts[i] - k * delta) > 1e-9 * delta * std::max(1.0, std::abs(k)))
            throw InvalidInput("residual grid is not arithmetic and symmetric");
    }
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto k = static_cast<long long>(i) - static_cast<long long>(K);
        if (k % 2 != 0) continue;
        pairs.emplace_back(i, static_cast<std::size_t>(static_cast<long long>(K) + k / 2));
    }
    if (pairs.size() < 3) throw InvalidInput("residual needs at least 3 usable points");
    return pairs;
}

template <typename Residual>
ResidualReport sup_over_pairs(const CFGrid& grid, Residual&& r) {
    ResidualReport rep;
    for (auto [i, h] : dyadic_pairs(grid)) {
        const double v = r(i, h);
        if (!std::isfinite(v)) throw NumericFailure("non-finite residual", v);
        if (v > rep.sup_residual) {
            rep.sup_residual = v;
            rep.argmax_s = grid.points[i];
        }
        ++rep.points_used;
    }
    return rep;
}

}  // namespace

void validate(const TailBoundParams& t) {
    if (!(t.A > 0.0) || !(t.p > 1.0) || !(t.s0 > 0.0))
        throw InvalidInput("tail bound needs A > 0, p > 1, s0 > 0");
    if (t.C && !(*t.C > 0.0)) throw InvalidInput("tail constant C must be positive");
    if (t.epsilon && !(*t.epsilon > 0.0 && *t.epsilon < 1.0))
        throw InvalidInput("epsilon must lie in (0, 1)");
}

TailBoundParams power_tail_params(double C, double epsilon, double s0) {
    TailBoundParams t{cf_bound_constant(C, epsilon), 1.0 + epsilon, s0, C, epsilon};
    validate(t);
    return t;
}

std::vector<double> symmetric_grid(double delta, int k_grid) {
    if (!(delta > 0.0) || !std::isfinite(delta)) throw InvalidInput("grid spacing must be positive");
    if (k_grid < 0) throw InvalidInput("grid half-width must be non-negative");
    std::vector<double> pts;
    pts.reserve(2 * static_cast<std::size_t>(k_grid) + 1);
    for (int k = -k_grid; k <= k_grid; ++k) pts.push_back(k * delta);
    return pts;
}

CFGrid tabulate_cf(const DistributionSpec& spec, std::span<const double> points) {
    require_finite(points);
    CFGrid g = empty_grid(points);
    for (std::size_t i = 0; i < points.size(); ++i) g.values[i] = analytic_cf(spec, points[i]);
    return g;
}

CFGrid iterate_cf(const IterateSpec& spec, std::span<const double> points, unsigned threads) {
    if (spec.n < 0) throw InvalidInput("iterate count must be non-negative");
    if (spec.n > 1000) throw InvalidInput("iterate count above 1000 underflows 2^-n");
    require_finite(points);
    CFGrid g = empty_grid(points);
    const int n = spec.n;
    parallel_for(points.size(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const double s = points[i];
            std::complex<double> total{0.0, 0.0};
            auto add = [&](const DistributionSpec& d, int j) {
                const double scale = std::ldexp(1.0, j);
                const auto l = log_cf(d, std::ldexp(s, -j));
                if (branch_exceeded(l)) g.flags[i] |= kCfBranch;
                total += scale * l;
            };
            add(spec.seed, n);
            for (int j = 0; j < n; ++j) add(spec.kernel, j);
            finish_point(g, i, total);
        }
    });
    return g;
}

KernelLimitResult kernel_limit_cf(const DistributionSpec& kernel, std::span<const double> points,
                                  const KernelLimitOptions& options) {
    if (options.depth_cap < 1) throw InvalidInput("depth cap must be at least 1");
    if (!(options.tol > 0.0)) throw InvalidInput("tolerance must be positive");
    if (options.tail) validate(*options.tail);
    require_finite(points);

    KernelLimitResult res;
    res.grid = empty_grid(points);
    std::vector<std::complex<double>> total(points.size(), {0.0, 0.0});
    std::vector<std::complex<double>> inc(points.size());
    bool converged = false;
    int depth = 0;
    for (; depth < options.depth_cap; ++depth) {
        const double scale = std::ldexp(1.0, depth);
        parallel_for(points.size(), options.threads, [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                const auto l = log_cf(kernel, std::ldexp(points[i], -depth));
                if (branch_exceeded(l)) res.grid.flags[i] |= kCfBranch;
                inc[i] = scale * l;
            }
        });
        double sup = 0.0;
        for (const auto& z : inc) sup = std::max(sup, std::isfinite(z.real()) ? std::abs(z) : 0.0);
        if (sup < options.tol) {
            converged = true;
            break;
        }
        for (std::size_t i = 0; i < points.size(); ++i) total[i] += inc[i];
        res.last_increment = sup;
    }
    res.depth = depth;

    if (options.tail) {
        const auto& t = *options.tail;
        double smax = 0.0;
        for (double s : points) smax = std::max(smax, std::abs(s));
        if (std::ldexp(smax, -depth) <= t.s0) {
            res.truncation_bound = t.A * std::pow(smax, t.p) * std::pow(2.0, -depth * (t.p - 1.0)) /
                                   (1.0 - std::pow(2.0, -(t.p - 1.0)));
        }
    }
    if (!converged && !res.truncation_bound)
        throw NonConvergence("kernel limit did not converge within the depth cap", res.last_increment);

    for (std::size_t i = 0; i < points.size(); ++i) finish_point(res.grid, i, total[i]);
    return res;
}

ResidualReport fixed_point_residual(const CFGrid& candidate, const DistributionSpec& kernel) {
    return sup_over_pairs(candidate, [&](std::size_t i, std::size_t h) {
        const auto half = candidate.values[h];
        return std::abs(candidate.values[i] - half * half * analytic_cf(kernel, candidate.points[i]));
    });
}

ResidualReport dyadic_stability_residual(const CFGrid& candidate) {
    return sup_over_pairs(candidate, [&](std::size_t i, std::size_t h) {
        const auto half = candidate.values[h];
        return std::abs(candidate.values[i] - half * half);
    });
}

bool log_sandwich_holds(std::complex<double> a) {
    using L = long double;
    const std::complex<L> z(a.real(), a.imag());
    const L m = std::abs(z);
    if (!(m < 0.5L)) throw DomainError("log sandwich needs |a| < 0.5");
    const L re = 0.5L * std::log1p(2.0L * z.real() + std::norm(z));
    const L im = std::atan2(z.imag(), 1.0L + z.real());
    const L lg = std::hypot(re, im);
    return m * (1.0L - m) <= lg && lg <= m * (1.0L + m);
}

TailBoundReport verify_tail_bound(const DistributionSpec& kernel, const TailBoundParams& params,
                                  std::span<const double> points) {
    validate(params);
    require_finite(points);
    TailBoundReport rep;
    for (double s : points) {
        if (s == 0.0 || std::abs(s) > params.s0) continue;
        ++rep.points_used;
        const double bound = params.A * std::pow(std::abs(s), params.p);
        const auto l = log_cf(kernel, s);
        // log_cf may be a continuous (non-principal) logarithm; reduce the
        // phase so the ratio uses the principal branch.
        const std::complex<double> principal(l.real(), std::remainder(l.imag(), 2.0 * kPi));
        const double ratio = std::abs(principal) / bound;
        if (ratio > rep.worst_ratio) {
            rep.worst_ratio = ratio;
            rep.worst_s = s;
        }
        // phi - 1 = expm1(L), split so small values keep their precision.
        const double h = std::sin(0.5 * l.imag());
        const std::complex<double> a(std::expm1(l.real()) * std::cos(l.imag()) - 2.0 * h * h,
                                     std::exp(l.real()) * std::sin(l.imag()));
        const double ratio1 = std::abs(a) / bound;
        if (ratio1 > rep.worst_ratio_minus_one) {
            rep.worst_ratio_minus_one = ratio1;
            rep.worst_s_minus_one = s;
        }
        if (std::abs(a) < 0.5) {
            ++rep.sandwich_checked;
            if (!log_sandwich_holds(a)) rep.sandwich_holds = false;
        }
    }
    rep.holds = rep.worst_ratio <= 1.0;
    rep.holds_minus_one = rep.worst_ratio_minus_one <= 1.0;
    return rep;
}

StableLimitReport stable_limit_check(const DistributionSpec& dist, double C,
                                     std::span<const std::uint64_t> n_values,
                                     std::span<const double> points, double noise) {
    if (!(C > 0.0)) throw InvalidInput("stable limit needs C > 0");
    require_finite(points);
    StableLimitReport rep;
    for (std::uint64_t n : n_values) {
        if (n == 0) throw InvalidInput("stable limit needs n >= 1");
        StableLimitRow row{n, 0.0, 0.0};
        const double nd = static_cast<double>(n);
        for (double s : points) {
            const auto l = nd * log_cf(dist, s / nd);
            const std::complex<double> v =
                l.real() < kLogTiny ? std::complex<double>{} : std::polar(std::exp(l.real()), l.imag());
            const double err = std::abs(v - std::exp(-C * kPi * std::abs(s)));
            if (err > row.sup_error) {
                row.sup_error = err;
                row.argmax_s = s;
            }
        }
        if (!rep.rows.empty() && row.sup_error > rep.rows.back().sup_error + noise) rep.non_increasing = false;
        rep.rows.push_back(row);
    }
    return rep;
}

double levy_constant(double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("levy_constant needs epsilon in (0, 1)");
    return (1.0 + epsilon) * std::tgamma(1.0 - epsilon) * std::sin(epsilon * kPi / 2.0) / epsilon;
}

double cf_bound_constant(double C, double epsilon) {
    if (!(C > 0.0)) throw DomainError("tail constant must be positive");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("epsilon must lie in (0, 1)");
    // The first term integrates x^-eps over [0, pi/s], hence the 1/(1 - eps).
    return 2.0 * C * std::pow(kPi, 1.0 - epsilon) / (1.0 - epsilon) + 4.0 * C * std::pow(kPi, -(1.0 + epsilon));
}

double tail_decay_constant(const DistributionSpec& spec, double epsilon, std::span<const double> xs) {
    if (xs.empty()) throw InvalidInput("tail_decay_constant needs at least one point");
    double c = 0.0;
    for (double x : xs) c = std::max(c, std::pow(x, 1.0 + epsilon) * tail_mass(spec, x).right);
    return c;
}

}  // namespace qso
