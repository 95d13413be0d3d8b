#include "qso/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <type_traits>
#include <variant>

#include "qso/errors.hpp"
#include "qso/parallel.hpp"

namespace qso {

PopulationState next_generation(const PopulationState& parent, const DistributionSpec& kernel,
                                const RandomStream& stream, const PopulationOptions& options) {
    const auto& prev = parent.values;
    const std::size_t K = prev.size();
    if (K < 2) throw InvalidInput("population needs at least 2 individuals");
    PopulationState child{parent.generation + 1, std::vector<double>(K)};
    parallel_for(K, options.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j) {
            RandomStream rng = stream.substream(j);
            const std::size_t x = rng.index(K);
            std::size_t y = rng.index(options.forbid_self_pairing ? K - 1 : K);
            if (options.forbid_self_pairing && y >= x) ++y;
            child.values[j] = 0.5 * (prev[x] + prev[y]) + sample_one(kernel, rng);
        }
    });
    return child;
}

PopulationState initial_population(const DistributionSpec& initial, std::size_t K,
                                   const RandomStream& stream, const PopulationOptions& options) {
    if (K < 2) throw InvalidInput("population needs at least 2 individuals");
    PopulationState p0{0, std::vector<double>(K)};
    const RandomStream first = stream.substream(0);
    parallel_for(K, options.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j) {
            RandomStream rng = first.substream(j);
            p0.values[j] = sample_one(initial, rng);
        }
    });
    return p0;
}

std::vector<PopulationState> evolve_population(const DistributionSpec& initial,
                                               const DistributionSpec& kernel, std::size_t K,
                                               std::uint64_t n, const RandomStream& stream,
                                               const PopulationOptions& options) {
    std::vector<PopulationState> gens;
    gens.reserve(n + 1);
    gens.push_back(initial_population(initial, K, stream, options));
    for (std::uint64_t g = 1; g <= n; ++g)
        gens.push_back(next_generation(gens.back(), kernel, stream.substream(g), options));
    return gens;
}

double exact_draw_cost(int n) { return std::ldexp(2.0, n) - 1.0; }

std::vector<double> draw_exact(const IterateSpec& spec, std::size_t count, const RandomStream& stream,
                               const ExactOptions& options) {
    if (spec.n < 0) throw InvalidInput("iterate count must be non-negative");
    if (spec.n > 62) throw FeasibilityError("draw_exact: n above 62 cannot be represented", exact_draw_cost(spec.n));
    if (spec.n > options.max_n && !options.guard_override)
        throw FeasibilityError("draw_exact: n = " + std::to_string(spec.n) + " needs " +
                                   std::to_string(exact_draw_cost(spec.n)) +
                                   " draws per value; pass the guard override to proceed",
                               exact_draw_cost(spec.n));
    const int n = spec.n;
    std::vector<double> out(count);
    parallel_for(count, options.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            RandomStream rng = stream.substream(i);
            double v = std::ldexp(sample_sum(spec.seed, std::uint64_t{1} << n, rng), -n);
            for (int j = 0; j < n; ++j)
                v += std::ldexp(sample_sum(spec.kernel, std::uint64_t{1} << j, rng), -j);
            out[i] = v;
        }
    });
    return out;
}

int truncation_depth(const TruncationBudget& b) {
    if (!(b.alpha > 0.0 && b.alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
    if (!(b.delta > 0.0) || !std::isfinite(b.delta)) throw DomainError("delta must be positive");
    if (!(b.v_F >= 0.0) || !(b.v_G >= 0.0) || !std::isfinite(b.v_F) || !std::isfinite(b.v_G))
        throw DomainError("variances must be finite and non-negative");
    if (b.n && *b.n == 0) throw DomainError("n must be positive");
    if (b.bonferroni_K && *b.bonferroni_K == 0) throw DomainError("Bonferroni K must be positive");

    const double alpha = b.bonferroni_K ? b.alpha / static_cast<double>(*b.bonferroni_K) : b.alpha;
    const double level = b.n ? -std::expm1(-static_cast<double>(std::min<std::uint64_t>(*b.n, 2000)) *
                                           std::numbers::ln2)
                             : 1.0;
    const double arg = 4.0 * std::max(b.v_F, b.v_G * level / 2.0) / (b.delta * b.delta * alpha);
    if (!(arg > 1.0)) return 1;
    const double lg = b.log_base == LogBase::natural ? std::log(arg) : std::log2(arg);
    if (lg > 1e6) throw DomainError("truncation depth is unreasonably large");
    return std::max(1, static_cast<int>(std::floor(lg + 1.0)));
}

namespace {

// Exact law of the average of 2^j kernel draws, for the kernels where it is
// available in closed form.
struct LevelAverage {
    const DistributionSpec& kernel;

    double operator()(int j, RandomStream& rng) const {
        const double m = std::ldexp(1.0, j);
        return std::visit(
            [&](const auto& d) -> double {
                using T = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<T, PointMass>) {
                    return d.value;
                } else if constexpr (std::is_same_v<T, Normal>) {
                    return d.mean + std::sqrt(d.variance / m) * rng.standard_normal();
                } else if constexpr (std::is_same_v<T, Exponential>) {
                    return rng.gamma(m) / (m * d.rate);
                } else if constexpr (std::is_same_v<T, SymmetricStable>) {
                    return std::sqrt(2.0 / m) * rng.standard_normal();  // exponent 2 only
                } else {
                    throw InvalidInput("closed-form level sampling is not available for " +
                                       family_name(kernel.family()));
                }
            },
            kernel.params());
    }
};

}  // namespace

std::vector<double> draw_approx(double seed_mean, const DistributionSpec& kernel,
                                const TruncationBudget& budget, std::size_t count,
                                const RandomStream& stream, const ApproxOptions& options) {
    if (!std::isfinite(seed_mean)) throw InvalidInput("seed mean must be finite");
    if (moments(kernel).variance_infinite)
        throw BudgetInapplicable("the truncation budget needs a kernel with finite variance (" +
                                 family_name(kernel.family()) + " has none)");
    const int N = truncation_depth(budget);
    const bool closed = options.levels == LevelSampling::closed_form;
    if (closed) {
        // Fail before drawing anything.
        RandomStream probe = stream.substream(0);
        LevelAverage{kernel}(0, probe);
    } else if (N > options.max_depth && !options.guard_override) {
        throw FeasibilityError("draw_approx: depth N = " + std::to_string(N) +
                                   " needs 2^N - 1 kernel draws per value; use closed-form levels or the guard override",
                               std::ldexp(1.0, N) - 1.0);
    }
    if (!closed && N > 62) throw FeasibilityError("draw_approx: depth above 62 cannot be drawn explicitly", std::ldexp(1.0, N));

    std::vector<double> out(count);
    const LevelAverage level{kernel};
    parallel_for(count, options.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            RandomStream rng = stream.substream(i);
            double v = seed_mean;
            for (int j = 0; j < N; ++j)
                v += closed ? level(j, rng) : std::ldexp(sample_sum(kernel, std::uint64_t{1} << j, rng), -j);
            out[i] = v;
        }
    });
    return out;
}

}  // namespace qso
