#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "qso/cf_engine.hpp"
#include "qso/distributions.hpp"
#include "qso/random.hpp"

namespace qso {

struct PopulationState {
    std::uint64_t generation = 0;
    std::vector<double> values;
};

struct PopulationOptions {
    /// Draw the two parents without replacement (sensitivity runs only).
    bool forbid_self_pairing = false;
    unsigned threads = 1;
};

/// Population propagation. Generation 0 holds K draws from `initial`; each later child
/// is (x + y)/2 + Y with parents x, y drawn uniformly with replacement from
/// the previous generation and Y from `kernel`. Returns generations 0..n.
///
/// Generation g uses stream.substream(g) and child j of it a further
/// substream(j), so the result does not depend on the thread count.
std::vector<PopulationState> evolve_population(const DistributionSpec& initial,
                                               const DistributionSpec& kernel, std::size_t K,
                                               std::uint64_t n, const RandomStream& stream,
                                               const PopulationOptions& options = {});

/// Generation 0 of evolve_population: K draws, child j from
/// stream.substream(0).substream(j).
PopulationState initial_population(const DistributionSpec& initial, std::size_t K,
                                   const RandomStream& stream, const PopulationOptions& options = {});

/// One propagation step applied to `parent`; child j draws from
/// stream.substream(j).
PopulationState next_generation(const PopulationState& parent, const DistributionSpec& kernel,
                                const RandomStream& stream, const PopulationOptions& options = {});

struct ExactOptions {
    int max_n = 26;
    bool guard_override = false;
    unsigned threads = 1;
};

/// Primitive draws per output of draw_exact: 2^n from F and 2^n - 1 from G.
double exact_draw_cost(int n);

/// Exact draws: each output is X^(n) + Y^(n), the average of 2^n draws from
/// F plus, for j < n, the average of 2^j fresh kernel draws. Output i uses
/// stream.substream(i). Throws FeasibilityError when n exceeds max_n
/// without guard_override.
std::vector<double> draw_exact(const IterateSpec& spec, std::size_t count,
                               const RandomStream& stream, const ExactOptions& options = {});

enum class LogBase { base2, natural };

struct TruncationBudget {
    double alpha = 0.05;
    double delta = 0.01;
    std::optional<std::uint64_t> n;  // nullopt: n = infinity
    double v_F = 1.0;
    double v_G = 0.5;
    LogBase log_base = LogBase::base2;
    std::optional<std::uint64_t> bonferroni_K;
};

/// floor(log(4 max(v_F, v_G (1 - 2^-n) / 2) / (delta^2 alpha)) + 1), at
/// least 1, with alpha replaced by alpha / K when bonferroni_K is set.
int truncation_depth(const TruncationBudget& budget);

enum class LevelSampling {
    /// Sum 2^j kernel draws per level.
    explicit_draws,
    /// Draw each level average U_j from its exact law (normal, point mass,
    /// exponential and exponent-2 stable kernels only).
    closed_form,
};

struct ApproxOptions {
    LevelSampling levels = LevelSampling::explicit_draws;
    /// Explicit level sampling costs 2^N - 1 draws per output.
    int max_depth = 26;
    bool guard_override = false;
    unsigned threads = 1;
};

/// Truncated draws: m + sum_{j<N} U_j with N = truncation_depth(budget). Throws
/// BudgetInapplicable for kernels with infinite variance.
std::vector<double> draw_approx(double seed_mean, const DistributionSpec& kernel,
                                const TruncationBudget& budget, std::size_t count,
                                const RandomStream& stream, const ApproxOptions& options = {});

}  // namespace qso
