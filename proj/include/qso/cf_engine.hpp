#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qso/distributions.hpp"

namespace qso {

/// Per-point diagnostics attached to a CFGrid.
enum CfFlag : std::uint8_t {
    kCfClean = 0,
    /// Some factor had modulus below 1e-300 (or was exactly zero); the
    /// product is reported as exact 0.
    kCfZero = 1,
    /// Some factor's principal logarithm had |Im| > pi/2. Integer powers
    /// make the product independent of the branch, so the value is still
    /// exact; the flag only marks points where the factor wound far from 1.
    kCfBranch = 2,
};

/// Characteristic-function values on a sorted frequency grid.
struct CFGrid {
    std::vector<double> points;
    std::vector<std::complex<double>> values;
    std::vector<std::uint8_t> flags;  // CfFlag bits, same length as points

    std::size_t size() const noexcept { return points.size(); }
};

/// {k * delta : |k| <= k_grid}, the grid on which s/2 is again a grid point
/// for every even k.
std::vector<double> symmetric_grid(double delta, int k_grid);

/// analytic_cf of one law on a grid.
CFGrid tabulate_cf(const DistributionSpec& spec, std::span<const double> points);

/// H^(n) = Q_G^n(F): seed F, kernel G, n applications.
struct IterateSpec {
    DistributionSpec seed;
    DistributionSpec kernel;
    int n = 0;
};

/// phi of H^(n) on the grid,
///   (phi_F(s / 2^n))^(2^n) * prod_{j<n} (phi_G(s / 2^j))^(2^j),
/// accumulated in the log domain. n = 0 returns phi_F.
CFGrid iterate_cf(const IterateSpec& spec, std::span<const double> points, unsigned threads = 1);

/// Constants of the local bound |ln phi_G(s)| <= A |s|^p for |s| <= s0, and
/// optionally of a power tail G[x, inf) <= C x^-(1+epsilon).
struct TailBoundParams {
    double A = 1.0;
    double p = 2.0;
    double s0 = 1.0;
    std::optional<double> C;
    std::optional<double> epsilon;
};

/// Throws InvalidInput unless A > 0, p > 1, s0 > 0, C > 0 and epsilon in
/// (0, 1) (the last two only when set).
void validate(const TailBoundParams& params);

/// TailBoundParams for a symmetric kernel with power tail constant C:
/// A = cf_bound_constant(C, eps), p = 1 + eps.
TailBoundParams power_tail_params(double C, double epsilon, double s0);

struct KernelLimitOptions {
    int depth_cap = 200;
    double tol = 1e-14;
    std::optional<TailBoundParams> tail;
    unsigned threads = 1;
};

struct KernelLimitResult {
    CFGrid grid;
    int depth = 0;              // factors j = 0 .. depth-1 were included
    double last_increment = 0;  // sup over the grid of the last included 2^j |Log phi_G(s/2^j)|
    /// Bound on the neglected log-sum (hence on the value error), known when
    /// tail constants were supplied and s/2^depth lies inside [-s0, s0].
    std::optional<double> truncation_bound;
};

/// Infinite product prod_{j>=0} (phi_G(s/2^j))^(2^j), truncated once every
/// grid point's next increment drops below tol, or at depth_cap. Throws
/// NonConvergence when the cap is hit without tail constants.
KernelLimitResult kernel_limit_cf(const DistributionSpec& kernel, std::span<const double> points,
                                  const KernelLimitOptions& options = {});

struct ResidualReport {
    double sup_residual = 0.0;
    double argmax_s = 0.0;
    std::size_t points_used = 0;
};

/// sup |phi(s) - phi(s/2)^2 phi_G(s)| over the even-index points of a
/// symmetric arithmetic grid. Throws InvalidInput for other grids or fewer
/// than 3 usable points.
ResidualReport fixed_point_residual(const CFGrid& candidate, const DistributionSpec& kernel);

/// sup |phi(2s) - phi(s)^2| over the same point pairs.
ResidualReport dyadic_stability_residual(const CFGrid& candidate);

struct TailBoundReport {
    bool holds = true;
    double worst_ratio = 0.0;  // max |Log phi_G(s)| / (A |s|^p)
    double worst_s = 0.0;
    bool holds_minus_one = true;
    double worst_ratio_minus_one = 0.0;  // max |phi_G(s) - 1| / (A |s|^p)
    double worst_s_minus_one = 0.0;
    bool sandwich_holds = true;
    std::size_t sandwich_checked = 0;
    std::size_t points_used = 0;
};

/// Checks the local log bound on the grid points with 0 < |s| <= s0
/// (others are skipped), the same bound for phi_G - 1, and the log sandwich
/// for every a = phi_G(s) - 1 with |a| < 0.5.
TailBoundReport verify_tail_bound(const DistributionSpec& kernel, const TailBoundParams& params,
                                  std::span<const double> points);

/// |a|(1 - |a|) <= |ln(1 + a)| <= |a|(1 + |a|), evaluated in extended
/// precision. Precondition |a| < 0.5.
bool log_sandwich_holds(std::complex<double> a);

struct StableLimitRow {
    std::uint64_t n = 0;
    double sup_error = 0.0;
    double argmax_s = 0.0;
};

struct StableLimitReport {
    std::vector<StableLimitRow> rows;
    bool non_increasing = true;
};

/// sup_s |(phi(s/n))^n - exp(-C pi |s|)| for each n. non_increasing
/// tolerates increases up to `noise`.
StableLimitReport stable_limit_check(const DistributionSpec& dist, double C,
                                     std::span<const std::uint64_t> n_values,
                                     std::span<const double> points, double noise = 1e-9);

/// c(eps) = (1 + eps) Gamma(1 - eps) sin(eps pi / 2) / eps for eps in (0, 1).
double levy_constant(double epsilon);

/// 2 C pi^(1-eps) / (1 - eps) + 4 C pi^-(1+eps): bound on |1 - phi_G(s)| / |s|^(1+eps)
/// for a symmetric law with G[x, inf) <= C x^-(1+eps).
double cf_bound_constant(double C, double epsilon);

/// max over xs of x^(1+eps) * P(X >= x), the smallest C with the tail bound
/// on the given points.
double tail_decay_constant(const DistributionSpec& spec, double epsilon,
                           std::span<const double> xs);

}  // namespace qso
