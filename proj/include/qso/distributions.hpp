#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "qso/random.hpp"

namespace qso {

struct PointMass {
    double value = 0.0;
};

struct Normal {
    double mean = 0.0;
    double variance = 1.0;
};

struct Exponential {
    double rate = 1.0;
};

/// Density proportional to (1 + a|x - mu|^alpha)^(-2/alpha). Tails decay like
/// |x|^-2 for every alpha, which puts the family in the Cauchy domain of
/// attraction. alpha = 2, a = 1 is the standard Cauchy law.
struct CauchyLike {
    double mu = 0.0;
    double a = 1.0;
    double alpha = 2.0;
};

/// P(X = k) = C |k|^-(2 + epsilon) on the nonzero integers.
struct DiscretePowerLaw {
    double epsilon = 1.0;
};

/// Characteristic function exp(-|s|^exponent), exponent in (1, 2].
struct SymmetricStable {
    double exponent = 2.0;
};

/// Uniform law on the listed values (with multiplicity).
struct Empirical {
    std::vector<double> values;
};

using DistributionParams = std::variant<PointMass, Normal, Exponential, CauchyLike,
                                        DiscretePowerLaw, SymmetricStable, Empirical>;

enum class Family {
    point_mass,
    normal,
    exponential,
    cauchy_like,
    discrete_power_law,
    symmetric_stable,
    empirical,
};

/// Canonical family tag ("normal", "cauchy_like", ...).
std::string family_name(Family f);

namespace detail {
struct DistributionState;
}

/// Validated, immutable description of a one-dimensional law. Copies share
/// the underlying state, so specs are cheap to pass around and safe to use
/// from several threads at once.
class DistributionSpec {
public:
    /// Throws InvalidSpec when the parameters violate the family's domain.
    explicit DistributionSpec(DistributionParams params);

    static DistributionSpec point_mass(double value);
    static DistributionSpec normal(double mean, double variance);
    static DistributionSpec exponential(double rate);
    static DistributionSpec cauchy_like(double mu, double a, double alpha);
    static DistributionSpec discrete_power_law(double epsilon);
    static DistributionSpec symmetric_stable(double exponent);
    static DistributionSpec empirical(std::vector<double> values);

    Family family() const noexcept;
    const DistributionParams& params() const noexcept;

    /// Normalizing constant of the density or mass function: C of the
    /// discrete power law, the density constant of the Cauchy-like family,
    /// 1 elsewhere.
    double normalizing_constant() const noexcept;

    const detail::DistributionState& state() const noexcept { return *state_; }

    friend bool operator==(const DistributionSpec& a, const DistributionSpec& b);

private:
    std::shared_ptr<const detail::DistributionState> state_;
};

struct MomentSummary {
    double mean = 0.0;
    /// False when E|X| diverges; mean then holds the centre of symmetry.
    bool mean_defined = true;
    double variance = 0.0;
    bool variance_infinite = false;
    /// E|X|^p is finite exactly for p below this order (infinity when all
    /// absolute moments exist).
    double max_moment_order = 0.0;
    /// Set by summarize() when the sample has a single value.
    bool degenerate = false;
    std::size_t count = 0;
};

struct TailMass {
    double left = 0.0;   // P(X <= -x)
    double right = 0.0;  // P(X >= x)
};

std::vector<double> sample(const DistributionSpec& spec, std::size_t count,
                           RandomStream& stream);
double sample_one(const DistributionSpec& spec, RandomStream& stream);
/// Sum of `count` independent draws.
double sample_sum(const DistributionSpec& spec, std::uint64_t count, RandomStream& stream);

std::complex<double> analytic_cf(const DistributionSpec& spec, double s);

/// A logarithm of the characteristic function. Families with a closed form
/// return the logarithm that is continuous in s and vanishes at 0; the
/// others return the principal branch. Accurate near s = 0, where
/// phi(s) - 1 is tiny, which matters once the value is scaled by 2^j.
std::complex<double> log_cf(const DistributionSpec& spec, double s);

MomentSummary moments(const DistributionSpec& spec);

/// Left and right tail masses beyond x > 0 (both closed intervals).
TailMass tail_mass(const DistributionSpec& spec, double x);

/// lim x * P(X > x) for the Cauchy-like family.
double cauchy_tail_constant(const DistributionSpec& spec);

/// Sum over k >= first of k^-p for p > 1 and integer first >= 1.
double zeta_tail(double p, std::uint64_t first);

/// 1 - phi(s) of the centred Cauchy-like law by oscillatory quadrature; the
/// value used for every alpha except the closed-form alpha = 2. Exposed so
/// tests can compare it against the closed form.
double cauchy_like_one_minus_cf_quadrature(const DistributionSpec& spec, double s);

}  // namespace qso
