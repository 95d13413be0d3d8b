#include "qso/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/factorials.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/zeta.hpp>

#include "qso/errors.hpp"
#include "qso/quadrature.hpp"
#include "qso/summation.hpp"

namespace qso {

namespace detail {

struct DistributionState {
    DistributionParams params;
    double norm = 1.0;

    // Discrete power law: Re Li_p(e^{i theta}) - zeta(p) is a singular term
    // plus an even power series in theta (|theta| <= pi after reduction).
    double exponent_p = 0.0;
    bool integer_p = false;
    int int_p = 0;
    double singular_coeff = 0.0;   // non-integer p
    double harmonic = 0.0;         // H_{p-1} for integer p
    std::vector<double> series;    // series[m-1] multiplies theta^(2m)
};

}  // namespace detail

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kPowerLawTerms = 40;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool ok, const std::string& what) {
    if (!ok) throw InvalidSpec(what);
}

void validate(const DistributionParams& params) {
    std::visit(
        overloaded{
            [](const PointMass& d) { require(std::isfinite(d.value), "point_mass: value must be finite"); },
            [](const Normal& d) {
                require(std::isfinite(d.mean), "normal: mean must be finite");
                require(std::isfinite(d.variance) && d.variance >= 0.0,
                        "normal: variance must be finite and >= 0");
            },
            [](const Exponential& d) {
                require(std::isfinite(d.rate) && d.rate > 0.0, "exponential: rate must be > 0");
            },
            [](const CauchyLike& d) {
                require(std::isfinite(d.mu), "cauchy_like: mu must be finite");
                require(std::isfinite(d.a) && d.a > 0.0, "cauchy_like: a must be > 0");
                require(std::isfinite(d.alpha) && d.alpha > 0.0, "cauchy_like: alpha must be > 0");
            },
            [](const DiscretePowerLaw& d) {
                require(std::isfinite(d.epsilon) && d.epsilon > 0.0,
                        "discrete_power_law: epsilon must be > 0");
            },
            [](const SymmetricStable& d) {
                require(d.exponent > 1.0 && d.exponent <= 2.0,
                        "symmetric_stable: exponent must lie in (1, 2]");
            },
            [](const Empirical& d) {
                require(!d.values.empty(), "empirical: value list must be nonempty");
                require(std::all_of(d.values.begin(), d.values.end(),
                                    [](double v) { return std::isfinite(v); }),
                        "empirical: values must be finite");
            },
        },
        params);
}

void prepare_power_law(detail::DistributionState& st, double epsilon) {
    using boost::math::zeta;
    const double p = 2.0 + epsilon;
    st.exponent_p = p;
    st.norm = 0.5 / zeta(p);
    const double rounded = std::round(p);
    st.integer_p = std::abs(p - rounded) < 1e-12;
    st.series.assign(kPowerLawTerms, 0.0);
    if (st.integer_p) {
        st.int_p = static_cast<int>(rounded);
        st.harmonic = 0.0;
        for (int k = 1; k < st.int_p; ++k) st.harmonic += 1.0 / k;
    } else {
        st.singular_coeff = boost::math::tgamma(1.0 - p) * std::cos(kPi * (p - 1.0) / 2.0);
    }
    for (int m = 1; m <= kPowerLawTerms; ++m) {
        if (st.integer_p && 2 * m == st.int_p - 1) continue;  // folded into the log term
        const double arg = st.integer_p ? static_cast<double>(st.int_p - 2 * m) : p - 2.0 * m;
        const double sign = (m % 2 == 0) ? 1.0 : -1.0;
        st.series[m - 1] =
            sign * zeta(arg) / boost::math::factorial<double>(static_cast<unsigned>(2 * m));
    }
}

// Re Li_p(e^{i theta}) - zeta(p) for theta in [-pi, pi].
double power_law_series_deficit(const detail::DistributionState& st, double theta) {
    if (theta == 0.0) return 0.0;
    const double t2 = theta * theta;
    double poly = 0.0;
    for (int m = kPowerLawTerms; m >= 1; --m) poly = poly * t2 + st.series[m - 1];
    poly *= t2;
    const double abs_t = std::abs(theta);
    double singular;
    if (!st.integer_p) {
        singular = st.singular_coeff * std::pow(abs_t, st.exponent_p - 1.0);
    } else {
        const int q = st.int_p - 1;
        const double fact = boost::math::factorial<double>(static_cast<unsigned>(q));
        if (q % 2 == 0) {
            const double sign = ((q / 2) % 2 == 0) ? 1.0 : -1.0;
            singular = sign * std::pow(abs_t, q) / fact * (st.harmonic - std::log(abs_t));
        } else {
            const double sign = (((q - 1) / 2) % 2 == 0) ? 1.0 : -1.0;
            singular = -sign * std::pow(abs_t, q) * (kPi / 2.0) / fact;
        }
    }
    return singular + poly;
}

// Accurate log(1 + z) for complex z.
std::complex<double> complex_log1p(std::complex<double> z) {
    const double re = 0.5 * std::log1p(2.0 * z.real() + std::norm(z));
    const double im = std::atan2(z.imag(), 1.0 + z.real());
    return {re, im};
}

// Logarithm of a real characteristic-function value given as 1 - d.
std::complex<double> log_from_deficit(double d) {
    if (std::abs(d) < 0.5) return {std::log1p(-d), 0.0};
    const double v = 1.0 - d;
    if (v == 0.0) return {-kInf, 0.0};
    return std::log(std::complex<double>(v, 0.0));
}

double normal_cdf_upper(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

// P(X - mu > r) of the Cauchy-like family.
double cauchy_like_upper(const CauchyLike& d, double r) {
    if (r < 0.0) return 1.0 - cauchy_like_upper(d, -r);
    if (r == 0.0) return 0.5;
    const double shape = 1.0 / d.alpha;
    const double y = 1.0 / (1.0 + d.a * std::pow(r, d.alpha));
    return 0.5 * boost::math::ibeta(shape, shape, y);
}

double power_law_one_minus_cf(const detail::DistributionState& st, double s) {
    const double theta = std::remainder(s, 2.0 * kPi);
    return -2.0 * st.norm * power_law_series_deficit(st, theta);
}

double cauchy_like_one_minus_cf(const DistributionSpec& spec, double s) {
    const auto& d = std::get<CauchyLike>(spec.params());
    const double w = std::abs(s);
    if (w == 0.0) return 0.0;
    if (d.alpha == 2.0) return -std::expm1(-w / std::sqrt(d.a));
    return cauchy_like_one_minus_cf_quadrature(spec, s);
}

double stable_upper_tail(double exponent, double x) {
    if (exponent == 2.0) return normal_cdf_upper(x / std::numbers::sqrt2);
    if (x == 0.0) return 0.5;
    if (x < 0.0) return 1.0 - stable_upper_tail(exponent, -x);
    auto g = [exponent](double s) { return std::exp(-std::pow(s, exponent)) / s; };
    const auto r = sine_transform(g, x, 1e-12);
    if (!(r.error <= 1e-8)) throw NumericFailure("symmetric_stable: tail inversion did not converge", r.error);
    return std::clamp(0.5 - r.value / kPi, 0.0, 1.0);
}

double empirical_fraction(const std::vector<double>& values, auto pred) {
    const auto hits = std::count_if(values.begin(), values.end(), pred);
    return static_cast<double>(hits) / static_cast<double>(values.size());
}

}  // namespace

std::string family_name(Family f) {
    switch (f) {
        case Family::point_mass: return "point_mass";
        case Family::normal: return "normal";
        case Family::exponential: return "exponential";
        case Family::cauchy_like: return "cauchy_like";
        case Family::discrete_power_law: return "discrete_power_law";
        case Family::symmetric_stable: return "symmetric_stable";
        case Family::empirical: return "empirical";
    }
    return "unknown";
}

DistributionSpec::DistributionSpec(DistributionParams params) {
    validate(params);
    auto st = std::make_shared<detail::DistributionState>();
    st->params = std::move(params);
    if (const auto* d = std::get_if<CauchyLike>(&st->params)) {
        // Integral of (1 + a|x|^alpha)^(-2/alpha) is 2 a^(-1/alpha) B(1/alpha, 1/alpha) / alpha.
        const double shape = 1.0 / d->alpha;
        st->norm = d->alpha * std::pow(d->a, shape) / (2.0 * boost::math::beta(shape, shape));
    } else if (const auto* d = std::get_if<DiscretePowerLaw>(&st->params)) {
        prepare_power_law(*st, d->epsilon);
    }
    state_ = std::move(st);
}

DistributionSpec DistributionSpec::point_mass(double value) { return DistributionSpec(PointMass{value}); }
DistributionSpec DistributionSpec::normal(double mean, double variance) {
    return DistributionSpec(Normal{mean, variance});
}
DistributionSpec DistributionSpec::exponential(double rate) { return DistributionSpec(Exponential{rate}); }
DistributionSpec DistributionSpec::cauchy_like(double mu, double a, double alpha) {
    return DistributionSpec(CauchyLike{mu, a, alpha});
}
DistributionSpec DistributionSpec::discrete_power_law(double epsilon) {
    return DistributionSpec(DiscretePowerLaw{epsilon});
}
DistributionSpec DistributionSpec::symmetric_stable(double exponent) {
    return DistributionSpec(SymmetricStable{exponent});
}
DistributionSpec DistributionSpec::empirical(std::vector<double> values) {
    return DistributionSpec(Empirical{std::move(values)});
}

Family DistributionSpec::family() const noexcept {
    return static_cast<Family>(state_->params.index());
}

const DistributionParams& DistributionSpec::params() const noexcept { return state_->params; }

double DistributionSpec::normalizing_constant() const noexcept { return state_->norm; }

bool operator==(const DistributionSpec& a, const DistributionSpec& b) {
    if (a.state_ == b.state_) return true;
    return std::visit(
        [&](const auto& lhs) {
            using T = std::decay_t<decltype(lhs)>;
            const auto* rhs = std::get_if<T>(&b.params());
            if (!rhs) return false;
            if constexpr (std::is_same_v<T, PointMass>) return lhs.value == rhs->value;
            else if constexpr (std::is_same_v<T, Normal>)
                return lhs.mean == rhs->mean && lhs.variance == rhs->variance;
            else if constexpr (std::is_same_v<T, Exponential>) return lhs.rate == rhs->rate;
            else if constexpr (std::is_same_v<T, CauchyLike>)
                return lhs.mu == rhs->mu && lhs.a == rhs->a && lhs.alpha == rhs->alpha;
            else if constexpr (std::is_same_v<T, DiscretePowerLaw>) return lhs.epsilon == rhs->epsilon;
            else if constexpr (std::is_same_v<T, SymmetricStable>) return lhs.exponent == rhs->exponent;
            else return lhs.values == rhs->values;
        },
        a.params());
}

// Sampling --------------------------------------------------------------------

namespace {

// Devroye's rejection sampler for the zeta law P(K = k) ~ k^-p, k >= 1.
double zeta_variate(double p, RandomStream& rng) {
    const double b = std::pow(2.0, p - 1.0);
    for (;;) {
        const double u = rng.uniform_open();
        const double v = rng.uniform();
        const double x = std::floor(std::pow(u, -1.0 / (p - 1.0)));
        const double t = std::pow(1.0 + 1.0 / x, p - 1.0);
        if (v * x * (t - 1.0) / (b - 1.0) <= t / b) return x;
    }
}

// Chambers-Mallows-Stuck, symmetric case, unit scale.
double stable_variate(double alpha, RandomStream& rng) {
    const double v = kPi * (rng.uniform_open() - 0.5);
    const double w = rng.standard_exponential();
    if (alpha == 2.0) return 2.0 * std::sin(v) * std::sqrt(w);
    return std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha) *
           std::pow(std::cos(v - alpha * v) / w, (1.0 - alpha) / alpha);
}

template <typename Draw>
double sum_of(std::uint64_t count, Draw&& draw) {
    double s = 0.0;
    for (std::uint64_t i = 0; i < count; ++i) s += draw();
    return s;
}

}  // namespace

double sample_sum(const DistributionSpec& spec, std::uint64_t count, RandomStream& rng) {
    const auto& st = spec.state();
    return std::visit(
        overloaded{
            [&](const PointMass& d) { return sum_of(count, [&] { return d.value; }); },
            [&](const Normal& d) {
                const double sd = std::sqrt(d.variance);
                return sum_of(count, [&] { return d.mean + sd * rng.standard_normal(); });
            },
            [&](const Exponential& d) {
                return sum_of(count, [&] { return rng.standard_exponential() / d.rate; });
            },
            [&](const CauchyLike& d) {
                const double shape = 1.0 / d.alpha;
                return sum_of(count, [&] {
                    const double g1 = rng.gamma(shape);
                    const double g2 = rng.gamma(shape);
                    const double r = std::pow(g1 / (d.a * g2), shape);
                    return rng.coin() ? d.mu + r : d.mu - r;
                });
            },
            [&](const DiscretePowerLaw&) {
                return sum_of(count, [&] {
                    const double k = zeta_variate(st.exponent_p, rng);
                    return rng.coin() ? k : -k;
                });
            },
            [&](const SymmetricStable& d) {
                return sum_of(count, [&] { return stable_variate(d.exponent, rng); });
            },
            [&](const Empirical& d) {
                return sum_of(count, [&] { return d.values[rng.index(d.values.size())]; });
            },
        },
        st.params);
}

double sample_one(const DistributionSpec& spec, RandomStream& stream) {
    return sample_sum(spec, 1, stream);
}

std::vector<double> sample(const DistributionSpec& spec, std::size_t count, RandomStream& stream) {
    std::vector<double> out(count);
    for (auto& v : out) v = sample_one(spec, stream);
    return out;
}

// Characteristic functions ------------------------------------------------------

double cauchy_like_one_minus_cf_quadrature(const DistributionSpec& spec, double s) {
    const auto* d = std::get_if<CauchyLike>(&spec.params());
    if (!d) throw InvalidSpec("cauchy_like quadrature requested for another family");
    const double w = std::abs(s);
    if (w == 0.0) return 0.0;
    // Integration by parts: 1 - phi(w) = 2 w * int_0^inf sin(w x) P(X - mu > x) dx.
    const CauchyLike centred{0.0, d->a, d->alpha};
    auto tail = [&](double x) { return cauchy_like_upper(centred, x); };
    const auto r = sine_transform(tail, w, 1e-13);
    const double scale = std::max(std::abs(r.value), 1e-300);
    if (!(r.error <= 1e-9 * scale))
        throw NumericFailure("cauchy_like: characteristic-function quadrature did not converge",
                             r.error / scale);
    return 2.0 * w * r.value;
}

std::complex<double> analytic_cf(const DistributionSpec& spec, double s) {
    if (s == 0.0) return {1.0, 0.0};
    const auto& st = spec.state();
    return std::visit(
        overloaded{
            [&](const PointMass& d) { return std::polar(1.0, d.value * s); },
            [&](const Normal& d) { return std::polar(std::exp(-0.5 * d.variance * s * s), d.mean * s); },
            [&](const Exponential& d) {
                return std::complex<double>(1.0, 0.0) / std::complex<double>(1.0, -s / d.rate);
            },
            [&](const CauchyLike& d) {
                return std::polar(1.0, d.mu * s) * (1.0 - cauchy_like_one_minus_cf(spec, s));
            },
            [&](const DiscretePowerLaw&) {
                return std::complex<double>(1.0 - power_law_one_minus_cf(st, s), 0.0);
            },
            [&](const SymmetricStable& d) {
                return std::complex<double>(std::exp(-std::pow(std::abs(s), d.exponent)), 0.0);
            },
            [&](const Empirical& d) {
                const auto n = d.values.size();
                const double re = pairwise_sum(0, n, [&](std::size_t i) { return std::cos(s * d.values[i]); });
                const double im = pairwise_sum(0, n, [&](std::size_t i) { return std::sin(s * d.values[i]); });
                return std::complex<double>(re / n, im / n);
            },
        },
        st.params);
}

std::complex<double> log_cf(const DistributionSpec& spec, double s) {
    if (s == 0.0) return {0.0, 0.0};
    const auto& st = spec.state();
    return std::visit(
        overloaded{
            [&](const PointMass& d) { return std::complex<double>(0.0, d.value * s); },
            [&](const Normal& d) { return std::complex<double>(-0.5 * d.variance * s * s, d.mean * s); },
            [&](const Exponential& d) {
                const double t = s / d.rate;
                return std::complex<double>(-0.5 * std::log1p(t * t), std::atan(t));
            },
            [&](const CauchyLike& d) {
                return log_from_deficit(cauchy_like_one_minus_cf(spec, s)) +
                       std::complex<double>(0.0, d.mu * s);
            },
            [&](const DiscretePowerLaw&) { return log_from_deficit(power_law_one_minus_cf(st, s)); },
            [&](const SymmetricStable& d) {
                return std::complex<double>(-std::pow(std::abs(s), d.exponent), 0.0);
            },
            [&](const Empirical& d) {
                const auto n = d.values.size();
                // 1 - cos(sx) = 2 sin^2(sx/2) keeps the deficit accurate near s = 0.
                const double re = pairwise_sum(0, n, [&](std::size_t i) {
                    const double h = std::sin(0.5 * s * d.values[i]);
                    return 2.0 * h * h;
                });
                const double im = pairwise_sum(0, n, [&](std::size_t i) { return std::sin(s * d.values[i]); });
                const std::complex<double> z(-re / n, im / n);  // phi - 1
                if (std::abs(z) < 0.5) return complex_log1p(z);
                const std::complex<double> phi = 1.0 + z;
                if (phi == 0.0) return std::complex<double>(-kInf, 0.0);
                return std::log(phi);
            },
        },
        st.params);
}

// Moments and tails -------------------------------------------------------------

MomentSummary moments(const DistributionSpec& spec) {
    const auto& st = spec.state();
    MomentSummary m;
    m.max_moment_order = kInf;
    std::visit(
        overloaded{
            [&](const PointMass& d) { m.mean = d.value; },
            [&](const Normal& d) {
                m.mean = d.mean;
                m.variance = d.variance;
            },
            [&](const Exponential& d) {
                m.mean = 1.0 / d.rate;
                m.variance = 1.0 / (d.rate * d.rate);
            },
            [&](const CauchyLike& d) {
                m.mean = d.mu;
                m.mean_defined = false;
                m.variance = kInf;
                m.variance_infinite = true;
                m.max_moment_order = 1.0;
            },
            [&](const DiscretePowerLaw& d) {
                m.mean = 0.0;
                m.max_moment_order = 1.0 + d.epsilon;
                if (d.epsilon > 1.0) {
                    m.variance = 2.0 * st.norm * boost::math::zeta(d.epsilon);
                } else {
                    m.variance = kInf;
                    m.variance_infinite = true;
                }
            },
            [&](const SymmetricStable& d) {
                m.mean = 0.0;
                if (d.exponent == 2.0) {
                    m.variance = 2.0;
                } else {
                    m.variance = kInf;
                    m.variance_infinite = true;
                    m.max_moment_order = d.exponent;
                }
            },
            [&](const Empirical& d) {
                const auto n = d.values.size();
                m.mean = pairwise_sum(d.values) / n;
                m.variance = pairwise_sum(0, n, [&](std::size_t i) {
                                 const double c = d.values[i] - m.mean;
                                 return c * c;
                             }) / n;
            },
        },
        st.params);
    return m;
}

double zeta_tail(double p, std::uint64_t first) {
    if (first < 1) throw DomainError("zeta_tail: first index must be >= 1");
    if (!(p > 1.0)) throw DomainError("zeta_tail: exponent must be > 1");
    // Direct terms, then Euler-Maclaurin from K = first + 64 onwards.
    double sum = 0.0;
    const std::uint64_t k_em = first + 64;
    for (std::uint64_t k = first; k < k_em; ++k) sum += std::pow(static_cast<double>(k), -p);
    const double K = static_cast<double>(k_em);
    const double fK = std::pow(K, -p);
    double em = K * fK / (p - 1.0) + 0.5 * fK;
    em += p * fK / K / 12.0;
    em -= p * (p + 1.0) * (p + 2.0) * fK / (K * K * K) / 720.0;
    em += p * (p + 1.0) * (p + 2.0) * (p + 3.0) * (p + 4.0) * fK / std::pow(K, 5) / 30240.0;
    return sum + em;
}

TailMass tail_mass(const DistributionSpec& spec, double x) {
    if (!(x > 0.0)) throw DomainError("tail_mass: x must be > 0");
    const auto& st = spec.state();
    return std::visit(
        overloaded{
            [&](const PointMass& d) {
                return TailMass{d.value <= -x ? 1.0 : 0.0, d.value >= x ? 1.0 : 0.0};
            },
            [&](const Normal& d) {
                if (d.variance == 0.0)
                    return TailMass{d.mean <= -x ? 1.0 : 0.0, d.mean >= x ? 1.0 : 0.0};
                const double sd = std::sqrt(d.variance);
                return TailMass{normal_cdf_upper((x + d.mean) / sd), normal_cdf_upper((x - d.mean) / sd)};
            },
            [&](const Exponential& d) { return TailMass{0.0, std::exp(-d.rate * x)}; },
            [&](const CauchyLike& d) {
                return TailMass{cauchy_like_upper(d, x + d.mu), cauchy_like_upper(d, x - d.mu)};
            },
            [&](const DiscretePowerLaw&) {
                const double first = std::ceil(x);
                const double t = (first >= 9.0e15) ? 0.0
                                                   : st.norm * zeta_tail(st.exponent_p,
                                                                         static_cast<std::uint64_t>(first));
                return TailMass{t, t};
            },
            [&](const SymmetricStable& d) {
                const double t = stable_upper_tail(d.exponent, x);
                return TailMass{t, t};
            },
            [&](const Empirical& d) {
                return TailMass{empirical_fraction(d.values, [x](double v) { return v <= -x; }),
                                empirical_fraction(d.values, [x](double v) { return v >= x; })};
            },
        },
        st.params);
}

double cauchy_tail_constant(const DistributionSpec& spec) {
    const auto* d = std::get_if<CauchyLike>(&spec.params());
    if (!d) throw InvalidSpec("cauchy_tail_constant: not a cauchy_like law");
    return spec.normalizing_constant() * std::pow(d->a, -2.0 / d->alpha);
}

}  // namespace qso
