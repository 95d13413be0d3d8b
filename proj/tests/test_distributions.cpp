#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "oracles.hpp"
#include "qso/analysis.hpp"
#include "qso/cf_engine.hpp"
#include "qso/distributions.hpp"
#include "qso/errors.hpp"

using namespace qso;
using cplx = std::complex<double>;

namespace {

std::vector<DistributionSpec> all_families() {
    return {DistributionSpec::point_mass(0.7),
            DistributionSpec::normal(0.3, 2.0),
            DistributionSpec::exponential(1.5),
            DistributionSpec::cauchy_like(0.5, 2.0, 1.0),
            DistributionSpec::cauchy_like(0.0, 1.0, 2.0),
            DistributionSpec::cauchy_like(-1.0, 2.0, 3.0),
            DistributionSpec::discrete_power_law(0.5),
            DistributionSpec::discrete_power_law(1.0),
            DistributionSpec::discrete_power_law(1.5),
            DistributionSpec::symmetric_stable(1.5),
            DistributionSpec::symmetric_stable(2.0),
            DistributionSpec::empirical({-1.0, 0.5, 2.0, 2.0})};
}

const std::vector<double> kStandardGrid = symmetric_grid(0.1, 200);  // |s| <= 20, 401 points

}  // namespace

TEST_CASE("sample: point mass is degenerate") {
    RandomStream r(1, 0);
    CHECK(sample(DistributionSpec::point_mass(3.0), 4, r) == std::vector<double>{3, 3, 3, 3});
}

TEST_CASE("sample: normal mean and variance") {
    RandomStream r(2, 0);
    const auto x = sample(DistributionSpec::normal(0.0, 1.0), 100000, r);
    const auto m = summarize(x);
    CHECK(std::abs(m.mean) < 4.0 / std::sqrt(1e5));
    CHECK(std::abs(m.variance - 1.0) < 5e-2);
}

TEST_CASE("sample: discrete power law support and mass at one") {
    RandomStream r(3, 0);
    const auto x = sample(DistributionSpec::discrete_power_law(1.0), 100000, r);
    std::size_t ones = 0;
    for (double v : x) {
        REQUIRE(v == std::round(v));
        REQUIRE(v != 0.0);
        ones += std::abs(v) == 1.0;
    }
    const double p1 = 1.0 / oracle::zeta_partial(3.0, 1000000);  // 2C
    CHECK(p1 == doctest::Approx(0.8319).epsilon(1e-4));
    CHECK(std::abs(static_cast<double>(ones) / 1e5 - p1) < 0.01);
}

TEST_CASE("sample: reproducible from the stream") {
    for (const auto& d : all_families()) {
        RandomStream a(9, 4);
        RandomStream b(9, 4);
        CHECK(sample(d, 50, a) == sample(d, 50, b));
    }
}

TEST_CASE("analytic_cf: closed forms") {
    const double s = 0.7;
    const auto n = analytic_cf(DistributionSpec::normal(1.5, 0.8), s);
    CHECK(std::abs(n - std::exp(cplx(-0.4 * s * s, 1.5 * s))) < 1e-15);
    CHECK(std::abs(analytic_cf(DistributionSpec::point_mass(-2.0), s) - std::exp(cplx(0, -2.0 * s))) < 1e-15);
    CHECK(analytic_cf(DistributionSpec::symmetric_stable(1.5), 1.0).real() == doctest::Approx(0.367879).epsilon(1e-6));
    CHECK(std::abs(analytic_cf(DistributionSpec::symmetric_stable(1.5), 1.0) - std::exp(-1.0)) < 1e-15);
    const auto e = analytic_cf(DistributionSpec::exponential(2.0), s);
    CHECK(std::abs(e - 1.0 / cplx(1.0, -s / 2.0)) < 1e-15);
}

TEST_CASE("analytic_cf: exponent-2 stable equals Normal(0, 2)") {
    for (double s : kStandardGrid)
        CHECK(std::abs(analytic_cf(DistributionSpec::symmetric_stable(2.0), s) -
                       analytic_cf(DistributionSpec::normal(0.0, 2.0), s)) < 1e-15);
}

TEST_CASE("analytic_cf: modulus, value at zero, conjugate symmetry on the standard grid") {
    for (const auto& d : all_families()) {
        CAPTURE(family_name(d.family()));
        CHECK(analytic_cf(d, 0.0) == cplx(1.0, 0.0));
        for (double s : kStandardGrid) {
            const auto v = analytic_cf(d, s);
            CHECK(std::abs(v) <= 1.0 + 1e-12);
            CHECK(std::abs(analytic_cf(d, -s) - std::conj(v)) <= 1e-12);
        }
    }
}

TEST_CASE("log_cf agrees with analytic_cf") {
    for (const auto& d : all_families()) {
        CAPTURE(family_name(d.family()));
        CHECK(log_cf(d, 0.0) == cplx(0.0, 0.0));
        for (double s : kStandardGrid) {
            const auto v = analytic_cf(d, s);
            if (std::abs(v) < 1e-250) continue;
            CHECK(std::abs(std::exp(log_cf(d, s)) - v) < 1e-13);
        }
    }
}

TEST_CASE("log_cf keeps relative accuracy near zero") {
    // 1 - phi for the power law is c |s|^(1+eps) + O(s^2); the s^2 term
    // shifts the ratio by about 1e-3 relative at these points.
    const auto d = DistributionSpec::discrete_power_law(0.5);
    const double l1 = -log_cf(d, 1e-6).real();
    const double l2 = -log_cf(d, 1e-8).real();
    CHECK(l1 > 0.0);
    CHECK(l1 / l2 == doctest::Approx(std::pow(100.0, 1.5)).epsilon(2e-3));
    const auto n = DistributionSpec::normal(0.0, 0.5);
    CHECK(log_cf(n, 1e-9).real() == doctest::Approx(-0.25e-18).epsilon(1e-15));
}

TEST_CASE("empirical CF of samples matches analytic_cf within 5/sqrt(n)") {
    const std::vector<DistributionSpec> families = {
        DistributionSpec::point_mass(0.7),         DistributionSpec::normal(0.3, 2.0),
        DistributionSpec::exponential(1.5),        DistributionSpec::cauchy_like(0.5, 2.0, 1.0),
        DistributionSpec::discrete_power_law(0.5), DistributionSpec::symmetric_stable(1.5),
        DistributionSpec::empirical({-1.0, 0.5, 2.0, 2.0})};
    const std::size_t n = 100000;
    for (std::size_t f = 0; f < families.size(); ++f) {
        CAPTURE(family_name(families[f].family()));
        RandomStream r(100 + f, 0);
        const auto x = sample(families[f], n, r);
        const auto emp = empirical_cf(x, kStandardGrid);
        double sup = 0.0;
        for (std::size_t i = 0; i < kStandardGrid.size(); ++i)
            sup = std::max(sup, std::abs(emp.values[i] - analytic_cf(families[f], kStandardGrid[i])));
        CHECK(sup < 5.0 / std::sqrt(static_cast<double>(n)));
    }
}

TEST_CASE("moments: documented values") {
    const auto e = moments(DistributionSpec::exponential(1.0));
    CHECK(e.mean == 1.0);
    CHECK(e.variance == 1.0);
    const auto g = moments(DistributionSpec::normal(0.0, 0.5));
    CHECK(g.mean == 0.0);
    CHECK(g.variance == 0.5);
    const auto p = moments(DistributionSpec::discrete_power_law(0.5));
    CHECK(p.mean == 0.0);
    CHECK(p.variance_infinite);
    CHECK_FALSE(moments(DistributionSpec::discrete_power_law(1.5)).variance_infinite);
    CHECK(moments(DistributionSpec::discrete_power_law(1.5)).max_moment_order == 2.5);
    CHECK(moments(DistributionSpec::cauchy_like(0, 1, 2)).variance_infinite);
    CHECK_FALSE(moments(DistributionSpec::cauchy_like(0, 1, 2)).mean_defined);
    CHECK(moments(DistributionSpec::symmetric_stable(2.0)).variance == 2.0);
    CHECK(moments(DistributionSpec::symmetric_stable(1.2)).variance_infinite);
    const auto emp = moments(DistributionSpec::empirical({1.0, 2.0, 3.0}));
    CHECK(emp.mean == 2.0);
    CHECK(emp.variance == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("moments: power-law variance diverges by partial sums") {
    // sum_{k<=M} k^2 k^-2.5 grows like 2 sqrt(M).
    const double a = oracle::zeta_partial(0.5, 10000);
    const double b = oracle::zeta_partial(0.5, 40000);
    CHECK(b / a == doctest::Approx(2.0).epsilon(0.02));
    const double v = moments(DistributionSpec::discrete_power_law(1.5)).variance;
    CHECK(v == doctest::Approx(oracle::zeta_partial(1.5, 1000000) / oracle::zeta_partial(3.5, 1000000)).epsilon(2e-3));
}

TEST_CASE("moments agree with samples for finite-variance families") {
    const std::vector<DistributionSpec> families = {
        DistributionSpec::normal(0.3, 2.0), DistributionSpec::exponential(1.5), DistributionSpec::symmetric_stable(2.0),
        DistributionSpec::empirical({-1.0, 0.5, 2.0, 2.0}), DistributionSpec::discrete_power_law(1.5)};
    const std::size_t n = 100000;
    for (std::size_t f = 0; f < families.size(); ++f) {
        CAPTURE(family_name(families[f].family()));
        RandomStream r(200 + f, 0);
        const auto x = sample(families[f], n, r);
        const auto s = summarize(x);
        const auto m = moments(families[f]);
        CHECK(std::abs(s.mean - m.mean) < 5.0 * std::sqrt(m.variance / n));
        // The power law has no fourth moment; its sample variance is not
        // CLT-controlled.
        if (families[f].family() != Family::discrete_power_law) CHECK(std::abs(s.variance / m.variance - 1.0) < 0.05);
    }
}

TEST_CASE("tail_mass: documented values") {
    const auto n = tail_mass(DistributionSpec::normal(0.0, 1.0), 1e-12);
    CHECK(n.left == doctest::Approx(0.5).epsilon(1e-11));
    CHECK(n.right == doctest::Approx(0.5).epsilon(1e-11));
    const auto p = tail_mass(DistributionSpec::discrete_power_law(1.0), 1.5);
    const double z3 = oracle::zeta_partial(3.0, 1000000);
    CHECK(p.right == doctest::Approx((z3 - 1.0) / (2.0 * z3)).epsilon(1e-10));
    CHECK(p.right == doctest::Approx(0.0840463137096).epsilon(1e-11));
    CHECK(p.left == p.right);
    const auto pm = tail_mass(DistributionSpec::point_mass(0.0), 1.0);
    CHECK(pm.left == 0.0);
    CHECK(pm.right == 0.0);
    CHECK_THROWS_AS(tail_mass(DistributionSpec::normal(0, 1), 0.0), DomainError);
}

TEST_CASE("tail_mass: stable and Cauchy-like reference values") {
    const auto s = DistributionSpec::symmetric_stable(1.5);
    CHECK(tail_mass(s, 1.0).right == doctest::Approx(0.243657975600729).epsilon(1e-12));
    CHECK(tail_mass(s, 100.0).right == doctest::Approx(0.000199789886371).epsilon(1e-8));
    // Standard Cauchy: P(X > x) = 1/2 - atan(x)/pi.
    const auto c = DistributionSpec::cauchy_like(0.0, 1.0, 2.0);
    for (double x : {0.1, 1.0, 7.0, 1e4})
        CHECK(tail_mass(c, x).right == doctest::Approx(0.5 - std::atan(x) / std::numbers::pi).epsilon(1e-12));
}

TEST_CASE("tail_mass: symmetric families stay within [0, 1/2]") {
    for (const auto& d : all_families()) {
        if (d.family() == Family::exponential || d.family() == Family::empirical || d.family() == Family::point_mass) continue;
        if (d.family() == Family::normal) continue;
        if (d.family() == Family::cauchy_like && std::get<CauchyLike>(d.params()).mu != 0.0) continue;
        for (double x : {0.01, 0.5, 1.0, 3.0, 100.0}) {
            const auto t = tail_mass(d, x);
            CHECK(t.right >= 0.0);
            CHECK(t.right <= 0.5 + 1e-15);
            CHECK(t.left == doctest::Approx(t.right).epsilon(1e-12));
        }
    }
}

TEST_CASE("power law satisfies the power-tail hypothesis with the constant fitted at x = 1") {
    for (double eps : {0.25, 0.5, 0.9}) {
        const auto d = DistributionSpec::discrete_power_law(eps);
        const double c_fit = tail_mass(d, 1.0).right;
        for (double lx = 0.0; lx <= 3.0; lx += 0.01) {
            const double x = std::pow(10.0, lx);
            CHECK(tail_mass(d, x).right <= c_fit * std::pow(x, -(1.0 + eps)) * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("power law normalization matches partial zeta sums") {
    for (double eps : {0.5, 1.0, 1.5}) {
        const double c = DistributionSpec::discrete_power_law(eps).normalizing_constant();
        CHECK(c == doctest::Approx(1.0 / (2.0 * oracle::zeta_partial(2.0 + eps, 1000000))).epsilon(1e-6));
    }
    CHECK(zeta_tail(3.0, 2) == doctest::Approx(oracle::zeta_partial(3.0, 1000000) - 1.0).epsilon(1e-10));
    CHECK(zeta_tail(2.5, 10) ==
          doctest::Approx(oracle::zeta_partial(2.5, 2000000) - oracle::zeta_partial(2.5, 9)).epsilon(1e-6));
}

TEST_CASE("power law CF matches a direct cosine sum and frozen references") {
    for (double eps : {0.5, 1.0, 1.5})
        for (double s : {0.1, 1.0, 2.5, -3.0}) {
            CAPTURE(eps);
            CAPTURE(s);
            const double direct = oracle::power_law_cf_direct(eps, s, 1000000);
            CHECK(analytic_cf(DistributionSpec::discrete_power_law(eps), s).real() ==
                  doctest::Approx(direct).epsilon(1e-8));
        }
    CHECK(analytic_cf(DistributionSpec::discrete_power_law(0.5), 1.0).real() ==
          doctest::Approx(0.297811905719441).epsilon(1e-13));
    // Periodic in s with period 2 pi.
    const auto d = DistributionSpec::discrete_power_law(0.7);
    CHECK(std::abs(analytic_cf(d, 0.3) - analytic_cf(d, 0.3 + 2 * std::numbers::pi)) < 1e-13);
}

TEST_CASE("Cauchy-like normalization matches quadrature of the density") {
    for (auto [a, alpha] : std::vector<std::pair<double, double>>{{1, 2}, {2, 3}, {0.5, 1}, {3, 0.7}}) {
        const double c = DistributionSpec::cauchy_like(0.0, a, alpha).normalizing_constant();
        CHECK(c == doctest::Approx(1.0 / (2.0 * oracle::cauchy_like_half_mass(a, alpha))).epsilon(1e-10));
    }
    CHECK(DistributionSpec::cauchy_like(0.0, 2.0, 3.0).normalizing_constant() ==
          doctest::Approx(0.35658706390632993).epsilon(1e-13));
}

TEST_CASE("Cauchy-like CF: alpha = 2 closed form agrees with the quadrature path") {
    for (double a : {1.0, 4.0})
        for (double s : {1e-6, 1e-3, 0.1, 1.0, 5.0, 20.0}) {
            const auto d = DistributionSpec::cauchy_like(0.0, a, 2.0);
            const double q = cauchy_like_one_minus_cf_quadrature(d, s);
            const double exact = -std::expm1(-s / std::sqrt(a));
            CHECK(q == doctest::Approx(exact).epsilon(1e-10));
        }
    CHECK(std::abs(analytic_cf(DistributionSpec::cauchy_like(0, 1, 2), 1.3) - std::exp(-1.3)) < 1e-15);
}

TEST_CASE("Cauchy-like CF: frozen high-precision references") {
    const auto d1 = DistributionSpec::cauchy_like(0.0, 1.0, 1.0);
    CHECK(analytic_cf(d1, 0.1).real() == doctest::Approx(0.87089952716908987).epsilon(1e-12));
    CHECK(analytic_cf(d1, 1.0).real() == doctest::Approx(0.37855037576418664).epsilon(1e-12));
    CHECK(analytic_cf(d1, 5.0).real() == doctest::Approx(0.059286127142908881).epsilon(1e-11));
    const auto d3 = DistributionSpec::cauchy_like(0.0, 2.0, 3.0);
    CHECK(analytic_cf(d3, 0.5).real() == doctest::Approx(0.69073517419888665).epsilon(1e-12));
    CHECK(analytic_cf(d3, 2.0).real() == doctest::Approx(0.18274376084059882).epsilon(1e-12));
    // Location enters as a phase.
    const auto shifted = DistributionSpec::cauchy_like(0.5, 2.0, 3.0);
    CHECK(std::abs(analytic_cf(shifted, 2.0) - analytic_cf(d3, 2.0) * std::exp(cplx(0, 1.0))) < 1e-14);
}

TEST_CASE("Cauchy-like tail constant") {
    CHECK(cauchy_tail_constant(DistributionSpec::cauchy_like(0, 1, 2)) == doctest::Approx(1.0 / std::numbers::pi));
    for (auto [a, alpha] : std::vector<std::pair<double, double>>{{1, 1}, {2, 3}, {0.5, 0.7}}) {
        const auto d = DistributionSpec::cauchy_like(0.0, a, alpha);
        // Relative correction is O(x^-alpha).
        const double x = 1e7;
        CHECK(x * tail_mass(d, x).right == doctest::Approx(cauchy_tail_constant(d)).epsilon(1e-4));
    }
}

TEST_CASE("invalid parameters are rejected") {
    CHECK_THROWS_AS(DistributionSpec::empirical({}), InvalidSpec);
    CHECK_THROWS_AS(DistributionSpec::normal(0, -1), InvalidSpec);
    CHECK_THROWS_AS(DistributionSpec::exponential(0), InvalidSpec);
    CHECK_THROWS_AS(DistributionSpec::cauchy_like(0, 0, 1), InvalidSpec);
    CHECK_THROWS_AS(DistributionSpec::cauchy_like(0, 1, -1), InvalidSpec);
    CHECK_THROWS_AS(DistributionSpec::discrete_power_law(0), InvalidSpec);
    CHECK_THROWS_AS(DistributionSpec::symmetric_stable(1.0), InvalidSpec);
    CHECK_THROWS_AS(DistributionSpec::symmetric_stable(2.5), InvalidSpec);
    CHECK_THROWS_AS(DistributionSpec::normal(std::nan(""), 1), InvalidSpec);
    CHECK_THROWS_AS(DistributionSpec::empirical({1.0, INFINITY}), InvalidSpec);
}

TEST_CASE("specs compare by value") {
    CHECK(DistributionSpec::normal(0, 1) == DistributionSpec::normal(0, 1));
    CHECK_FALSE(DistributionSpec::normal(0, 1) == DistributionSpec::normal(0, 2));
    CHECK_FALSE(DistributionSpec::normal(0, 1) == DistributionSpec::symmetric_stable(2));
    CHECK(family_name(DistributionSpec::discrete_power_law(1).family()) == "discrete_power_law");
}
