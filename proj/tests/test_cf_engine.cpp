#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "oracles.hpp"
#include "qso/cf_engine.hpp"
#include "qso/errors.hpp"

using namespace qso;
using cplx = std::complex<double>;

namespace {

struct Pair {
    DistributionSpec seed;
    DistributionSpec kernel;
};

// Seeds with finite mean against symmetric kernels of every tail type.
std::vector<Pair> test_matrix() {
    return {{DistributionSpec::normal(0.3, 1.0), DistributionSpec::normal(0.0, 0.5)},
            {DistributionSpec::exponential(1.0), DistributionSpec::symmetric_stable(1.5)},
            {DistributionSpec::point_mass(-2.0), DistributionSpec::discrete_power_law(0.5)},
            {DistributionSpec::empirical({-1.0, 0.5, 2.0, 2.0}), DistributionSpec::cauchy_like(0.0, 1.0, 1.0)}};
}

double mean_of(const DistributionSpec& d) { return moments(d).mean; }

CFGrid grid_from(std::span<const double> pts, auto f) {
    CFGrid g;
    g.points.assign(pts.begin(), pts.end());
    for (double s : pts) g.values.push_back(f(s));
    g.flags.assign(pts.size(), kCfClean);
    return g;
}

}  // namespace

TEST_CASE("symmetric_grid layout") {
    const auto g = symmetric_grid(0.05, 200);
    REQUIRE(g.size() == 401);
    CHECK(g.front() == -10.0);
    CHECK(g[200] == 0.0);
    CHECK(g.back() == 10.0);
    CHECK(std::is_sorted(g.begin(), g.end()));
}

TEST_CASE("iterate_cf: degenerate laws give a pure phase") {
    const auto pts = symmetric_grid(0.1, 100);
    for (int n : {0, 1, 7, 30}) {
        const auto g = iterate_cf({DistributionSpec::point_mass(1.25), DistributionSpec::point_mass(0.0), n}, pts);
        for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(g.values[i] - std::exp(cplx(0, 1.25 * pts[i]))) < 1e-14);
    }
}

TEST_CASE("iterate_cf: normal pair matches the summed geometric series") {
    const auto pts = symmetric_grid(0.05, 200);
    for (int n : {0, 1, 5, 12, 40}) {
        const auto g = iterate_cf({DistributionSpec::normal(0.7, 1.3), DistributionSpec::normal(0.0, 0.5), n}, pts);
        for (std::size_t i = 0; i < g.size(); ++i) {
            const auto ref = oracle::normal_pair_cf(0.7, 1.3, 0.5, n, pts[i]);
            CHECK(std::abs(g.values[i] - ref) <= 1e-13 * std::max(1.0, std::abs(ref)) + 1e-300);
        }
    }
}

TEST_CASE("iterate_cf: exponential seed, normal kernel, one step") {
    const std::vector<double> pts{1.0};
    const auto g = iterate_cf({DistributionSpec::exponential(1.0), DistributionSpec::normal(0.0, 0.5), 1}, pts);
    const cplx half = 1.0 / cplx(1.0, -0.5);
    CHECK(std::abs(g.values[0] - half * half * std::exp(-0.25)) < 1e-15);
}

TEST_CASE("iterate_cf: n = 0 is the seed CF") {
    const auto pts = symmetric_grid(0.1, 100);
    for (const auto& p : test_matrix()) {
        const auto g = iterate_cf({p.seed, p.kernel, 0}, pts);
        for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(g.values[i] - analytic_cf(p.seed, pts[i])) < 1e-14);
    }
}

TEST_CASE("iterate_cf: product of factors agrees with repeated squaring") {
    // Direct product of analytic_cf factors; valid while the powers stay small.
    const auto p = test_matrix()[1];
    const std::vector<double> pts{-2.0, -0.3, 0.7, 1.9};
    for (int n : {1, 2, 4, 6}) {
        const auto g = iterate_cf({p.seed, p.kernel, n}, pts);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const double s = pts[i];
            cplx ref = oracle::pow2j(analytic_cf(p.seed, std::ldexp(s, -n)), n);
            for (int j = 0; j < n; ++j) ref *= oracle::pow2j(analytic_cf(p.kernel, std::ldexp(s, -j)), j);
            CHECK(std::abs(g.values[i] - ref) < 1e-12);
        }
    }
}

TEST_CASE("iterate_cf: induction step holds to 1e-10 relative") {
    const auto pts = symmetric_grid(0.1, 100);
    std::vector<double> halves;
    for (double s : pts) halves.push_back(s / 2.0);
    for (const auto& p : test_matrix()) {
        CAPTURE(family_name(p.kernel.family()));
        auto prev = iterate_cf({p.seed, p.kernel, 0}, halves);
        for (int n = 0; n <= 12; ++n) {
            const auto next = iterate_cf({p.seed, p.kernel, n + 1}, pts);
            for (std::size_t i = 0; i < pts.size(); ++i) {
                const cplx rhs = prev.values[i] * prev.values[i] * analytic_cf(p.kernel, pts[i]);
                if (std::abs(rhs) < 1e-250) continue;
                CHECK(std::abs(next.values[i] - rhs) / std::abs(rhs) < 1e-10);
            }
            prev = iterate_cf({p.seed, p.kernel, n + 1}, halves);
        }
    }
}

TEST_CASE("iterate_cf: grid invariants") {
    const auto pts = symmetric_grid(0.1, 200);
    for (const auto& p : test_matrix())
        for (int n : {0, 3, 12}) {
            const auto g = iterate_cf({p.seed, p.kernel, n}, pts);
            REQUIRE(g.values.size() == pts.size());
            REQUIRE(g.flags.size() == pts.size());
            CHECK(std::abs(g.values[200] - 1.0) < 1e-12);
            for (const auto& v : g.values) CHECK(std::abs(v) <= 1.0 + 1e-9);
        }
}

TEST_CASE("iterate_cf: the mean is retained") {
    const double h = 1e-4;
    const std::vector<double> pts{-h, h};
    for (const auto& p : test_matrix()) {
        const double m = mean_of(p.seed);
        for (int n = 0; n <= 12; ++n) {
            const auto g = iterate_cf({p.seed, p.kernel, n}, pts);
            const double slope = (std::arg(g.values[1]) - std::arg(g.values[0])) / (2.0 * h);
            CHECK(std::abs(slope - m) < 1e-6);
        }
    }
}

TEST_CASE("iterate_cf: variance recursion") {
    const double h = 1e-4;
    const std::vector<double> pts{-h, h};
    const DistributionSpec kernel = DistributionSpec::normal(0.0, 0.5);
    for (const auto& seed : {DistributionSpec::normal(0.3, 1.0), DistributionSpec::exponential(1.0),
                             DistributionSpec::empirical({-1.0, 0.5, 2.0, 2.0})}) {
        const double vF = moments(seed).variance;
        for (int n = 0; n <= 12; ++n) {
            const auto g = iterate_cf({seed, kernel, n}, pts);
            // Re Log phi(s) = -v s^2 / 2 + O(s^4).
            const double second = (std::log(std::abs(g.values[0])) + std::log(std::abs(g.values[1]))) / (h * h);
            const double expected = vF * std::ldexp(1.0, -n) + 2.0 * 0.5 * (1.0 - std::ldexp(1.0, -n));
            CHECK(-second == doctest::Approx(expected).epsilon(1e-4));
        }
    }
}

TEST_CASE("iterate_cf: deep iterates approach the shifted kernel limit monotonically") {
    const auto pts = symmetric_grid(0.05, 100);
    const auto seed = DistributionSpec::exponential(1.0);
    const auto kernel = DistributionSpec::normal(0.0, 0.5);
    const auto limit = kernel_limit_cf(kernel, pts);
    double prev = INFINITY;
    for (int n = 0; n <= 16; ++n) {
        const auto g = iterate_cf({seed, kernel, n}, pts);
        double sup = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i)
            sup = std::max(sup, std::abs(g.values[i] - std::exp(cplx(0, pts[i])) * limit.grid.values[i]));
        CHECK(sup < prev);
        prev = sup;
    }
    CHECK(prev < 1e-4);
}

TEST_CASE("iterate_cf: underflow is flagged and clamped") {
    const std::vector<double> pts{0.0, 1.0, 40.0};
    const auto g = iterate_cf({DistributionSpec::normal(0.0, 1.0), DistributionSpec::point_mass(0.0), 0}, pts);
    CHECK(g.values[2] == cplx(0.0, 0.0));
    CHECK((g.flags[2] & kCfZero) != 0);
    CHECK(g.flags[0] == kCfClean);
    CHECK(g.flags[1] == kCfClean);
}

TEST_CASE("iterate_cf: wide phase is flagged but exact") {
    const std::vector<double> pts{0.5, 1.0};
    const auto g = iterate_cf({DistributionSpec::point_mass(3.0), DistributionSpec::point_mass(0.0), 0}, pts);
    CHECK(g.flags[0] == kCfClean);
    CHECK((g.flags[1] & kCfBranch) != 0);
    CHECK(std::abs(g.values[1] - std::exp(cplx(0, 3.0))) < 1e-15);
}

TEST_CASE("iterate_cf: thread count does not change a bit") {
    const auto pts = symmetric_grid(0.05, 200);
    for (const auto& p : test_matrix()) {
        const auto a = iterate_cf({p.seed, p.kernel, 9}, pts, 1);
        const auto b = iterate_cf({p.seed, p.kernel, 9}, pts, 4);
        CHECK(a.values == b.values);
        CHECK(a.flags == b.flags);
    }
}

TEST_CASE("iterate_cf: rejects negative n") {
    const std::vector<double> pts{1.0};
    CHECK_THROWS_AS(iterate_cf({DistributionSpec::point_mass(0), DistributionSpec::point_mass(0), -1}, pts),
                    ValidationError);
}

TEST_CASE("kernel_limit_cf: examples") {
    const auto pts = symmetric_grid(0.5, 10);
    const auto one = kernel_limit_cf(DistributionSpec::point_mass(0.0), pts);
    for (const auto& v : one.grid.values) CHECK(v == cplx(1.0, 0.0));

    const std::vector<double> s1{1.0};
    const auto n = kernel_limit_cf(DistributionSpec::normal(0.0, 0.5), s1);
    CHECK(n.grid.values[0].real() == doctest::Approx(std::exp(-0.5)).epsilon(1e-13));
    CHECK(n.grid.values[0].real() == doctest::Approx(0.606531).epsilon(1e-6));

    const auto st = kernel_limit_cf(DistributionSpec::symmetric_stable(1.5), s1);
    const double ref = std::exp(-1.0 / (1.0 - std::pow(2.0, -0.5)));
    CHECK(st.grid.values[0].real() == doctest::Approx(ref).epsilon(1e-12));
    CHECK(st.grid.values[0].real() == doctest::Approx(0.032840).epsilon(1e-4));
}

TEST_CASE("kernel_limit_cf: halving tol stays within the reported bound") {
    const auto pts = symmetric_grid(0.1, 100);
    struct Case {
        DistributionSpec kernel;
        TailBoundParams tail;
    };
    const std::vector<Case> cases{
        {DistributionSpec::normal(0.0, 0.5), {0.25, 2.0, 1e6, {}, {}}},
        {DistributionSpec::symmetric_stable(1.5), {1.0, 1.5, 1e6, {}, {}}},
        {DistributionSpec::symmetric_stable(1.2), {1.0, 1.2, 1e6, {}, {}}},
    };
    for (const auto& c : cases) {
        KernelLimitOptions opt;
        opt.tail = c.tail;
        double tol = 1e-3;
        opt.tol = tol;
        auto prev = kernel_limit_cf(c.kernel, pts, opt);
        for (int k = 0; k < 12; ++k) {
            tol /= 2.0;
            opt.tol = tol;
            const auto next = kernel_limit_cf(c.kernel, pts, opt);
            REQUIRE(prev.truncation_bound.has_value());
            CHECK(next.depth >= prev.depth);
            for (std::size_t i = 0; i < pts.size(); ++i)
                CHECK(std::abs(next.grid.values[i] - prev.grid.values[i]) <= *prev.truncation_bound);
            prev = next;
        }
    }
}

TEST_CASE("kernel_limit_cf: depth cap without tail constants is a non-convergence") {
    const auto pts = symmetric_grid(0.5, 10);
    KernelLimitOptions opt;
    opt.depth_cap = 3;
    CHECK_THROWS_AS(kernel_limit_cf(DistributionSpec::symmetric_stable(1.5), pts, opt), NonConvergence);
    opt.tail = TailBoundParams{1.0, 1.5, 10.0, {}, {}};
    const auto r = kernel_limit_cf(DistributionSpec::symmetric_stable(1.5), pts, opt);
    CHECK(r.depth == 3);
    REQUIRE(r.truncation_bound.has_value());
    const double exact = std::exp(-std::pow(5.0, 1.5) / (1.0 - std::pow(2.0, -0.5)));
    CHECK(std::abs(r.grid.values.back().real() - exact) <= *r.truncation_bound);
}

TEST_CASE("kernel_limit_cf: thread count does not change a bit") {
    const auto pts = symmetric_grid(0.05, 200);
    KernelLimitOptions a;
    KernelLimitOptions b;
    b.threads = 3;
    const auto k = DistributionSpec::discrete_power_law(0.5);
    a.tail = b.tail = power_tail_params(0.3, 0.5, 1.0);
    CHECK(kernel_limit_cf(k, pts, a).grid.values == kernel_limit_cf(k, pts, b).grid.values);
}

TEST_CASE("fixed_point_residual: unit-variance normals are fixed points") {
    const auto pts = symmetric_grid(0.05, 200);
    const auto kernel = DistributionSpec::normal(0.0, 0.5);
    for (double mu : {0.0, 1.0, -3.0}) {
        const auto r = fixed_point_residual(tabulate_cf(DistributionSpec::normal(mu, 1.0), pts), kernel);
        CHECK(r.sup_residual < 1e-12);
        CHECK(r.points_used == 201);
    }
    const auto wrong = fixed_point_residual(tabulate_cf(DistributionSpec::normal(0.0, 2.0), pts), kernel);
    CHECK(wrong.sup_residual > 0.1);
    // sup of e^{-3s^2/4}(1 - e^{-s^2/4}) is at s^2 = 4 ln(4/3).
    CHECK(wrong.sup_residual == doctest::Approx(std::pow(0.75, 3) * 0.25).epsilon(1e-2));

    const auto degenerate =
        fixed_point_residual(tabulate_cf(DistributionSpec::point_mass(0.0), pts), DistributionSpec::point_mass(0.0));
    CHECK(degenerate.sup_residual == 0.0);
}

TEST_CASE("fixed_point_residual: the kernel limit solves the fixed-point equation") {
    const auto pts = symmetric_grid(0.05, 200);
    for (const auto& k : {DistributionSpec::normal(0.0, 0.5), DistributionSpec::symmetric_stable(1.5)}) {
        const auto lim = kernel_limit_cf(k, pts);
        CHECK(fixed_point_residual(lim.grid, k).sup_residual < 1e-12);
    }
}

TEST_CASE("dyadic_stability_residual: examples") {
    const auto pts = symmetric_grid(0.05, 200);
    const auto cauchy = grid_from(pts, [](double s) { return std::exp(cplx(-0.8 * std::abs(s), 1.5 * s)); });
    CHECK(dyadic_stability_residual(cauchy).sup_residual < 1e-12);
    const auto phase = grid_from(pts, [](double s) { return std::exp(cplx(0.0, -2.0 * s)); });
    CHECK(dyadic_stability_residual(phase).sup_residual < 1e-15);
    const auto normal = dyadic_stability_residual(tabulate_cf(DistributionSpec::normal(0.0, 1.0), pts));
    CHECK(normal.sup_residual == doctest::Approx(0.25).epsilon(1e-2));
}

TEST_CASE("residuals reject unusable grids") {
    const auto k = DistributionSpec::normal(0.0, 0.5);
    const std::vector<double> tiny{-0.1, 0.0, 0.1};
    CHECK_THROWS_AS(fixed_point_residual(tabulate_cf(k, tiny), k), InvalidInput);
    const std::vector<double> uneven{-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0};
    CHECK_THROWS_AS(fixed_point_residual(tabulate_cf(k, uneven), k), InvalidInput);
    const std::vector<double> lopsided{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
    CHECK_THROWS_AS(dyadic_stability_residual(tabulate_cf(k, lopsided)), InvalidInput);
    const std::vector<double> ok{-0.4, -0.2, 0.0, 0.2, 0.4};
    CHECK(dyadic_stability_residual(tabulate_cf(k, ok)).points_used == 3);
}

TEST_CASE("verify_tail_bound: examples") {
    const auto pts = symmetric_grid(0.01, 100);
    const auto n = verify_tail_bound(DistributionSpec::normal(0.0, 0.8), {0.8, 2.0, 0.5, {}, {}}, pts);
    CHECK(n.holds);
    CHECK(n.worst_ratio == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(n.points_used == 100);

    for (double eps : {0.2, 0.5, 0.9}) {
        const auto r = verify_tail_bound(DistributionSpec::symmetric_stable(1.0 + eps), {1.0, 1.0 + eps, 1.0, {}, {}}, pts);
        CHECK(r.holds);
        CHECK(r.worst_ratio == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(r.worst_ratio <= 1.0);
        CHECK(r.holds_minus_one);
        CHECK(r.sandwich_holds);
        CHECK(r.sandwich_checked > 100);
        CHECK(r.sandwich_checked <= 200);
    }
}

TEST_CASE("verify_tail_bound: power-law kernel with the tail-derived constant") {
    std::vector<double> xs;
    for (double lx = 0.0; lx <= 3.0; lx += 0.01) xs.push_back(std::pow(10.0, lx));
    const auto kernel = DistributionSpec::discrete_power_law(0.5);
    const double c_fit = tail_decay_constant(kernel, 0.5, xs);
    CHECK(c_fit == doctest::Approx(tail_mass(kernel, 1.0).right).epsilon(1e-12));
    const auto params = power_tail_params(c_fit, 0.5, 1.0);
    CHECK(params.A == doctest::Approx(cf_bound_constant(c_fit, 0.5)));
    CHECK(params.p == 1.5);
    const auto r = verify_tail_bound(kernel, params, symmetric_grid(0.005, 200));
    CHECK(r.holds);
    CHECK(r.holds_minus_one);
    CHECK(r.sandwich_holds);
    // A tighter A fails, so the check is not vacuous.
    auto tight = params;
    tight.A = params.A * r.worst_ratio * 0.9;
    CHECK_FALSE(verify_tail_bound(kernel, tight, symmetric_grid(0.005, 200)).holds);
}

TEST_CASE("verify_tail_bound: points outside (0, s0] are skipped") {
    const std::vector<double> pts{-3.0, -0.5, 0.0, 0.5, 3.0};
    const auto r = verify_tail_bound(DistributionSpec::normal(0.0, 1.0), {1.0, 2.0, 1.0, {}, {}}, pts);
    CHECK(r.points_used == 2);
}

TEST_CASE("TailBoundParams validation") {
    CHECK_NOTHROW(validate(TailBoundParams{}));
    CHECK_THROWS_AS(validate(TailBoundParams{0.0, 2.0, 1.0, {}, {}}), InvalidInput);
    CHECK_THROWS_AS(validate(TailBoundParams{1.0, 1.0, 1.0, {}, {}}), InvalidInput);
    CHECK_THROWS_AS(validate(TailBoundParams{1.0, 2.0, 0.0, {}, {}}), InvalidInput);
    CHECK_THROWS_AS(validate(TailBoundParams{1.0, 2.0, 1.0, -1.0, {}}), InvalidInput);
    CHECK_THROWS_AS(validate(TailBoundParams{1.0, 2.0, 1.0, {}, 1.0}), InvalidInput);
}

TEST_CASE("log sandwich holds on a dense disk of radius 1/2") {
    std::size_t checked = 0;
    for (int ir = 1; ir < 500; ++ir)
        for (int it = 0; it < 360; ++it) {
            const double r = ir * 1e-3;
            const double t = it * std::numbers::pi / 180.0;
            REQUIRE(log_sandwich_holds(std::polar(r, t)));
            ++checked;
        }
    for (double r : {1e-300, 1e-200, 1e-17, 1e-9, 0.4999999999})
        CHECK(log_sandwich_holds(cplx(-r, 0.0)));
    CHECK(log_sandwich_holds(cplx(0.0, 0.0)));
    CHECK(checked == 499 * 360);
    CHECK_THROWS_AS(log_sandwich_holds(cplx(0.5, 0.0)), DomainError);
}

TEST_CASE("stable_limit_check: exact Cauchy, Cauchy-like and a normal control") {
    const auto pts = symmetric_grid(0.05, 100);
    std::vector<std::uint64_t> ns;
    for (std::uint64_t n = 1; n <= 1024; n *= 2) ns.push_back(n);

    const auto exact = stable_limit_check(DistributionSpec::cauchy_like(0.0, 1.0, 2.0), 1.0 / std::numbers::pi, ns, pts);
    CHECK(exact.non_increasing);
    for (const auto& row : exact.rows) CHECK(row.sup_error < 1e-14);

    const auto d = DistributionSpec::cauchy_like(0.0, 1.0, 1.0);
    const auto like = stable_limit_check(d, cauchy_tail_constant(d), ns, pts);
    CHECK(like.non_increasing);
    CHECK(like.rows.back().sup_error < 1e-2);
    CHECK(like.rows.front().sup_error > like.rows.back().sup_error);

    const auto control = stable_limit_check(DistributionSpec::normal(0.0, 1.0), 1.0 / std::numbers::pi, ns, pts);
    for (const auto& row : control.rows) CHECK(row.sup_error > 0.25);
}

TEST_CASE("levy_constant against a 50-digit oracle") {
    CHECK(std::abs(levy_constant(0.5) - 3.0 * std::sqrt(std::numbers::pi) * std::sqrt(2.0) / 2.0) < 1e-9);
    CHECK(levy_constant(0.5) == doctest::Approx(3.75994).epsilon(1e-6));
    for (double eps : {0.001, 0.1, 0.5, 0.9, 0.99})
        CHECK(levy_constant(eps) == doctest::Approx(oracle::levy_constant_hp(eps)).epsilon(1e-13));
    CHECK(std::abs(levy_constant(0.001) - std::numbers::pi / 2.0) < 1e-2);
    CHECK_THROWS_AS(levy_constant(0.0), DomainError);
    CHECK_THROWS_AS(levy_constant(1.0), DomainError);
    CHECK_THROWS_AS(levy_constant(-0.3), DomainError);
}

TEST_CASE("power-law CF deficit against the tail constant") {
    // With P(X >= x) ~ T x^-(1+eps) the deficit 1 - phi(s) behaves like
    // 2 T |s|^(1+eps) c(eps) / (1 + eps).
    for (double eps : {0.3, 0.5, 0.7}) {
        const auto d = DistributionSpec::discrete_power_law(eps);
        const double T = d.normalizing_constant() / (1.0 + eps);
        const double s = 1e-7;
        const double deficit = -log_cf(d, s).real();
        const double ratio = deficit / (2.0 * T * std::pow(s, 1.0 + eps));
        CHECK(ratio == doctest::Approx(levy_constant(eps) / (1.0 + eps)).epsilon(1e-2));
    }
}

TEST_CASE("cf_bound_constant bounds the power-law deficit") {
    for (double eps : {0.3, 0.5, 0.9}) {
        const auto d = DistributionSpec::discrete_power_law(eps);
        const double C = tail_mass(d, 1.0).right;
        const double A = cf_bound_constant(C, eps);
        CHECK(A == doctest::Approx(2 * C * std::pow(std::numbers::pi, 1 - eps) / (1 - eps) +
                                   4 * C * std::pow(std::numbers::pi, -1 - eps)));
        for (double s : symmetric_grid(0.01, 314))
            if (s != 0.0) CHECK(std::abs(1.0 - analytic_cf(d, s)) <= A * std::pow(std::abs(s), 1 + eps));
        for (double s : {1e-8, 1e-6, 1e-4})
            CHECK(-log_cf(d, s).real() <= A * std::pow(s, 1 + eps));
    }
    // Without the 1/(1 - eps) factor the bound fails near the origin for
    // eps close to 1.
    const auto d = DistributionSpec::discrete_power_law(0.9);
    const double C = tail_mass(d, 1.0).right;
    const double naive = 2 * C * std::pow(std::numbers::pi, 0.1) + 4 * C * std::pow(std::numbers::pi, -1.9);
    CHECK(-log_cf(d, 1e-4).real() > naive * std::pow(1e-4, 1.9));
    CHECK_THROWS_AS(cf_bound_constant(1.0, 1.5), DomainError);
}
