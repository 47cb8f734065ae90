#include "rheston/closed_form.hpp"
#include "rheston/errors.hpp"
#include "rheston/verification.hpp"

#include "test_helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <tuple>

using namespace rheston;
using rheston::testing::benchmark_params;

TEST_CASE("aggregator vanishes at the certainty-equivalent consumption") {
    const double gamma = 1.4, v = -1.0;
    const double c_star = std::pow((1.0 - gamma) * v, 1.0 / (1.0 - gamma));
    CHECK(std::abs(aggregator_f(c_star, v, gamma, 0.08, 0.6285714)) < 1e-15);
}

TEST_CASE("aggregator against a 50-digit reference evaluation") {
    CHECK(aggregator_f(1.0, -1.0, 1.4, 0.08, 0.6285714) ==
          doctest::Approx(-0.15549634429547666).epsilon(1e-12));
}

TEST_CASE("aggregator domain errors") {
    CHECK_THROWS_AS(aggregator_f(1.0, 1.0, 1.4, 0.08, 0.6285714), DomainError); // (1-g)v < 0
    CHECK_THROWS_AS(aggregator_f(1.0, 0.0, 1.4, 0.08, 0.6285714), DomainError);
    CHECK_THROWS_AS(aggregator_f(0.0, -1.0, 1.4, 0.08, 0.6285714), DomainError);
    CHECK_THROWS_AS(aggregator_f(1.0, -1.0, 0.6, 0.08, 1.5), DomainError); // gamma < 1, v < 0
}

namespace {

// draws (gamma, psi) inside one admissibility case
struct CaseSampler {
    Assumption31Case which;
    std::mt19937_64 rng;

    std::pair<double, double> draw() {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        switch (which) {
            case Assumption31Case::a:
                return {1.05 + 1.5 * u(rng), 1.05 + 1.5 * u(rng)};
            case Assumption31Case::b: {
                const double gamma = 1.05 + 1.5 * u(rng);
                return {gamma, (0.2 + 0.79 * u(rng)) / gamma}; // gamma*psi < 1
            }
            case Assumption31Case::c:
                return {0.1 + 0.85 * u(rng), 0.1 + 0.85 * u(rng)};
            default: { // d
                const double gamma = 0.3 + 0.65 * u(rng);
                return {gamma, (1.0 + 1.5 * u(rng)) / gamma}; // gamma*psi >= 1
            }
        }
    }
};

} // namespace

TEST_CASE("aggregator one-sided Lipschitz bound with C = |delta theta|") {
    for (Assumption31Case which : {Assumption31Case::a, Assumption31Case::b,
                                   Assumption31Case::c, Assumption31Case::d}) {
        CaseSampler sampler{which, std::mt19937_64(1234 + static_cast<int>(which))};
        std::uniform_real_distribution<double> uc(0.01, 10.0), uv(0.01, 5.0), ud(0.01, 0.2);
        int violations = 0;
        for (int i = 0; i < 10000; ++i) {
            const auto [gamma, psi] = sampler.draw();
            REQUIRE(validate_assumption31(gamma, psi) == which);
            const double delta = ud(sampler.rng);
            const double theta = (1.0 - gamma) / (1.0 - 1.0 / psi);
            const double sign = gamma < 1.0 ? 1.0 : -1.0; // (1-gamma)v > 0
            double v_hi = sign * uv(sampler.rng);
            double v_lo = sign * uv(sampler.rng);
            if (v_lo > v_hi) std::swap(v_lo, v_hi);
            const double consumption = uc(sampler.rng);
            const double lhs = aggregator_f(consumption, v_hi, gamma, delta, psi) -
                               aggregator_f(consumption, v_lo, gamma, delta, psi);
            if (lhs > std::abs(delta * theta) * (v_hi - v_lo) + 1e-10) ++violations;
        }
        CHECK(violations == 0);
    }
}

TEST_CASE("penalty basics") {
    const ModelParams p = benchmark_params(0.1);
    const DerivedConstants c = derive_constants(p);

    SUBCASE("zero distortion costs nothing") {
        CHECK(penalty({0.0, 0.0}, 1.0, 2.0, 0.04, 1.5, p, c) == 0.0);
    }
    SUBCASE("nonnegative when (1-gamma) w > 0") {
        CHECK(penalty({-0.05, -0.3}, 1.0, 2.0, 0.04, 1.5, p, c) >= 0.0);
    }
    SUBCASE("blows up as the robustness preference vanishes") {
        const std::array<double, 2> v{-0.05, -0.3};
        ModelParams pa = p;
        pa.a = 1e-2;
        double prev = penalty(v, 1.0, 2.0, 0.04, 1.5, pa, derive_constants(pa));
        pa.a = 1e-4;
        const double tighter = penalty(v, 1.0, 2.0, 0.04, 1.5, pa, derive_constants(pa));
        CHECK(tighter > prev * 50.0);
        pa.a = 0.0;
        CHECK(std::isinf(penalty(v, 1.0, 2.0, 0.04, 1.5, pa, derive_constants(pa))));
    }
    SUBCASE("undefined scaling at the horizon") {
        CHECK_THROWS_AS(penalty({-0.05, -0.3}, p.T, 2.0, 0.04, 1.5, p, c), DomainError);
    }
}

TEST_CASE("penalty matches the expanded quadratic form") {
    const ModelParams p = benchmark_params(0.1);
    const DerivedConstants c = derive_constants(p);
    const double t = 2.0, x = 1.7, y = 0.05, pi = 1.3, v2 = -0.4;
    const std::array<double, 2> v{-p.a / x, v2};

    const double got = penalty(v, t, x, y, pi, p, c);
    const double g = eval_g(t, y, c, p).g;
    const double expected = std::pow(x, 1.0 - p.gamma) * std::pow(g, c.k) * y *
                            (p.a * p.a * pi * pi - 2.0 * p.a * pi * p.rho * p.beta_bar * v2 +
                             p.beta_bar * p.beta_bar * v2 * v2) /
                            (2.0 * p.a);
    CHECK(got == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("drift tilt at the minimizing distortion equals -2 penalty") {
    const ModelParams p = benchmark_params(0.1);
    const DerivedConstants c = derive_constants(p);
    for (auto [t, x, y] : {std::tuple{0.5, 1.0, 0.03}, std::tuple{4.0, 2.5, 0.1},
                           std::tuple{8.0, 0.7, 0.01}}) {
        const WDerivatives wd = w_derivatives(t, x, y, c, p);
        const double eta = p.a / ((1.0 - p.gamma) * wd.w);
        const std::array<double, 2> v_star{-eta * wd.w_x, -eta * wd.w_y};

        const double sigma = std::sqrt(y), beta = p.beta_bar * std::sqrt(y);
        const double pi = 1.23;
        const double S11 = x * pi * sigma * x * pi * sigma;
        const double S12 = x * pi * sigma * p.rho * beta;
        const double S22 = beta * beta;
        const double tilt = v_star[0] * (S11 * wd.w_x + S12 * wd.w_y) +
                            v_star[1] * (S12 * wd.w_x + S22 * wd.w_y);
        const double pen = penalty_given_w(v_star, x, y, pi, wd.w, p);
        CHECK(tilt == doctest::Approx(-2.0 * pen).epsilon(1e-12));
    }
}

TEST_CASE("value-function partial ratios from the ansatz") {
    const ModelParams p = benchmark_params(0.2);
    const DerivedConstants c = derive_constants(p);
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> ut(0.0, 9.5), ux(0.2, 5.0), uy(0.001, 0.4);
    for (int i = 0; i < 100; ++i) {
        const double t = ut(rng), x = ux(rng), y = uy(rng);
        const WDerivatives wd = w_derivatives(t, x, y, c, p);
        const GTriple gt = eval_g(t, y, c, p);
        const double gyg = gt.g_y / gt.g;
        CHECK(wd.w_x / wd.w == doctest::Approx((1.0 - p.gamma) / x).epsilon(1e-10));
        CHECK(wd.w_xx / wd.w ==
              doctest::Approx(-p.gamma * (1.0 - p.gamma) / (x * x)).epsilon(1e-10));
        CHECK(wd.w_y / wd.w == doctest::Approx(c.k * gyg).epsilon(1e-10));
        CHECK(wd.w_xy / wd.w ==
              doctest::Approx((1.0 - p.gamma) * (c.k / x) * gyg).epsilon(1e-10));
    }
}

TEST_CASE("HJBI residual at the optimum is numerically zero") {
    const ModelParams p = benchmark_params(0.1);
    const DerivedConstants c = derive_constants(p);
    for (auto [t, y] : {std::pair{0.0, 0.005}, {5.0, 0.04}, {9.9, 0.09}}) {
        const ResidualReport rep = hjbi_residual(t, 1.0, y, p, c);
        CHECK(std::abs(rep.normalized_residual) < 1e-6);
        CHECK(std::abs(rep.g_pde_normalized) < 1e-6);

        double sum = 0.0;
        for (const auto& [name, value] : rep.term_breakdown) sum += value;
        CHECK(rep.residual == doctest::Approx(sum).epsilon(1e-12));
    }
}

TEST_CASE("residual detects a corrupted Riccati constant") {
    const ModelParams p = benchmark_params(0.1);
    DerivedConstants c = derive_constants(p);
    c.b *= 1.01;
    const ResidualGridResult res = hjbi_residual_grid(p, c, 0.0, 9.0, 5, 0.01, 0.09, 5);
    CHECK(res.max_normalized > 1e-6);
}

TEST_CASE("saddle property at sampled states") {
    for (double a : {0.0, 0.1}) {
        const ModelParams p = benchmark_params(a);
        const DerivedConstants c = derive_constants(p);
        for (auto [t, y] : {std::pair{0.0, 0.0225}, {5.0, 0.04}, {9.5, 0.09}}) {
            const SaddleCheck sc = saddle_check(t, 1.0, y, p, c);
            CHECK(sc.v_ok);
            CHECK(sc.u_ok);
        }
    }
}

TEST_CASE("residual grid kernel matches its serial reference") {
    const ModelParams p = benchmark_params(0.1);
    const DerivedConstants c = derive_constants(p);
    const ResidualGridResult par = hjbi_residual_grid(p, c, 0.0, 9.0, 6, 0.01, 0.09, 6, 1.0, true);
    const ResidualGridResult ser =
        hjbi_residual_grid(p, c, 0.0, 9.0, 6, 0.01, 0.09, 6, 1.0, false);
    CHECK(par.max_normalized == ser.max_normalized);
    CHECK(par.max_g_pde_normalized == ser.max_g_pde_normalized);
}
