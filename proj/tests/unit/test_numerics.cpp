#include <doctest.h>

#include <cmath>
#include <vector>

#include "renorm/numerics/grid.hpp"
#include "renorm/numerics/quadrature.hpp"

using namespace renorm;
using num::Sample;

TEST_CASE("integrate: polynomial and zero integrands") {
    num::Integrand<long double> id = [](const long double& x) { return x; };
    CHECK(std::fabs(num::integrate<long double>(id, 0.0L, 1.0L, 1e-18L).value - 0.5L) < 1e-18L);

    num::Integrand<Rational> cubic = [](const Rational& x) { return x * x * x; };
    auto r = num::integrate<Rational>(cubic, Rational(0), Rational(1), Rational(0));
    CHECK(r.value == Rational(1, 4));

    num::Integrand<Rational> zero = [](const Rational&) { return Rational(0); };
    CHECK(num::integrate<Rational>(zero, Rational(-3), Rational(7, 2), Rational(0)).value == 0);
}

TEST_CASE("integrate: log singularity at 1/2 in extended precision") {
    num::ScopedPrecision prec(256);
    num::Integrand<Extended> g = [](const Extended& x) { return num::log(num::abs(Extended(x - Extended(0.5)))); };
    const Extended tol("1e-20");
    auto coarse = num::integrate<Extended>(g, Extended(0), Extended(1), tol);
    auto fine = num::integrate<Extended>(g, Extended(0), Extended(1), Extended(tol / 10000));
    CHECK(coarse.panels < fine.panels);
    CHECK(num::abs(Extended(coarse.value - fine.value)) <= tol);
    const Extended exact = Extended(-1) - num::log(Extended(2));
    CHECK(num::abs(Extended(coarse.value - exact)) <= tol);
}

TEST_CASE("integrate: declared breakpoints are never sampled") {
    num::ScopedPrecision prec(128);
    const Extended c("0.3");
    num::Integrand<Extended> g = [&](const Extended& x) {
        REQUIRE(x != c);
        return num::log(num::abs(Extended(x - c)));
    };
    std::vector<Extended> cuts{c};
    auto r = num::integrate<Extended>(g, Extended(0), Extended(1), Extended("1e-25"), cuts);
    // (1-c)log(1-c) - (1-c) + c log c - c
    Extended one_c = Extended(1) - c;
    Extended exact = one_c * num::log(one_c) + c * num::log(c) - Extended(1);
    CHECK(num::abs(Extended(r.value - exact)) <= Extended("1e-25"));
}

TEST_CASE("integrate: tolerance far below the first error estimates") {
    // the running error total starts near 1e-3 and has to come down to 1e-30
    num::ScopedPrecision prec(128);
    num::Integrand<Extended> g = [](const Extended& x) { return Extended(num::log(x) * (Extended("0.7") - x)); };
    auto r = num::integrate<Extended>(g, Extended(0), Extended("0.7"), Extended("1e-30"));
    // int_0^c (c - x) log x dx = c^2 log c / 2 - 3 c^2 / 4
    const Extended c("0.7");
    const Extended exact = c * c * num::log(c) / 2 - Extended(3) * c * c / 4;
    CHECK(num::abs(Extended(r.value - exact)) <= Extended("1e-30"));
}

TEST_CASE("integrate: additivity and reversed limits") {
    num::ScopedPrecision prec(256);
    PrecisionContext ctx;
    num::Integrand<Extended> g = [](const Extended& x) { return num::exp(x) * num::log(Extended(x + 1)); };
    Extended u(0), v("0.37"), w(2);
    Extended whole = num::integrate<Extended>(g, u, w, ctx);
    Extended parts = num::integrate<Extended>(g, u, v, ctx) + num::integrate<Extended>(g, v, w, ctx);
    CHECK(num::abs(Extended(whole - parts)) <= Extended(2 * ctx.quad_tol));
    CHECK(num::integrate<Extended>(g, w, u, ctx) == -whole);
}

TEST_CASE("integrate: cap on panels raises NonConvergent") {
    num::Integrand<long double> g = [](const long double& x) { return std::sin(1 / (x + 1e-6L)); };
    CHECK_THROWS_AS(num::integrate<long double>(g, 0.0L, 1.0L, 1e-18L, {}, 10), NonConvergent);
}

TEST_CASE("Gauss-Legendre nodes") {
    num::ScopedPrecision prec(256);
    const auto& rule = num::gauss_legendre<Extended>(20);
    Extended wsum(0), x4(0);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        wsum += rule.weights[i];
        x4 += rule.weights[i] * num::pow(rule.nodes[i], Extended(38));
    }
    CHECK(num::abs(Extended(wsum - 2)) < Extended("1e-70"));
    CHECK(num::abs(Extended(x4 - Extended(2) / 39)) < Extended("1e-70"));
}

TEST_CASE("total_variation") {
    std::vector<Sample<Rational>> mono{{0, 1}, {1, 3}, {2, 7}};
    CHECK(num::total_variation<Rational>(mono) == 6);
    std::vector<Sample<Rational>> tent{{0, 0}, {1, 1}, {2, 0}};
    CHECK(num::total_variation<Rational>(tent) == 2);

    const std::size_t n = 10000;
    const long double two_pi = 2 * 3.141592653589793238462643383279502884L;
    std::vector<Sample<long double>> sine;
    for (std::size_t j = 0; j < n; ++j) {
        long double x = two_pi * j / (n - 1);
        sine.push_back({x, std::sin(x)});
    }
    CHECK(std::fabs(num::total_variation<long double>(sine) - 4) < 1e-3L);

    // refining a monotone sample set leaves the variation unchanged
    std::vector<Sample<Rational>> refined{{0, 1}, {Rational(1, 2), 2}, {1, 3}, {Rational(3, 2), 5}, {2, 7}};
    CHECK(num::total_variation<Rational>(refined) == 6);

    std::vector<Sample<Rational>> bad{{0, 0}, {0, 1}};
    CHECK_THROWS_AS(num::total_variation<Rational>(bad), BadGrid);
    std::vector<Sample<Rational>> single{{0, 0}};
    CHECK_THROWS_AS(num::total_variation<Rational>(single), BadGrid);
}

TEST_CASE("grid_derivative") {
    auto xs = num::uniform_grid<Rational>(Rational(0), Rational(1), 11);
    std::vector<Sample<Rational>> lin, quad;
    for (const auto& x : xs) {
        lin.push_back({x, x});
        quad.push_back({x, x * x});
    }
    for (const auto& d : num::grid_derivative<Rational>(lin)) CHECK(d.y == 1);
    auto dq = num::grid_derivative<Rational>(quad);
    for (std::size_t j = 1; j + 1 < dq.size(); ++j) CHECK(dq[j].y == 2 * dq[j].x);

    const std::size_t n = 201;
    const long double h = 1.0L / (n - 1);
    std::vector<Sample<long double>> ex;
    for (std::size_t j = 0; j < n; ++j) ex.push_back({j * h, std::exp(j * h)});
    auto de = num::grid_derivative<long double>(ex);
    long double worst = 0;
    for (std::size_t j = 1; j + 1 < n; ++j) worst = std::max(worst, std::fabs(de[j].y - std::exp(de[j].x)));
    CHECK(worst <= h * h * std::exp(1.0L) / 6);

    std::vector<Sample<Rational>> two{{0, 0}, {1, 1}};
    CHECK_THROWS_AS(num::grid_derivative<Rational>(two), BadGrid);
}

TEST_CASE("scalar parsing and exact square roots") {
    CHECK(num::parse<Rational>("0.25") == Rational(1, 4));
    CHECK(num::parse<Rational>("3/12") == Rational(1, 4));
    CHECK(num::parse<Rational>("-1.5e-2") == Rational(-3, 200));
    CHECK(num::sqrt<Rational>(Rational(9, 4)) == Rational(3, 2));
    CHECK_THROWS_AS(num::sqrt<Rational>(Rational(2)), Inexact);
    CHECK(num::log<Rational>(Rational(1)) == 0);
    CHECK_THROWS_AS(num::parse<long double>("abc"), ConfigError);
    num::ScopedPrecision prec(256);
    CHECK(num::mantissa_bits<Extended>() >= 256);
}
