#include <doctest.h>

#include <cmath>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "renorm/analysis/analysis.hpp"
#include "renorm/numerics/grid.hpp"

using namespace renorm;

namespace {

CombinatorialPair swap2() { return CombinatorialPair::from_orders({"A", "B"}, {"B", "A"}); }

std::vector<Rational> fib_lengths() {
    // F18/F20, F19/F20
    return {Rational(2584, 6765), Rational(4181, 6765)};
}

std::shared_ptr<const Giem<Extended>> ko_map() {
    return std::make_shared<const Giem<Extended>>(ko_iem<Extended>(
        golden_lengths<Extended>(), swap2(),
        {{Extended("0.1"), Extended("0.37"), Extended("0.4"), false},
         {Extended("-0.08"), Extended("0.61"), Extended("-0.35"), false}}));
}

std::shared_ptr<const Giem<Extended>> mobius_map() {
    return std::make_shared<const Giem<Extended>>(
        moebius_iem<Extended>(golden_lengths<Extended>(), swap2(), {Extended("1.3"), Extended("0.8")}));
}

template <class T>
std::vector<T> interior_grid(int n) {
    std::vector<T> g;
    for (int j = 1; j < n; ++j) g.push_back(T(j) / T(n));
    return g;
}

}  // namespace

TEST_CASE("standard map: everything is the identity, exactly") {
    auto f = std::make_shared<const Giem<Rational>>(standard_iem<Rational>(fib_lengths(), swap2()));
    PrecisionContext ctx = PrecisionContext::exact();
    auto s = initial_state(f);
    const auto grid = interior_grid<Rational>(8);
    for (int n = 0; n <= 8; ++n) {
        if (n > 0) s = step(s);
        for (Letter a = 0; a < 2; ++a) {
            auto o0 = relative_orbit(s, a, Rational(0));
            auto o1 = relative_orbit(s, a, Rational(1));
            auto oz = relative_orbit(s, a, Rational(2, 7));
            for (std::size_t i = 0; i < o0.z.size(); ++i) {
                CHECK(o0.z[i] == 0);
                CHECK(o1.z[i] == 1);
                CHECK(oz.z[i] == Rational(2, 7));
            }
            auto mn = compute_mn(s, a, ctx);
            CHECK(mn.value == 1);
            CHECK(*mn.quadrature == 1);
            auto zs = zoom(s, a, std::span<const Rational>(grid));
            for (std::size_t j = 0; j < grid.size(); ++j) {
                CHECK(zs.value[j] == grid[j]);
                CHECK(zs.deriv[j] == 1);
                CHECK(zs.second[j] == 0);
            }
            auto dev = deviation(zs, mobius_of_logparam(Rational(0)));
            CHECK(dev.c0 == 0);
            CHECK(dev.c1 == 0);
            CHECK(dev.l1 == 0);
            CHECK(dev.l1_tv == 0);
            auto tau = tau_diagnostics(s, a, std::span<const Rational>(grid), ctx, std::optional<Rational>(0));
            for (const auto& v : tau.tau) CHECK(v == 0);
            for (const auto& v : tau.dtau) CHECK(v == 0);
            for (const auto& v : tau.A) CHECK(v == 0);
            CHECK(tau.anchor_residual == 0);
            auto sums = diagnostic_sums(s, a, std::optional<Rational>(Rational(1, 3)), ctx);
            CHECK(*sums.s1 == 0);
            CHECK(*sums.e == 0);
            CHECK(sums.q == 0);
            CHECK(sums.u == 0);
            CHECK(zqn_identity_check(s, a, std::span<const Rational>(grid), ctx) == 0);
        }
    }
}

TEST_CASE("endpoint normalization and orbit errors") {
    num::ScopedPrecision prec(128);
    auto s = renormalize(ko_map(), 5);
    for (Letter a = 0; a < 2; ++a) {
        CHECK(zoom_at(s, a, Extended(0)).value == 0);
        CHECK(zoom_at(s, a, Extended(1)).value == 1);
        for (const auto& z : interior_grid<Extended>(16)) CHECK(zoom_at(s, a, z).deriv > 0);
    }
    CHECK_THROWS_AS(relative_orbit(s, 0, Extended("1.5")), std::invalid_argument);
}

TEST_CASE("Mobius utilities") {
    num::ScopedPrecision prec(128);
    auto id = mobius_of_logparam(Extended(0));
    CHECK(id.m == 1);
    CHECK(id(Extended("0.3")) == Extended("0.3"));
    const Extended a("0.7");
    const Extended e = num::exp(Extended(-a / 2));
    CHECK(num::abs(Extended(mobius_of_logparam(a)(Extended("0.5")) - e / (1 + e))) < Extended("1e-35"));
    auto fit = MobiusApproximant<Extended>::through_half(mobius_of_logparam(a)(Extended("0.5")));
    CHECK(num::abs(Extended(fit.m - e)) < Extended("1e-35"));

    // derivatives against finite differences
    MobiusApproximant<long double> F{1.7L};
    for (long double x : {0.1L, 0.5L, 0.9L}) {
        const long double h = 1e-5L;
        CHECK(std::fabs((F(x + h) - F(x - h)) / (2 * h) - F.deriv(x)) < 1e-8L);
        CHECK(std::fabs((F.deriv(x + h) - F.deriv(x - h)) / (2 * h) - F.second_deriv(x)) < 1e-7L);
    }

    // the measured Lipschitz constant bounds pairs it never saw
    const long double C = mobius_lipschitz_constant<long double>(400, 257, 1);
    CHECK(C > 0);
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<long double> pick(-1.0L, 1.0L);
    for (int k = 0; k < 50; ++k) {
        long double u = pick(rng), v = pick(rng);
        auto A = mobius_of_logparam(u), B = mobius_of_logparam(v);
        long double norm = 0;
        for (long double x : num::uniform_grid(0.0L, 1.0L, 257))
            norm = std::max({norm, std::fabs(A(x) - B(x)), std::fabs(A.deriv(x) - B.deriv(x)),
                             std::fabs(A.second_deriv(x) - B.second_deriv(x))});
        CHECK(norm <= 1.05L * C * std::fabs(u - v));
    }
}

TEST_CASE("Mobius closure") {
    num::ScopedPrecision prec(256);
    PrecisionContext ctx = PrecisionContext::extended(256);
    ctx.grid_points = 65;
    auto s = initial_state(mobius_map());
    const auto grid = interior_grid<Extended>(10);
    for (int n = 0; n <= 6; ++n) {
        if (n > 0) s = step(s);
        for (Letter a = 0; a < 2; ++a) {
            auto mn = compute_mn(s, a, ctx);
            // the Mobius map through the sample at 1/2 has the same coefficient
            auto fit = MobiusApproximant<Extended>::through_half(zoom_at(s, a, Extended("0.5")).value);
            CHECK(num::abs(Extended(fit.m - mn.value)) < Extended("1e-60"));
            CHECK(mn.defect <= Extended(10) * num::from_ld<Extended>(ctx.quad_tol) * s.return_time(a));
            auto dev = deviation(s, a, MobiusApproximant<Extended>{mn.value}, ctx);
            CHECK(dev.c0 < Extended("1e-60"));
            CHECK(dev.c1 < Extended("1e-60"));
            CHECK(dev.l1 < Extended("1e-60"));
            CHECK(zqn_identity_check(s, a, std::span<const Extended>(grid), ctx) < Extended("1e-40"));
        }
    }
}

TEST_CASE("KO family: recursion anchor, closed forms, tau derivatives") {
    num::ScopedPrecision prec(128);
    PrecisionContext ctx = PrecisionContext::extended(128);
    auto f = ko_map();
    const Extended tol = num::from_ld<Extended>(ctx.quad_tol);
    const Extended theta = f->log_derivative_variation();
    auto s = initial_state(f);
    for (int n = 0; n <= 5; ++n) {
        if (n > 0) s = step(s);
        for (Letter a = 0; a < 2; ++a) {
            const std::size_t q = s.return_time(a);
            auto mn = compute_mn(s, a, ctx);
            CHECK(mn.defect <= Extended(10) * tol * q);

            const auto grid = interior_grid<Extended>(6);
            auto tau = tau_diagnostics(s, a, std::span<const Extended>(grid), ctx);
            CHECK(tau.anchor_residual <= Extended(1000) * tol);
            CHECK(tau.max_tau <= tau.decomposition_bound);
            CHECK(num::abs(Extended(tau.log_mn - num::log(mn.value))) < Extended("1e-30"));
            CHECK(zqn_identity_check(s, a, std::span<const Extended>(grid), ctx) <= Extended(1000) * tol * q);

            // tau is the sum of the psi_i
            Extended sum(0);
            for (const auto& p : tau.psi) sum += p;
            const std::size_t mid = 2;  // grid point 1/2
            CHECK(num::abs(Extended(sum - tau.tau[mid])) < Extended("1e-30"));

            // the opposite sign for A_i breaks the recursion whenever f is nonlinear
            auto orbit = relative_orbit(s, a, Extended("0.5"));
            Extended flipped(0);
            for (std::size_t i = 0; i < q; ++i) {
                const Extended& z = orbit.z[i];
                flipped = std::max(flipped, num::abs(Extended(orbit.z[i + 1] - z * (1 + (-tau.A[i]) * (z - 1)))));
            }
            CHECK(flipped > Extended("1e-8"));

            // relative coordinates and their derivative stay within the Denjoy sandwich
            for (const auto& z0 : interior_grid<Extended>(7)) {
                auto o = relative_orbit(s, a, z0);
                Extended dfx(1);
                for (std::size_t i = 0; i <= q; ++i) {
                    const Extended ratio = z0 * (1 - z0) / (o.z[i] * (1 - o.z[i]));
                    CHECK(ratio <= num::exp(Extended(2 * theta)));
                    CHECK(ratio >= num::exp(Extended(-2 * theta)));
                    const Extended dz = dfx * (o.b[0] - o.a[0]) / (o.b[i] - o.a[i]);
                    CHECK(dz <= num::exp(theta));
                    CHECK(dz >= num::exp(Extended(-theta)));
                    if (i < q) dfx *= f->branch(o.branch[i]).deriv(o.x[i]);
                }
            }
        }
    }

    // tau' and tau'' against central differences of tau
    auto s3 = renormalize(f, 3);
    const Extended h("1e-12");
    for (const char* zs : {"0.3", "0.55", "0.8"}) {
        const Extended z(zs);
        std::vector<Extended> pts{z - h, z, z + h};
        auto t = tau_diagnostics(s3, 0, std::span<const Extended>(pts), ctx);
        const Extended d1 = (t.tau[2] - t.tau[0]) / (2 * h);
        const Extended d2 = (t.dtau[2] - t.dtau[0]) / (2 * h);
        CHECK(num::abs(Extended(d1 - t.dtau[1])) < Extended("1e-10"));
        CHECK(num::abs(Extended(d2 - t.d2tau[1])) < Extended("1e-10"));
    }
}

TEST_CASE("zoom second derivative matches differentiating DZ") {
    num::ScopedPrecision prec(128);
    auto s = renormalize(ko_map(), 4);
    auto grid = num::uniform_grid(Extended(0), Extended(1), 2001);
    auto zs = zoom(s, 1, std::span<const Extended>(grid));
    CHECK_FALSE(zs.second_from_grid);
    std::vector<num::Sample<Extended>> dz;
    for (std::size_t j = 0; j < grid.size(); ++j) dz.push_back({grid[j], zs.deriv[j]});
    auto d2 = num::grid_derivative<Extended>(dz);
    // away from the logarithmic singularities the two agree to O(h^2)
    std::size_t close = 0;
    for (std::size_t j = 0; j < grid.size(); ++j)
        if (num::abs(Extended(d2[j].y - zs.second[j])) < Extended("1e-3")) ++close;
    CHECK(close > grid.size() * 9 / 10);
}

TEST_CASE("zoom: parallel and serial kernels agree bitwise") {
    num::ScopedPrecision prec(128);
    auto s = renormalize(ko_map(), 6);
    auto grid = num::uniform_grid(Extended(0), Extended(1), 257);
#ifdef _OPENMP
    const int saved = omp_get_max_threads();
    omp_set_num_threads(4);
#endif
    auto par = zoom(s, 0, std::span<const Extended>(grid));
#ifdef _OPENMP
    omp_set_num_threads(saved);
#endif
    auto ser = zoom_serial(s, 0, std::span<const Extended>(grid));
    CHECK(par.value == ser.value);
    CHECK(par.deriv == ser.deriv);
    CHECK(par.second == ser.second);
}

TEST_CASE("deviation: grid doubling catches coarse grids") {
    num::ScopedPrecision prec(128);
    PrecisionContext ctx = PrecisionContext::extended(128);
    auto s = renormalize(ko_map(), 3);
    // Z - F vanishes at both ends, so two points see nothing
    ctx.grid_points = 2;
    CHECK_THROWS_AS(deviation(s, 0, MobiusApproximant<Extended>{Extended(1)}, ctx), GridInadequate);
    ctx.grid_points = 513;
    auto d = deviation(s, 0, MobiusApproximant<Extended>{compute_mn(s, 0, ctx, false).value}, ctx);
    CHECK(d.grid_points == 1025);
    CHECK(d.c1 > 0);
    // TV of D(Z - F) and the L1 norm of D^2(Z - F) estimate the same quantity
    CHECK(num::abs(Extended(d.l1 - d.l1_tv)) < d.l1 / 100);
}

TEST_CASE("diagnostic sums against nested quadrature") {
    num::ScopedPrecision prec(64);
    PrecisionContext ctx = PrecisionContext::extended(64);
    ctx.quad_tol = 1e-10L;
    auto f = ko_map();
    auto s = renormalize(f, 0);
    for (Letter a = 0; a < 2; ++a) {
        auto sums = diagnostic_sums(s, a, std::optional<Extended>(Extended("0.4")), ctx);
        // direct double integrals of the definitions
        Extended q(0), u(0);
        auto o = relative_orbit(s, a, Extended(0));
        for (std::size_t i = 0; i < o.branch.size(); ++i) {
            const auto& br = f->branch(o.branch[i]);
            const Extended l = o.a[i], r = o.b[i];
            auto inner = [&](const Extended& x, bool second) {
                auto h = [&](const Extended& t) { return second ? br.second_deriv(t) : br.nonlinearity(t); };
                num::Integrand<Extended> up = [&](const Extended& t) { return Extended(h(t) * (t - l)); };
                num::Integrand<Extended> down = [&](const Extended& t) { return Extended(h(t) * (r - t)); };
                std::vector<Extended> lc, rc;
                for (const auto& c : br.singular_points()) {
                    if (l < c && c < x) lc.push_back(c);
                    if (x < c && c < r) rc.push_back(c);
                }
                const Extended X = x - l, Y = r - x;
                return std::make_pair(num::integrate<Extended>(up, l, x, Extended("1e-9") * X * X, lc).value / (X * X),
                                      num::integrate<Extended>(down, x, r, Extended("1e-9") * Y * Y, rc).value / (Y * Y));
            };
            num::Integrand<Extended> qg = [&](const Extended& x) {
                auto [lo, hi] = inner(x, false);
                return num::abs(Extended(lo - hi));
            };
            num::Integrand<Extended> ug = [&](const Extended& x) {
                auto [lo, hi] = inner(x, true);
                return Extended(br.second_deriv(x) - lo - hi);
            };
            q += num::integrate<Extended>(qg, l, r, Extended("1e-7") * (r - l), br.singular_points()).value;
            u += num::integrate<Extended>(ug, l, r, Extended("1e-7") * (r - l), br.singular_points()).value;
        }
        CHECK(sums.q > 0);
        CHECK(num::abs(Extended(q - sums.q)) < Extended("1e-5"));
        CHECK(num::abs(Extended(u - sums.u)) < Extended("1e-5"));
    }
}

TEST_CASE("Denjoy check") {
    SUBCASE("standard map") {
        auto s = renormalize(standard_iem<long double>(golden_lengths<long double>(), swap2()), 8);
        auto rep = denjoy_check(s, 20, 100, 4);
        CHECK(rep.theta == 0);
        CHECK(rep.max_log_product == 0);
        CHECK(rep.max_pair_log_ratio == 0);
        CHECK(rep.ok());
    }
    SUBCASE("affine map") {
        auto f = affine_iem<long double>(golden_lengths<long double>(), swap2(), {0.8L});
        // one interior break, where the slope jumps from 0.8 to the solved slope
        const long double other = (1 - 0.8L * golden_lengths<long double>()[0]) / golden_lengths<long double>()[1];
        auto s = renormalize(f, 8);
        auto rep = denjoy_check(s, 20, 200, 4);
        CHECK(std::fabs(rep.theta - std::fabs(std::log(0.8L / other))) < 1e-15L);
        CHECK(rep.ok());
        CHECK(rep.pairs_checked > 0);
    }
    SUBCASE("KO map") {
        num::ScopedPrecision prec(128);
        auto s = renormalize(ko_map(), 8);
        auto rep = denjoy_check(s, 20, 300, 4);
        CHECK(rep.theta > 0);
        CHECK(num::abs(Extended(rep.theta - rep.theta_grid)) < rep.theta / 100);
        CHECK(rep.ok());
        CHECK(rep.pairs_checked > 100);
        CHECK(rep.max_pair_log_ratio < rep.theta);
    }
}

TEST_CASE("convergence CSV and line fit") {
    std::vector<ConvergenceRecord<long double>> rows(3);
    for (std::size_t k = 0; k < rows.size(); ++k) rows[k].depth = k;
    auto csv = convergence_csv(rows, swap2(), 10);
    CHECK(csv.rfind("n,letter,m_n,delta_c0,delta_c1,delta_l1,delta_l1_tv,partition_norm,log_mn,eta_n,runtime_ms\n", 0) ==
          0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
    std::vector<long double> x{0, 1, 2, 3}, y{1, -1, -3, -5};
    auto [slope, icpt] = linear_fit(x, y);
    CHECK(std::fabs(slope + 2) < 1e-15L);
    CHECK(std::fabs(icpt - 1) < 1e-15L);
}
