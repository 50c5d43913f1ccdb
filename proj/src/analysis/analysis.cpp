#include "renorm/analysis/analysis.hpp"

#include <algorithm>
#include <exception>
#include <random>
#include <sstream>
#include <stdexcept>

#include "renorm/numerics/grid.hpp"

namespace renorm {

namespace {

template <Scalar T>
bool is_linear(const Branch<T>& b) {
    return b.profile.kind() == Profile<T>::Kind::Linear;
}

// exp and log that stay exact on the trivial arguments, so rational runs on
// affine maps never need a transcendental
template <Scalar T>
T exp_or_one(const T& x) {
    return x == 0 ? T(1) : num::exp(x);
}

template <Scalar T>
T log_or_zero(const T& x) {
    return x == 1 ? T(0) : num::log(x);
}

template <Scalar T>
std::vector<T> cuts_inside(const Branch<T>& b, const T& u, const T& v) {
    std::vector<T> out;
    for (const auto& c : b.singular_points())
        if (u < c && c < v) out.push_back(c);
    return out;
}

template <Scalar T>
T integral(const num::Integrand<T>& g, const T& u, const T& v, const T& tol, const std::vector<T>& cuts,
           const PrecisionContext& ctx) {
    return num::integrate<T>(g, u, v, tol, cuts, ctx.max_panels).value;
}

template <Scalar T>
T starting_point(const T& l, const T& r, const T& z0) {
    if (z0 == 0) return l;
    if (z0 == 1) return r;
    return l + z0 * (r - l);
}

template <Scalar T>
T trapezoid(std::span<const T> x, std::span<const T> y) {
    T total(0);
    for (std::size_t j = 0; j + 1 < x.size(); ++j) total += (x[j + 1] - x[j]) * (y[j] + y[j + 1]) / 2;
    return total;
}

template <Scalar T>
T noise_floor(std::size_t q) {
    return T(1000) * T(q + 1) * num::unit_roundoff<T>();
}

template <class Body>
void parallel_points(std::size_t count, Body body) {
    const auto n = static_cast<std::ptrdiff_t>(count);
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t j = 0; j < n; ++j) {
        try {
            body(static_cast<std::size_t>(j));
        } catch (...) {
#pragma omp critical(renorm_analysis_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace

template <Scalar T>
RelativeOrbit<T> relative_orbit(const RauzyState<T>& s, Letter a, const T& z0) {
    if (z0 < 0 || z0 > 1) throw std::invalid_argument("relative coordinate must lie in [0,1]");
    const auto& it = s.itineraries[a];
    RelativeOrbit<T> o;
    o.letter = a;
    o.depth = s.depth;
    o.z0 = z0;
    o.branch = it;
    T l = s.left(a), r = s.right(a);
    T x = starting_point(l, r, z0);
    for (std::size_t i = 0;; ++i) {
        if (x < l || r < x) throw TilingViolation("orbit point left its atom at iterate " + std::to_string(i), s.depth);
        o.a.push_back(l);
        o.b.push_back(r);
        o.x.push_back(x);
        o.z.push_back((x - l) / (r - l));
        if (i == it.size()) break;
        const auto& br = s.base->branch(it[i]);
        l = br.eval(l);
        r = br.eval(r);
        x = br.eval(x);
    }
    return o;
}

template <Scalar T>
T MobiusApproximant<T>::operator()(const T& x) const {
    return m * x / (T(1) + (m - T(1)) * x);
}

template <Scalar T>
T MobiusApproximant<T>::deriv(const T& x) const {
    T d = T(1) + (m - T(1)) * x;
    return m / (d * d);
}

template <Scalar T>
T MobiusApproximant<T>::second_deriv(const T& x) const {
    T d = T(1) + (m - T(1)) * x;
    return T(-2) * m * (m - T(1)) / (d * d * d);
}

template <Scalar T>
MobiusApproximant<T> MobiusApproximant<T>::through_half(const T& y) {
    // m / (1 + m) = y
    return {y / (T(1) - y)};
}

template <Scalar T>
MobiusApproximant<T> mobius_of_logparam(const T& a) {
    return {exp_or_one(T(-a / 2))};
}

template <Scalar T>
T mobius_lipschitz_constant(std::size_t pairs, std::size_t grid_points, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<long double> pick(-1.0L, 1.0L);
    const auto xs = num::uniform_grid(T(0), T(1), grid_points);
    T worst(0);
    for (std::size_t k = 0; k < pairs; ++k) {
        T a = num::from_ld<T>(pick(rng)), b = num::from_ld<T>(pick(rng));
        if (a == b) continue;
        auto A = mobius_of_logparam(a), B = mobius_of_logparam(b);
        T norm(0);
        for (const auto& x : xs)
            norm = std::max({norm, num::abs(T(A(x) - B(x))), num::abs(T(A.deriv(x) - B.deriv(x))),
                             num::abs(T(A.second_deriv(x) - B.second_deriv(x)))});
        worst = std::max(worst, T(norm / num::abs(T(a - b))));
    }
    return worst;
}

template <Scalar T>
MnResult<T> compute_mn(const RauzyState<T>& s, Letter a, const PrecisionContext& ctx, bool with_quadrature) {
    const auto& it = s.itineraries[a];
    T l = s.left(a), r = s.right(a);
    T dl(1), dr(1), half_integral(0);
    const T tol = num::from_ld<T>(ctx.quad_tol);
    for (Letter k : it) {
        const auto& br = s.base->branch(k);
        dl *= br.deriv(l);
        dr *= br.deriv(r);
        if (with_quadrature && !is_linear(br)) {
            num::Integrand<T> g = [&br](const T& t) { return T(br.nonlinearity(t) / 2); };
            half_integral += integral(g, l, r, tol, cuts_inside(br, l, r), ctx);
        }
        l = br.eval(l);
        r = br.eval(r);
    }
    MnResult<T> out;
    out.value = num::sqrt(T(dl / dr));
    if (with_quadrature) {
        out.quadrature = exp_or_one(T(-half_integral));
        out.defect = num::abs(T(out.value - *out.quadrature));
    }
    return out;
}

namespace {

// image of the induction interval under the return map
template <Scalar T>
std::pair<T, T> return_image(const RauzyState<T>& s, Letter a) {
    T l = s.left(a), r = s.right(a);
    for (Letter k : s.itineraries[a]) {
        const auto& br = s.base->branch(k);
        l = br.eval(l);
        r = br.eval(r);
    }
    return {l, r};
}

template <Scalar T>
ZoomPoint<T> zoom_point(const RauzyState<T>& s, Letter a, const std::pair<T, T>& image, const T& z0) {
    const T l0 = s.left(a), r0 = s.right(a);
    T x = starting_point(l0, r0, z0);
    T d(1), cocycle(0);
    ZoomPoint<T> p{z0, T(0), T(0), T(0), true};
    for (Letter k : s.itineraries[a]) {
        const auto& br = s.base->branch(k);
        if (p.second_available) {
            try {
                cocycle += br.nonlinearity(x) * d;
            } catch (const NoSecondDerivative&) {
                p.second_available = false;
            }
        }
        d *= br.deriv(x);
        x = br.eval(x);
    }
    const T w0 = r0 - l0, wq = image.second - image.first;
    p.value = (x - image.first) / wq;
    p.deriv = d * w0 / wq;
    if (p.second_available) p.second = p.deriv * w0 * cocycle;
    return p;
}

}  // namespace

template <Scalar T>
ZoomPoint<T> zoom_at(const RauzyState<T>& s, Letter a, const T& z0) {
    return zoom_point(s, a, return_image(s, a), z0);
}

namespace {

template <Scalar T>
ZoomSamples<T> collect(std::vector<ZoomPoint<T>>&& pts) {
    ZoomSamples<T> zs;
    const std::size_t n = pts.size();
    zs.z.resize(n);
    zs.value.resize(n);
    zs.deriv.resize(n);
    zs.second.resize(n);
    bool missing = false;
    for (std::size_t j = 0; j < n; ++j) {
        zs.z[j] = pts[j].z0;
        zs.value[j] = pts[j].value;
        zs.deriv[j] = pts[j].deriv;
        zs.second[j] = pts[j].second;
        missing = missing || !pts[j].second_available;
    }
    if (missing && n >= 3) {
        std::vector<num::Sample<T>> dz(n);
        for (std::size_t j = 0; j < n; ++j) dz[j] = {zs.z[j], zs.deriv[j]};
        auto d2 = num::grid_derivative<T>(dz);
        for (std::size_t j = 0; j < n; ++j)
            if (!pts[j].second_available) zs.second[j] = d2[j].y;
        zs.second_from_grid = true;
    }
    return zs;
}

}  // namespace

template <Scalar T>
ZoomSamples<T> zoom_serial(const RauzyState<T>& s, Letter a, std::span<const T> grid) {
    std::vector<ZoomPoint<T>> pts;
    pts.reserve(grid.size());
    const auto image = return_image(s, a);
    for (const auto& z : grid) pts.push_back(zoom_point(s, a, image, z));
    return collect(std::move(pts));
}

template <Scalar T>
ZoomSamples<T> zoom(const RauzyState<T>& s, Letter a, std::span<const T> grid) {
    std::vector<ZoomPoint<T>> pts(grid.size());
    const auto image = return_image(s, a);
    parallel_points(grid.size(), [&](std::size_t j) { pts[j] = zoom_point(s, a, image, grid[j]); });
    return collect(std::move(pts));
}

template <Scalar T>
Deviation<T> deviation(const ZoomSamples<T>& zs, const MobiusApproximant<T>& F) {
    Deviation<T> d;
    const std::size_t n = zs.z.size();
    d.grid_points = n;
    d.second_from_grid = zs.second_from_grid;
    std::vector<T> d2(n);
    std::vector<num::Sample<T>> d1(n);
    for (std::size_t j = 0; j < n; ++j) {
        const T& z = zs.z[j];
        d.c0 = std::max(d.c0, num::abs(T(zs.value[j] - F(z))));
        T e1 = zs.deriv[j] - F.deriv(z);
        d.c1 = std::max(d.c1, num::abs(e1));
        d1[j] = {z, e1};
        d2[j] = num::abs(T(zs.second[j] - F.second_deriv(z)));
    }
    if (n >= 2) {
        d.l1 = trapezoid<T>(zs.z, d2);
        d.l1_tv = num::total_variation<T>(d1);
    }
    return d;
}

template <Scalar T>
Deviation<T> deviation(const RauzyState<T>& s, Letter a, const MobiusApproximant<T>& F,
                       const PrecisionContext& ctx) {
    const std::size_t n = ctx.grid_points;
    const auto coarse_grid = num::uniform_grid(T(0), T(1), n);
    const auto fine_grid = num::uniform_grid(T(0), T(1), 2 * n - 1);
    const auto coarse = deviation(zoom(s, a, std::span<const T>(coarse_grid)), F);
    const auto fine = deviation(zoom(s, a, std::span<const T>(fine_grid)), F);
    const T floor = noise_floor<T>(s.return_time(a));
    auto check = [&](const T& c, const T& f, const char* name) {
        if (std::max(c, f) <= floor) return;
        if (num::abs(T(c - f)) > f / 10)
            throw GridInadequate(std::string(name) + " sup moved by more than 10% under grid doubling at depth " +
                                 std::to_string(s.depth) + " (" + num::format(c, 8) + " vs " +
                                 num::format(f, 8) + "); raise grid_points");
    };
    check(coarse.c0, fine.c0, "C0");
    check(coarse.c1, fine.c1, "C1");
    return fine;
}

namespace {

template <Scalar T>
struct TauPoint {
    T tau{0}, dtau{0}, d2tau{0};
    T sum_abs_a{0}, sum_sq_a{0};
    T anchor{0};
    std::vector<T> A, N, psi, V, dA, d2A;
};

template <Scalar T>
TauPoint<T> tau_at(const RauzyState<T>& s, Letter letter, const T& z0, const PrecisionContext& ctx, bool keep) {
    const auto orbit = relative_orbit(s, letter, z0);
    const std::size_t q = orbit.branch.size();
    const T w0 = orbit.b[0] - orbit.a[0];
    const T qtol = num::from_ld<T>(ctx.quad_tol);
    TauPoint<T> out;
    T dfx(1), cocycle(0);
    for (std::size_t i = 0; i < q; ++i) {
        const auto& br = s.base->branch(orbit.branch[i]);
        const T &a = orbit.a[i], &b = orbit.b[i], &x = orbit.x[i], &z = orbit.z[i];
        const T w = b - a, X = x - a, Y = b - x;
        const T D = br.deriv(a);
        T L(0), R(0), Qb(0), fx(0), N(0);
        if (!is_linear(br)) {
            // each integral enters the anchor divided by D w, hence the scaling
            const T tol = qtol * w * std::min(D, T(1)) / 4;
            num::Integrand<T> left = [&](const T& t) { return T(br.second_deriv(t) * (t - a)); };
            num::Integrand<T> right = [&](const T& t) { return T(br.second_deriv(t) * (b - t)); };
            L = integral(left, a, x, tol, cuts_inside(br, a, x), ctx);
            R = integral(right, x, b, tol, cuts_inside(br, x, b), ctx);
            Qb = integral(right, a, b, tol, cuts_inside(br, a, b), ctx);
            fx = br.second_deriv(x);
            N = num::log(T(br.deriv(b) / D)) / 2;
        }
        const T V = Qb / (D * w);
        const T den = D * (T(1) + V);
        const T A = (L / X + R / Y) / den;
        const T dAdx = (R / (Y * Y) - L / (X * X)) / den;
        const T d2Adx2 = (T(2) * L / (X * X * X) - fx / X + T(2) * R / (Y * Y * Y) - fx / Y) / den;
        const T A1 = w * dAdx, A2 = w * w * d2Adx2;

        const T p1 = T(1) + A * z, p0 = T(1) + A * (z - T(1));
        const T psi = N - (A == 0 ? T(0) : num::log(T(p1 / p0)));
        const T dpsi = (A * A - A1) / (p1 * p0);
        const T d2psi = (T(2) * A * A1 - A2) / (p1 * p0) - T(2) * (A1 * z + A) / p1 * dpsi - dpsi * dpsi;

        const T dz = dfx * w0 / w;
        const T d2z = dz * w0 * cocycle;
        out.tau += psi;
        out.dtau += dpsi * dz;
        out.d2tau += d2psi * dz * dz + dpsi * d2z;
        out.sum_abs_a += num::abs(A);
        out.sum_sq_a += A * A;
        out.anchor = std::max(out.anchor, num::abs(T(orbit.z[i + 1] - z * (T(1) + A * (z - T(1))))));
        if (keep) {
            out.A.push_back(A);
            out.N.push_back(N);
            out.psi.push_back(psi);
            out.V.push_back(V);
            out.dA.push_back(dAdx);
            out.d2A.push_back(d2Adx2);
        }
        cocycle += br.nonlinearity(x) * dfx;
        dfx *= br.deriv(x);
    }
    return out;
}

}  // namespace

template <Scalar T>
TauDiagnostics<T> tau_diagnostics(const RauzyState<T>& s, Letter a, std::span<const T> grid,
                                  const PrecisionContext& ctx, std::optional<T> anchor_tol) {
    for (const auto& z : grid)
        if (!(0 < z && z < 1)) throw std::invalid_argument("tau grid points must lie in (0,1)");
    if (grid.empty()) throw std::invalid_argument("tau grid is empty");
    std::size_t middle = 0;
    for (std::size_t j = 1; j < grid.size(); ++j)
        if (num::abs(T(grid[j] - T(1) / 2)) < num::abs(T(grid[middle] - T(1) / 2))) middle = j;

    std::vector<TauPoint<T>> pts(grid.size());
    parallel_points(grid.size(), [&](std::size_t j) { pts[j] = tau_at(s, a, grid[j], ctx, j == middle); });

    TauDiagnostics<T> d;
    d.letter = a;
    d.depth = s.depth;
    d.z0.assign(grid.begin(), grid.end());
    const T mn = compute_mn(s, a, ctx, false).value;
    d.log_mn = log_or_zero(mn);
    std::vector<T> abs_dtau, weighted_d2tau;
    for (std::size_t j = 0; j < pts.size(); ++j) {
        const auto& p = pts[j];
        const T w = grid[j] * (T(1) - grid[j]);
        d.tau.push_back(p.tau);
        d.dtau.push_back(p.dtau);
        d.d2tau.push_back(p.d2tau);
        d.max_tau = std::max(d.max_tau, num::abs(p.tau));
        d.max_weighted_dtau = std::max(d.max_weighted_dtau, T(w * num::abs(p.dtau)));
        abs_dtau.push_back(num::abs(p.dtau));
        weighted_d2tau.push_back(w * num::abs(p.d2tau));
        d.decomposition_bound =
            std::max(d.decomposition_bound, T(num::abs(d.log_mn) + p.sum_abs_a + p.sum_sq_a));
        d.anchor_residual = std::max(d.anchor_residual, p.anchor);
    }
    d.int_dtau = trapezoid<T>(grid, abs_dtau);
    d.int_weighted_d2tau = trapezoid<T>(grid, weighted_d2tau);
    auto& mid = pts[middle];
    d.A = std::move(mid.A);
    d.N = std::move(mid.N);
    d.psi = std::move(mid.psi);
    d.V = std::move(mid.V);
    d.dA = std::move(mid.dA);
    d.d2A = std::move(mid.d2A);

    const T tol = anchor_tol ? *anchor_tol : T(1000) * num::from_ld<T>(ctx.quad_tol);
    if (d.anchor_residual > tol)
        throw SignConventionViolation("relative coordinate recursion fails by " + num::format(d.anchor_residual, 6) +
                                      " at depth " + std::to_string(s.depth));
    return d;
}

template <Scalar T>
DiagnosticSums<T> diagnostic_sums(const RauzyState<T>& s, Letter a, std::optional<T> z0,
                                  const PrecisionContext& ctx) {
    DiagnosticSums<T> out;
    const T qtol = num::from_ld<T>(ctx.quad_tol);
    if (z0) {
        if (!(0 < *z0 && *z0 < 1)) throw std::invalid_argument("z0 must lie in (0,1)");
        const auto orbit = relative_orbit(s, a, *z0);
        T s1(0), e(0);
        for (std::size_t i = 0; i < orbit.branch.size(); ++i) {
            const auto& br = s.base->branch(orbit.branch[i]);
            if (is_linear(br)) continue;
            const T &l = orbit.a[i], &r = orbit.b[i], &x = orbit.x[i], &z = orbit.z[i];
            const T X = x - l, Y = r - x;
            const T tol = qtol * (r - l);
            num::Integrand<T> centered = [&](const T& t) { return T(br.nonlinearity(t) * ((t - l) / X - T(1) / 2)); };
            num::Integrand<T> up = [&](const T& t) { return T(br.nonlinearity(t) * (t - l) / X); };
            num::Integrand<T> down = [&](const T& t) { return T(br.nonlinearity(t) * (r - t) / Y); };
            s1 += integral(centered, l, x, tol, cuts_inside(br, l, x), ctx);
            e += (T(1) - z) * integral(up, l, x, tol, cuts_inside(br, l, x), ctx) -
                 z * integral(down, x, r, tol, cuts_inside(br, x, r), ctx);
        }
        out.s1 = s1;
        out.e = e;
    }

    const auto& it = s.itineraries[a];
    T l = s.left(a), r = s.right(a);
    for (Letter k : it) {
        const auto& br = s.base->branch(k);
        if (!is_linear(br)) {
            const auto outer_cuts = cuts_inside(br, l, r);
            const T outer_tol = qtol * (r - l);
            // Integrals of g (t - l) and g (r - t) are integrated by parts: with g = (log f')' they
            // reduce to integrals of log f', and with g = f'' to Taylor remainders of f.
            num::Integrand<T> log_deriv = [&br](const T& t) { return br.log_deriv(t); };
            num::Integrand<T> q_integrand = [&](const T& x) {
                const T X = x - l, Y = r - x;
                const T lx = br.log_deriv(x);
                const T lo = X * lx - integral(log_deriv, l, x, qtol * X * X / 1000, cuts_inside(br, l, x), ctx);
                const T hi = integral(log_deriv, x, r, qtol * Y * Y / 1000, cuts_inside(br, x, r), ctx) - Y * lx;
                return num::abs(T(lo / (X * X) - hi / (Y * Y)));
            };
            num::Integrand<T> u_integrand = [&](const T& x) {
                const T X = x - l, Y = r - x;
                const T fx = br.eval(x), dx = br.deriv(x);
                const T lo = dx * X - (fx - br.eval(l));
                const T hi = br.eval(r) - fx - dx * Y;
                return T(br.second_deriv(x) - lo / (X * X) - hi / (Y * Y));
            };
            out.q += integral(q_integrand, l, r, outer_tol, outer_cuts, ctx);
            out.u += integral(u_integrand, l, r, outer_tol, outer_cuts, ctx);
        }
        l = br.eval(l);
        r = br.eval(r);
    }
    return out;
}

template <Scalar T>
T zqn_identity_check(const RauzyState<T>& s, Letter a, std::span<const T> grid, const PrecisionContext& ctx) {
    for (const auto& z : grid)
        if (!(0 < z && z < 1)) throw std::invalid_argument("identity grid points must lie in (0,1)");
    std::vector<T> tau(grid.size());
    parallel_points(grid.size(), [&](std::size_t j) { tau[j] = tau_at(s, a, grid[j], ctx, false).tau; });
    const T m = compute_mn(s, a, ctx, false).value;
    T worst(0);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const T& z = grid[j];
        const T K = m * exp_or_one(tau[j]);
        const T closed = z * K / (T(1) + z * (K - T(1)));
        worst = std::max(worst, num::abs(T(zoom_at(s, a, z).value - closed)));
    }
    return worst;
}

template <Scalar T>
DenjoyReport<T> denjoy_check(const RauzyState<T>& s, std::size_t points, std::size_t pairs, std::uint64_t seed) {
    const auto& f = *s.base;
    DenjoyReport<T> rep;
    rep.theta = f.log_derivative_variation();
    {
        // sampled total variation of log f' over the whole interval, jumps included
        const auto xs = num::uniform_grid(T(0), T(1), 4097);
        std::vector<num::Sample<T>> samples;
        for (std::size_t j = 0; j + 1 < xs.size(); ++j) samples.push_back({xs[j], f.branch(f.letter_at(xs[j])).log_deriv(xs[j])});
        rep.theta_grid = num::total_variation<T>(samples);
    }
    // Df^l along the itinerary of the letter, for l = 1..q
    auto log_derivs = [&](Letter a, T x) {
        std::vector<T> out;
        T acc(0);
        for (Letter k : s.itineraries[a]) {
            const auto& br = f.branch(k);
            acc += br.log_deriv(x);
            out.push_back(acc);
            x = br.eval(x);
        }
        return out;
    };
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<long double> unit(0.0L, 1.0L);
    for (Letter a = 0; a < s.size(); ++a) {
        const T l = s.left(a), w = s.lengths[a];
        for (std::size_t k = 0; k < points; ++k) {
            const T x = l + w * num::from_ld<T>(unit(rng));
            auto logs = log_derivs(a, x);
            rep.max_log_product = std::max(rep.max_log_product, num::abs(logs.back()));
            ++rep.products_checked;
        }
    }
    if (rep.theta > 0) rep.exponent_ratio = rep.max_log_product / rep.theta;

    const T overlap_tol = T(64) * num::unit_roundoff<T>();
    std::uniform_int_distribution<std::size_t> letter(0, s.size() - 1);
    for (std::size_t k = 0; k < pairs; ++k) {
        const Letter a = static_cast<Letter>(letter(rng));
        const T l = s.left(a), w = s.lengths[a];
        T x = l + w * num::from_ld<T>(unit(rng)), y = l + w * num::from_ld<T>(unit(rng));
        if (y < x) std::swap(x, y);
        if (x == y || !qn_small_check(x, y, s, overlap_tol)) {
            ++rep.pairs_rejected;
            continue;
        }
        ++rep.pairs_checked;
        auto lx = log_derivs(a, x), ly = log_derivs(a, y);
        bool bad = false;
        for (std::size_t j = 0; j < lx.size(); ++j) {
            const T diff = num::abs(T(lx[j] - ly[j]));
            rep.max_pair_log_ratio = std::max(rep.max_pair_log_ratio, diff);
            // strict for theta > 0; for theta = 0 the ratio must be exactly one
            if (rep.theta > 0 ? !(diff < rep.theta) : diff != 0) bad = true;
        }
        if (bad) ++rep.pair_violations;
    }
    return rep;
}

template <Scalar T>
std::string convergence_csv(const std::vector<ConvergenceRecord<T>>& rows, const CombinatorialPair& pair,
                            int digits) {
    std::ostringstream out;
    out << "n,letter,m_n,delta_c0,delta_c1,delta_l1,delta_l1_tv,partition_norm,log_mn,eta_n,runtime_ms\n";
    for (const auto& r : rows) {
        out << r.depth << ',' << pair.name(r.letter) << ',' << num::format(r.m_n, digits) << ','
            << num::format(r.delta.c0, digits) << ',' << num::format(r.delta.c1, digits) << ','
            << num::format(r.delta.l1, digits) << ',' << num::format(r.delta.l1_tv, digits) << ','
            << num::format(r.partition_norm, digits) << ',' << num::format(r.log_mn, digits) << ','
            << num::format(r.eta, digits) << ',' << r.runtime_ms << '\n';
    }
    return out.str();
}

std::pair<long double, long double> linear_fit(std::span<const long double> x, std::span<const long double> y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("linear fit needs two or more points");
    const long double n = static_cast<long double>(x.size());
    long double sx = 0, sy = 0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        sx += x[j];
        sy += y[j];
    }
    const long double mx = sx / n, my = sy / n;
    long double sxy = 0, sxx = 0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        sxy += (x[j] - mx) * (y[j] - my);
        sxx += (x[j] - mx) * (x[j] - mx);
    }
    if (sxx == 0) throw std::invalid_argument("linear fit needs distinct abscissae");
    const long double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

#define RENORM_INSTANTIATE(T)                                                                                   \
    template struct MobiusApproximant<T>;                                                                       \
    template MobiusApproximant<T> mobius_of_logparam(const T&);                                                 \
    template RelativeOrbit<T> relative_orbit(const RauzyState<T>&, Letter, const T&);                           \
    template MnResult<T> compute_mn(const RauzyState<T>&, Letter, const PrecisionContext&, bool);               \
    template ZoomPoint<T> zoom_at(const RauzyState<T>&, Letter, const T&);                                      \
    template ZoomSamples<T> zoom(const RauzyState<T>&, Letter, std::span<const T>);                             \
    template ZoomSamples<T> zoom_serial(const RauzyState<T>&, Letter, std::span<const T>);                      \
    template Deviation<T> deviation(const ZoomSamples<T>&, const MobiusApproximant<T>&);                        \
    template Deviation<T> deviation(const RauzyState<T>&, Letter, const MobiusApproximant<T>&,                  \
                                    const PrecisionContext&);                                                   \
    template TauDiagnostics<T> tau_diagnostics(const RauzyState<T>&, Letter, std::span<const T>,                \
                                               const PrecisionContext&, std::optional<T>);                      \
    template DiagnosticSums<T> diagnostic_sums(const RauzyState<T>&, Letter, std::optional<T>,                  \
                                               const PrecisionContext&);                                        \
    template T zqn_identity_check(const RauzyState<T>&, Letter, std::span<const T>, const PrecisionContext&);   \
    template std::string convergence_csv(const std::vector<ConvergenceRecord<T>>&, const CombinatorialPair&, int);
RENORM_FOR_EACH_SCALAR(RENORM_INSTANTIATE)
#undef RENORM_INSTANTIATE

#define RENORM_INSTANTIATE_FLOAT(T)                                                        \
    template T mobius_lipschitz_constant<T>(std::size_t, std::size_t, std::uint64_t);      \
    template DenjoyReport<T> denjoy_check(const RauzyState<T>&, std::size_t, std::size_t, std::uint64_t);
RENORM_FOR_EACH_FLOAT(RENORM_INSTANTIATE_FLOAT)
#undef RENORM_INSTANTIATE_FLOAT

}  // namespace renorm
