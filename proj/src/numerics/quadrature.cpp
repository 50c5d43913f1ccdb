#include "renorm/numerics/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <utility>

namespace renorm::num {

namespace {

template <Scalar T>
bool finite(const T& x) {
    if constexpr (std::is_same_v<T, long double>)
        return std::isfinite(x);
    else if constexpr (std::is_same_v<T, Extended>)
        return boost::multiprecision::isfinite(x);
    else
        return true;
}

// Legendre P_n and its derivative at x by the three-term recurrence.
template <Scalar T>
std::pair<T, T> legendre(std::size_t n, const T& x) {
    T p0(1), p1 = x;
    for (std::size_t k = 2; k <= n; ++k) {
        T p2 = (T(2 * k - 1) * x * p1 - T(k - 1) * p0) / T(k);
        p0 = std::move(p1);
        p1 = std::move(p2);
    }
    T dp = T(n) * (x * p1 - p0) / (x * x - T(1));
    return {p1, dp};
}

template <Scalar T>
GaussLegendre<T> build_rule(std::size_t n) {
    GaussLegendre<T> rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const T eps = unit_roundoff<T>();
    const long double pi = 3.141592653589793238462643383279502884L;
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        T x = from_ld<T>(std::cos(pi * (static_cast<long double>(i) + 0.75L) /
                                  (static_cast<long double>(n) + 0.5L)));
        for (int iter = 0; iter < 100; ++iter) {
            auto [p, dp] = legendre(n, x);
            T dx = p / dp;
            x -= dx;
            if (num::abs(dx) <= eps * 4) break;
        }
        auto [p, dp] = legendre(n, x);
        T w = T(2) / ((T(1) - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = T(0);
    return rule;
}

template <Scalar T>
struct Panel {
    T a, b;
    T value;       // sum of the two half-panel estimates
    T half_left;   // estimates reused as "whole" when the panel is split
    T half_right;
    long double error;
};

template <Scalar T>
class Integrator {
public:
    Integrator(const Integrand<T>& g, std::size_t order) : g_(g) {
        if constexpr (!is_exact_v<T>) rule_ = &gauss_legendre<T>(order);
    }

    T rule(const T& a, const T& b) const {
        if constexpr (is_exact_v<T>) {
            T m = (a + b) / 2;
            return (b - a) / 6 * (eval(a) + 4 * eval(m) + eval(b));
        } else {
            T half = (b - a) / 2, mid = (a + b) / 2;
            T sum(0);
            for (std::size_t i = 0; i < rule_->nodes.size(); ++i)
                sum += rule_->weights[i] * eval(mid + half * rule_->nodes[i]);
            return sum * half;
        }
    }

    Panel<T> panel(const T& a, const T& b, const T& whole) const {
        T m = (a + b) / 2;
        Panel<T> p{a, b, T(0), rule(a, m), rule(m, b), 0.0L};
        p.value = p.half_left + p.half_right;
        p.error = to_ld(num::abs(T(whole - p.value)));
        return p;
    }

private:
    T eval(const T& x) const {
        T y = g_(x);
        if (!finite(y)) throw NonConvergent("integrand is not finite at " + format(x, 20));
        return y;
    }

    const Integrand<T>& g_;
    const GaussLegendre<T>* rule_ = nullptr;
};

}  // namespace

template <Scalar T>
const GaussLegendre<T>& gauss_legendre(std::size_t order) {
    static std::mutex mutex;
    static std::map<std::pair<std::size_t, unsigned>, std::unique_ptr<GaussLegendre<T>>> cache;
    std::lock_guard lock(mutex);
    auto key = std::make_pair(order, mantissa_bits<T>());
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, std::make_unique<GaussLegendre<T>>(build_rule<T>(order))).first;
    return *it->second;
}

template <Scalar T>
QuadratureResult<T> integrate(const Integrand<T>& g, const T& u, const T& v, const T& tol,
                              std::span<const T> breakpoints, std::size_t max_panels) {
    if (u == v) return {T(0), T(0), 0};
    if (v < u) {
        auto r = integrate<T>(g, v, u, tol, breakpoints, max_panels);
        r.value = -r.value;
        return r;
    }
    std::vector<T> cuts{u};
    for (const T& c : breakpoints)
        if (u < c && c < v) cuts.push_back(c);
    cuts.push_back(v);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    Integrator<T> integrator(g, kDefaultGaussOrder);
    auto worse = [](const Panel<T>& x, const Panel<T>& y) { return x.error < y.error; };
    std::vector<Panel<T>> heap;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        heap.push_back(integrator.panel(cuts[i], cuts[i + 1], integrator.rule(cuts[i], cuts[i + 1])));
    std::make_heap(heap.begin(), heap.end(), worse);

    // Running sums drift once large early errors have been subtracted, so they
    // are recomputed from scratch before the loop is allowed to stop.
    long double total = 0, mass = 0, reference = 0;
    auto recompute = [&]() {
        total = mass = 0;
        for (const auto& p : heap) {
            total += p.error;
            mass += std::fabs(to_ld(p.value));
        }
        reference = total;
    };
    recompute();
    // The halving estimate never drops below roundoff, so the target is floored
    // at a small multiple of it relative to the integral's magnitude.
    const long double eps = to_ld(unit_roundoff<T>());
    const long double target = to_ld(tol);
    auto done = [&]() { return total <= std::max(target, 64 * eps * mass); };

    std::size_t panels = heap.size();
    while (!done() || (recompute(), !done())) {
        if (panels >= max_panels)
            throw NonConvergent("quadrature did not reach tolerance " + format(tol, 6) +
                                " within " + std::to_string(max_panels) + " panels (estimate " +
                                format(from_ld<T>(total), 6) + ")");
        std::pop_heap(heap.begin(), heap.end(), worse);
        Panel<T> p = std::move(heap.back());
        heap.pop_back();
        total -= p.error;
        mass -= std::fabs(to_ld(p.value));
        T m = (p.a + p.b) / 2;
        if (!(p.a < m && m < p.b))
            throw NonConvergent("quadrature panel collapsed below working precision");
        Panel<T> left = integrator.panel(p.a, m, p.half_left);
        Panel<T> right = integrator.panel(m, p.b, p.half_right);
        total += left.error + right.error;
        mass += std::fabs(to_ld(left.value)) + std::fabs(to_ld(right.value));
        heap.push_back(std::move(left));
        std::push_heap(heap.begin(), heap.end(), worse);
        heap.push_back(std::move(right));
        std::push_heap(heap.begin(), heap.end(), worse);
        ++panels;
        // the drift is relative to the largest total seen since the last recompute
        if (total < reference * 1e-10L) recompute();
    }

    std::vector<Panel<T>>& all = heap;
    std::sort(all.begin(), all.end(), [](const Panel<T>& x, const Panel<T>& y) { return x.a < y.a; });
    QuadratureResult<T> result{T(0), T(0), all.size()};
    for (const auto& p : all) {
        result.value += p.value;
        result.error_estimate += from_ld<T>(p.error);
    }
    return result;
}

template <Scalar T>
T integrate(const Integrand<T>& g, const T& u, const T& v, const PrecisionContext& ctx,
            std::span<const T> breakpoints) {
    return integrate<T>(g, u, v, from_ld<T>(ctx.quad_tol), breakpoints, ctx.max_panels).value;
}

#define RENORM_INSTANTIATE_QUAD(T)                                                              \
    template QuadratureResult<T> integrate<T>(const Integrand<T>&, const T&, const T&, const T&, \
                                              std::span<const T>, std::size_t);                  \
    template T integrate<T>(const Integrand<T>&, const T&, const T&, const PrecisionContext&,    \
                            std::span<const T>);
RENORM_FOR_EACH_SCALAR(RENORM_INSTANTIATE_QUAD)
#undef RENORM_INSTANTIATE_QUAD

template const GaussLegendre<long double>& gauss_legendre<long double>(std::size_t);
template const GaussLegendre<Extended>& gauss_legendre<Extended>(std::size_t);

}  // namespace renorm::num
