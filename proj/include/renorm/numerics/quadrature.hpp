#pragma once

// Globally adaptive quadrature. Every panel is estimated twice, once as a
// whole and once as the sum of its two halves; the disagreement is the panel
// error, and the panel with the largest error is bisected until the total
// falls below the requested tolerance. Floating types use an n-point
// Gauss-Legendre rule (nodes generated at the working precision), exact
// rationals use Simpson's rule so that polynomial integrands of degree <= 3
// come out exactly.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "renorm/numerics/precision.hpp"
#include "renorm/numerics/scalar.hpp"

namespace renorm::num {

template <Scalar T>
using Integrand = std::function<T(const T&)>;

template <Scalar T>
struct QuadratureResult {
    T value;
    T error_estimate;
    std::size_t panels = 0;
};

/// Integral of g over [u, v] with absolute error estimate <= tol.
/// Interior `breakpoints` (declared singular points) always become panel
/// boundaries, so g is never sampled there. Throws NonConvergent past
/// `max_panels` bisections.
template <Scalar T>
QuadratureResult<T> integrate(const Integrand<T>& g, const T& u, const T& v, const T& tol,
                              std::span<const T> breakpoints = {},
                              std::size_t max_panels = 200000);

/// Convenience overload: tolerance and cap taken from the context.
template <Scalar T>
T integrate(const Integrand<T>& g, const T& u, const T& v, const PrecisionContext& ctx,
            std::span<const T> breakpoints = {});

/// Gauss-Legendre nodes and weights on [-1, 1] at the current precision of T.
template <Scalar T>
struct GaussLegendre {
    std::vector<T> nodes;
    std::vector<T> weights;
};

template <Scalar T>
const GaussLegendre<T>& gauss_legendre(std::size_t order);

inline constexpr std::size_t kDefaultGaussOrder = 20;

}  // namespace renorm::num
