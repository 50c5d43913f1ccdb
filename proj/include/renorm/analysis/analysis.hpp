#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "renorm/numerics/quadrature.hpp"
#include "renorm/partition/partition.hpp"

namespace renorm {

/// Orbit of an induction interval [a, b) and of x = a + z0 (b - a) up to the
/// return time; z[i] is the position of x_i inside [a_i, b_i].
template <Scalar T>
struct RelativeOrbit {
    Letter letter = 0;
    std::size_t depth = 0;
    T z0;
    std::vector<T> a, b, x, z;  ///< q + 1 entries each
    std::vector<Letter> branch; ///< q entries: branch applied at step i
};

/// Throws std::invalid_argument outside [0,1] and TilingViolation when x_i
/// leaves [a_i, b_i] (precision exhausted).
template <Scalar T>
RelativeOrbit<T> relative_orbit(const RauzyState<T>& s, Letter a, const T& z0);

/// x -> m x / (1 + (m - 1) x) on [0,1].
template <Scalar T>
struct MobiusApproximant {
    T m{1};

    T operator()(const T& x) const;
    T deriv(const T& x) const;
    T second_deriv(const T& x) const;
    /// Coefficient of the Mobius map through (0,0), (1/2, y), (1,1).
    static MobiusApproximant through_half(const T& y);
};

/// M_a with e^(-a/2) as coefficient; a = 0 is the identity.
template <Scalar T>
MobiusApproximant<T> mobius_of_logparam(const T& a);

/// Sup over sampled pairs |a|, |b| <= 1 of ||M_a - M_b||_C2 / |a - b|, with
/// the C2 norm taken as the largest of the sup norms of the difference and its
/// first two derivatives on a grid.
template <Scalar T>
T mobius_lipschitz_constant(std::size_t pairs, std::size_t grid_points, std::uint64_t seed);

template <Scalar T>
struct MnResult {
    T value;  ///< closed form (Df^q(a) / Df^q(b))^(1/2)
    std::optional<T> quadrature;
    T defect{0};
};

/// m_n for the letter a; with_quadrature also integrates f''/(2 f') over
/// every atom of the orbit.
template <Scalar T>
MnResult<T> compute_mn(const RauzyState<T>& s, Letter a, const PrecisionContext& ctx,
                       bool with_quadrature = true);

template <Scalar T>
struct ZoomPoint {
    T z0, value, deriv, second;
    bool second_available = true;  ///< false when f'' is undefined on the orbit
};

/// Z, DZ and D^2 Z of the zoomed return map at z0.
template <Scalar T>
ZoomPoint<T> zoom_at(const RauzyState<T>& s, Letter a, const T& z0);

template <Scalar T>
struct ZoomSamples {
    std::vector<T> z, value, deriv, second;
    bool second_from_grid = false;  ///< some D^2 Z values came from differentiating DZ
};

/// Zoom on the given grid, points in parallel.
template <Scalar T>
ZoomSamples<T> zoom(const RauzyState<T>& s, Letter a, std::span<const T> grid);

/// Serial reference for zoom.
template <Scalar T>
ZoomSamples<T> zoom_serial(const RauzyState<T>& s, Letter a, std::span<const T> grid);

template <Scalar T>
struct Deviation {
    T c0{0}, c1{0}, l1{0}, l1_tv{0};
    std::size_t grid_points = 0;  ///< size of the finer grid
    bool second_from_grid = false;
};

/// Sup norms of Z - F and DZ - DF, L1 norm of D^2 Z - D^2 F (trapezoid) and
/// the total variation of DZ - DF, on a grid of ctx.grid_points points and on
/// its refinement with 2 ctx.grid_points - 1 points. Reports the finer grid.
/// Throws GridInadequate when a sup above the noise floor moves by more than 10%.
template <Scalar T>
Deviation<T> deviation(const RauzyState<T>& s, Letter a, const MobiusApproximant<T>& F,
                       const PrecisionContext& ctx);

/// Same measurements for samples already in hand (no refinement check).
template <Scalar T>
Deviation<T> deviation(const ZoomSamples<T>& zs, const MobiusApproximant<T>& F);

template <Scalar T>
struct TauDiagnostics {
    Letter letter = 0;
    std::size_t depth = 0;
    std::vector<T> z0, tau, dtau, d2tau;
    /// per iterate, at the grid point closest to 1/2
    std::vector<T> A, N, psi, V, dA, d2A;
    T max_tau{0};            ///< max |tau|
    T max_weighted_dtau{0};  ///< max z0 (1 - z0) |tau'|
    T int_dtau{0};           ///< integral of |tau'|
    T int_weighted_d2tau{0}; ///< integral of z0 (1 - z0) |tau''|
    T decomposition_bound{0};///< max over the grid of |log m| + sum |A_i| + sum A_i^2
    T anchor_residual{0};    ///< max |z_{i+1} - z_i (1 + A_i (z_i - 1))|
    T log_mn{0};
};

/// tau_n and its derivatives on the grid (points in (0,1)), with A_i from
/// quadrature. Throws SignConventionViolation when the recursion anchor fails
/// by more than anchor_tol (default 1e3 quad_tol).
template <Scalar T>
TauDiagnostics<T> tau_diagnostics(const RauzyState<T>& s, Letter a, std::span<const T> grid,
                                  const PrecisionContext& ctx, std::optional<T> anchor_tol = std::nullopt);

template <Scalar T>
struct DiagnosticSums {
    std::optional<T> s1, e;  ///< pointwise sums, when z0 was given
    T q{0}, u{0};
};

template <Scalar T>
DiagnosticSums<T> diagnostic_sums(const RauzyState<T>& s, Letter a, std::optional<T> z0,
                                  const PrecisionContext& ctx);

/// max over the grid of |Z(z0) - z0 K / (1 + z0 (K - 1))|, K = m_n e^tau(z0).
template <Scalar T>
T zqn_identity_check(const RauzyState<T>& s, Letter a, std::span<const T> grid, const PrecisionContext& ctx);

template <Scalar T>
struct DenjoyReport {
    T theta{0};               ///< Var log f'
    T theta_grid{0};          ///< same from a sampled grid, as a cross-check
    T max_log_product{0};     ///< max |log Df^q(x)| over samples
    T exponent_ratio{0};      ///< max_log_product / theta (0 when theta = 0)
    T max_pair_log_ratio{0};  ///< max |log Df^l(x) / Df^l(y)|
    std::size_t products_checked = 0;
    std::size_t pairs_checked = 0;
    std::size_t pairs_rejected = 0;  ///< samples that were not q_n-small
    std::size_t pair_violations = 0;
    bool ok() const { return pair_violations == 0; }
};

/// Samples `points` base points per letter for the return-map products and
/// `pairs` pairs (x, y) inside single induction intervals whose span is
/// q_n-small; Df^l ratios are checked for 1 <= l <= return time.
template <Scalar T>
DenjoyReport<T> denjoy_check(const RauzyState<T>& s, std::size_t points, std::size_t pairs, std::uint64_t seed);

/// Depth-sweep row; all deviations are non-negative.
template <Scalar T>
struct ConvergenceRecord {
    std::size_t depth = 0;
    Letter letter = 0;
    T m_n{1};
    Deviation<T> delta;
    T partition_norm{0};
    T log_mn{0};
    T eta{0};
    double runtime_ms = 0;
};

/// n,letter,m_n,delta_c0,delta_c1,delta_l1,delta_l1_tv,partition_norm,log_mn,eta_n,runtime_ms
template <Scalar T>
std::string convergence_csv(const std::vector<ConvergenceRecord<T>>& rows, const CombinatorialPair& pair,
                            int digits);

/// Least-squares slope and intercept of y against x.
std::pair<long double, long double> linear_fit(std::span<const long double> x, std::span<const long double> y);

}  // namespace renorm
