#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "renorm/numerics/quadrature.hpp"
#include "renorm/partition/partition.hpp"

namespace renorm {

/// Piecewise-constant function, one value per atom of a dynamical partition.
template <Scalar T>
struct StepFunction {
    std::shared_ptr<const DynamicalPartition<T>> partition;
    std::vector<T> values;

    std::size_t depth() const { return partition->depth; }
    T operator()(const T& x) const { return values[partition->locate(x)]; }
    /// integral over [0,1)
    T integral() const;
};

/// Per-atom averages of g, each by adaptive quadrature split at `cuts`
/// (typically the singular points of f). Atoms are processed in parallel
/// when OpenMP is available; the result does not depend on the thread count.
template <Scalar T>
StepFunction<T> phi_n(const num::Integrand<T>& g, std::shared_ptr<const DynamicalPartition<T>> p,
                      const PrecisionContext& ctx, const std::vector<T>& cuts = {});

/// Serial reference for phi_n.
template <Scalar T>
StepFunction<T> phi_n_serial(const num::Integrand<T>& g, std::shared_ptr<const DynamicalPartition<T>> p,
                             const PrecisionContext& ctx, const std::vector<T>& cuts = {});

/// Averages of the nonlinearity f''/f' from the jump of log f' across each atom.
template <Scalar T>
StepFunction<T> phi_nonlinearity(const Giem<T>& f, std::shared_ptr<const DynamicalPartition<T>> p);

/// max over atoms of |closed form - quadrature| for the nonlinearity averages.
template <Scalar T>
T phi_closed_form_defect(const Giem<T>& f, std::shared_ptr<const DynamicalPartition<T>> p,
                         const PrecisionContext& ctx);

/// h = fine - coarse, as a step function on the fine partition. Throws
/// InconsistentDepths unless the depths are consecutive, NotRefining if the
/// partitions do not nest.
template <Scalar T>
StepFunction<T> h_n(const StepFunction<T>& fine, const StepFunction<T>& coarse);

/// max over coarse atoms of |average of fine over the atom - coarse value|.
template <Scalar T>
T conditional_expectation_check(const StepFunction<T>& fine, const StepFunction<T>& coarse);

/// max over atoms D of the coarse partition of |integral of h over D|.
template <Scalar T>
T increment_mean_defect(const StepFunction<T>& h, const DynamicalPartition<T>& coarse);

/// (sum over atoms of |value|^p * length)^(1/p).
template <Scalar T>
T lp_norm(const StepFunction<T>& h, const T& p);

/// Running sums of squares of the given norms.
template <Scalar T>
std::vector<T> l2_partial_sums(const std::vector<T>& norms);

/// Integral of g^2 over [0,1), by quadrature per branch split at singular points.
template <Scalar T>
T nonlinearity_square_integral(const Giem<T>& f, const PrecisionContext& ctx);

/// ||g - phi||_2 from ||g||^2 - sum |D| phi_D^2 (valid when phi holds the
/// exact atom averages of g).
template <Scalar T>
T l2_distance(const T& g_square_integral, const StepFunction<T>& phi);

template <Scalar T>
struct EtaSequence {
    std::size_t first_depth = 1;  ///< depth of values[0]
    T lambda;
    T p{2};
    std::vector<T> values;
    std::vector<T> truncation_bounds;  ///< per depth, bound on the omitted tail
    T sum_squares{0};
};

/// eta_n = sum_{m = n..N} lambda^(m - n) norms[m], truncated at the last
/// computed depth N; norms[0] belongs to first_depth. Throws BadLambda unless
/// 0 < lambda < 1.
template <Scalar T>
EtaSequence<T> eta_sequence(const std::vector<T>& norms, const T& lambda, std::size_t first_depth = 1,
                            const T& p = T(2));

struct MartingaleRow {
    std::size_t depth;
    std::string h_norm, l2_residual, eta, eta_square_sum;
};

/// depth,h_norm_p,l2_residual,eta,eta_square_sum
std::string martingale_csv(const std::vector<MartingaleRow>& rows);

}  // namespace renorm
