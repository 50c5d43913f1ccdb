#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "renorm/rauzy/rauzy.hpp"

namespace renorm {

/// f^i(I_a) for a letter a of the induction domain.
template <Scalar T>
struct Atom {
    Letter letter = 0;
    std::size_t iterate = 0;
    Letter branch = 0;  ///< base branch whose domain contains the atom
    T left, right;

    T length() const { return right - left; }
};

/// Orbits of the induction intervals up to their return times, sorted by
/// left endpoint.
template <Scalar T>
struct DynamicalPartition {
    std::size_t depth = 0;
    std::vector<Atom<T>> atoms;
    T norm{0};
    std::vector<std::vector<std::size_t>> index;  ///< index[a][i]: position of f^i(I_a)

    std::size_t size() const { return atoms.size(); }
    const Atom<T>& at(Letter a, std::size_t i) const { return atoms[index[a][i]]; }
    /// Position of the atom containing x (the last one starting at or before x).
    std::size_t locate(const T& x) const;
};

/// Gap/overlap allowance used by the tiling checks: zero for rationals,
/// 2^(8 - bits) times the atom count otherwise.
template <Scalar T>
T tiling_tolerance(std::size_t atoms);

/// Iterates both endpoints of every induction interval along its itinerary.
/// Throws TilingViolation if the atoms fail to tile [0,1).
template <Scalar T>
DynamicalPartition<T> build_partition(const RauzyState<T>& s);

template <Scalar T>
T partition_norm(const DynamicalPartition<T>& p);

/// Largest k-step ratio norms[n + k] / norms[n] over the sequence, the smallest
/// lambda with norms[n + k] <= lambda norms[n] throughout. Throws
/// std::invalid_argument when k is 0 or the sequence is shorter than k + 1.
template <Scalar T>
T k_step_decay(const std::vector<T>& norms, std::size_t k);

template <Scalar T>
struct Refinement {
    std::vector<std::size_t> parent;     ///< per fine atom, the coarse atom containing it
    std::vector<std::size_t> preserved;  ///< fine atoms equal to their parent
    std::vector<std::size_t> fresh;      ///< fine atoms properly inside their parent
    /// Whether the geometric split matches the one predicted from the step type.
    bool matches_step = false;
};

/// Matches the atoms of the depth n+1 partition with those of depth n.
/// Throws InconsistentDepths unless fine.depth == coarse.depth + 1 and
/// NotRefining if some fine atom leaves its parent.
template <Scalar T>
Refinement<T> split_preserved_new(const DynamicalPartition<T>& coarse, const DynamicalPartition<T>& fine,
                                  const StepLabel& step);

/// Parent lookup for any pair of depths (coarse.depth <= fine.depth).
template <Scalar T>
std::vector<std::size_t> parents(const DynamicalPartition<T>& coarse, const DynamicalPartition<T>& fine);

/// max over letters a and coarse atoms D of
///   | (measure of the a-tower of the fine partition inside D) / |D| - (measure of the a-tower) |.
template <Scalar T>
T equidistribution_discrepancy(const DynamicalPartition<T>& coarse, const DynamicalPartition<T>& fine);

/// Rebuilds the depth-r partition from the base map of s.
template <Scalar T>
T equidistribution_discrepancy(const RauzyState<T>& s, std::size_t r);

/// True iff f^i(J), 0 <= i < q, are pairwise disjoint for J = (u, v), where
/// q is the largest return time of s. Overlaps shorter than tol are ignored.
template <Scalar T>
bool qn_small_check(const T& u, const T& v, const RauzyState<T>& s, const T& tol = T(0));

/// depth,letter,iterate,left,right,length
template <Scalar T>
std::string partition_csv(const DynamicalPartition<T>& p, const CombinatorialPair& pair, int digits);

}  // namespace renorm
