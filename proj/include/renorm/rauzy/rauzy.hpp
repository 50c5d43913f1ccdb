#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "renorm/giem/giem.hpp"

namespace renorm {

/// Type and the two compared letters of one induction step.
struct StepLabel {
    int type = 0;  ///< 0 when the last top interval wins
    Letter winner = 0;
    Letter loser = 0;

    /// Last letter of row e before the step (alpha(e) in the usual notation).
    Letter last(int row) const { return row == type ? winner : loser; }
};

template <Scalar T>
struct StepRecord : StepLabel {
    T new_domain_length;
    std::vector<T> new_lengths;
    CombinatorialPair new_pair;
    std::vector<BigInt> new_return_times;
};

/// Induction state at depth n: domain [0, length), the partition into
/// intervals of the given lengths ordered by the top row, the image widths
/// ordered by the bottom row, and for each letter the sequence of base-map
/// branches visited before the first return.
template <Scalar T>
struct RauzyState {
    std::shared_ptr<const Giem<T>> base;
    std::size_t depth = 0;
    T length;
    std::vector<T> lengths;
    std::vector<T> image_widths;
    CombinatorialPair pair;
    std::vector<BigInt> return_times;
    std::vector<StepRecord<T>> history;
    std::vector<std::vector<Letter>> itineraries;

    std::size_t size() const { return lengths.size(); }
    T left(Letter a) const;
    T right(Letter a) const { return left(a) + lengths[a]; }
    T image_left(Letter a) const;
    T image_right(Letter a) const { return image_left(a) + image_widths[a]; }
    /// Letter whose interval contains x; OutOfDomain outside [0, length).
    Letter letter_at(const T& x) const;
    std::size_t return_time(Letter a) const { return itineraries[a].size(); }
    /// max over letters of the return time
    std::size_t max_return_time() const;
    std::vector<StepLabel> labels() const;

    /// Orbit of x under the base branches along the itinerary of a
    /// (no lookup, so endpoints are handled by branch closure).
    T follow(Letter a, T x) const;
    /// Inverse of follow on the image of a.
    T follow_back(Letter a, T y) const;
};

template <Scalar T>
RauzyState<T> initial_state(std::shared_ptr<const Giem<T>> f);

/// One Rauzy-Veech step. Throws NotRenormalizable when the compared lengths
/// agree (exactly for rationals, within 2^(8 - mantissa bits) otherwise).
template <Scalar T>
RauzyState<T> step(const RauzyState<T>& s);

/// n steps from the depth-0 state of a valid genus-one map.
template <Scalar T>
RauzyState<T> renormalize(std::shared_ptr<const Giem<T>> f, std::size_t n);
template <Scalar T>
RauzyState<T> renormalize(const Giem<T>& f, std::size_t n) {
    return renormalize(std::make_shared<const Giem<T>>(f), n);
}

/// f^q(x) with q the return time of the letter containing x, by iterating
/// the base map. With check_first_return the intermediate points are
/// required to avoid the domain (std::logic_error otherwise).
template <Scalar T>
T eval_return_map(const RauzyState<T>& s, const T& x, bool check_first_return = false);

template <Scalar T>
struct ConnectionReport {
    bool found = false;
    std::size_t iterate = 0;  ///< m with f^m(left end of from) = left end of to
    Letter from = 0;
    Letter to = 0;
    T distance{0};
    std::size_t depth_checked = 0;
    std::string describe(const CombinatorialPair& pair) const;
};

/// Searches f^m(left end of I_a) = left end of I_b for 1 <= m <= depth, all a
/// and all b other than the leftmost letter. Points closer than tol count as
/// equal (tol is ignored for rationals).
template <Scalar T>
ConnectionReport<T> check_no_connection(const Giem<T>& f, std::size_t depth, const T& tol);

enum class ChainReading {
    Literal,          ///< chain index pattern exactly as printed in the definition
    IndexConsistent,  ///< loser at step m equals winner at step m + 1
};

std::string to_string(ChainReading reading);

struct KBoundedWitness {
    std::size_t n;
    Letter beta;
    Letter gamma;
};

struct KBoundedReport {
    bool passed = false;
    std::size_t k = 0;
    ChainReading reading = ChainReading::IndexConsistent;
    std::size_t window_first = 0, window_last = 0;  ///< checked n range
    std::size_t failure_count = 0;
    std::vector<KBoundedWitness> failures;          ///< first few failures
    std::optional<std::size_t> minimal_k;           ///< smallest passing k <= history/2
};

/// Checks k-bounded combinatorics on the recorded history for every n whose
/// search window lies inside it. Throws HistoryTooShort if history < 2k.
KBoundedReport check_k_bounded(std::span<const StepLabel> history, std::size_t alphabet_size,
                               std::size_t k, ChainReading reading = ChainReading::IndexConsistent);

/// Smallest passing k with 2k <= history length, if any.
std::optional<std::size_t> minimal_k(std::span<const StepLabel> history, std::size_t alphabet_size,
                                     ChainReading reading = ChainReading::IndexConsistent);

/// For a one-parameter family of two-letter maps, bisects the parameter in
/// [lo, hi] until the first `depth` induction steps alternate in type as for
/// the golden rotation (types 0, 1, 0, 1, ...). Assumes the rotation number
/// is monotone in the parameter; throws InvalidFamilyParams when the bracket
/// does not straddle the golden combinatorics.
template <Scalar T>
T tune_to_golden(const std::function<Giem<T>(const T&)>& family, T lo, T hi, std::size_t depth);

/// depth,type,winner,loser,domain_length,q_<letter>... one row per depth.
template <Scalar T>
std::string history_csv(const RauzyState<T>& s, int digits);

}  // namespace renorm
