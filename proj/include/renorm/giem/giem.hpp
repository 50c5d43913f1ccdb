#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "renorm/giem/branch.hpp"
#include "renorm/giem/combinatorics.hpp"

namespace renorm {

struct ValidationCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;
    std::size_t discontinuities = 0;  ///< interior discontinuities of f on I

    bool ok() const;
    bool genus_one() const { return discontinuities <= 2; }
    const ValidationCheck* find(const std::string& name) const;
    std::string summary() const;
};

template <Scalar T>
struct Orbit {
    T point;                 ///< f^k(x)
    T derivative{1};         ///< (f^k)'(x), when requested
    std::vector<T> points;   ///< x_0 .. x_k, when requested
    std::vector<Letter> letters;  ///< branch used at each of the k steps, when requested
};

/// Generalized interval exchange map of I = [0,1). Construction does not
/// validate; use validate() or one of the family constructors.
template <Scalar T>
class Giem {
public:
    Giem(CombinatorialPair pair, std::vector<Branch<T>> branches);

    const CombinatorialPair& pair() const { return pair_; }
    std::size_t size() const { return branches_.size(); }
    const Branch<T>& branch(Letter a) const { return branches_.at(a); }
    const std::vector<Branch<T>>& branches() const { return branches_; }
    std::vector<T> lengths() const;

    /// Letter whose domain [l, r) contains x. Throws OutOfDomain.
    Letter letter_at(const T& x) const;
    /// Letter whose image contains y.
    Letter image_letter_at(const T& y) const;

    T eval(const T& x) const { return branches_[letter_at(x)].eval(x); }
    T deriv(const T& x) const { return branches_[letter_at(x)].deriv(x); }
    /// Throws NoSecondDerivative at declared singular points.
    T second_deriv(const T& x) const;
    T nonlinearity(const T& x) const { return branches_[letter_at(x)].nonlinearity(x); }
    T inverse(const T& y) const { return branches_[image_letter_at(y)].inverse(y); }

    Orbit<T> iterate(const T& x, std::size_t k, bool keep_orbit = false,
                     bool with_derivative = false) const;

    /// Declared singular points of every branch, sorted.
    std::vector<T> singular_points() const;
    /// Total variation of log f' over I: within-branch variation plus the
    /// jumps at interior domain boundaries.
    T log_derivative_variation() const;
    bool is_standard() const;

private:
    CombinatorialPair pair_;
    std::vector<Branch<T>> branches_;
    std::vector<T> domain_lefts_, image_lefts_;
    std::vector<Letter> domain_order_, image_order_;
};

template <Scalar T>
ValidationReport validate(const Giem<T>& f);

/// Builds branches with the given image widths, ordering domains by the top
/// row and images by the bottom row. Does not validate.
template <Scalar T>
Giem<T> assemble(const std::vector<T>& lengths, const std::vector<T>& image_widths,
                 const CombinatorialPair& pair, const std::vector<Profile<T>>& profiles);

template <Scalar T>
Giem<T> standard_iem(const std::vector<T>& lengths, const CombinatorialPair& pair);

/// Slopes for the first d-1 letters, or all d; with d-1 the last slope is
/// solved from sum(slope * length) = 1.
template <Scalar T>
Giem<T> affine_iem(const std::vector<T>& lengths, const CombinatorialPair& pair,
                   std::vector<T> slopes);

/// One Mobius coefficient per letter; image widths equal domain widths
/// unless given.
template <Scalar T>
Giem<T> moebius_iem(const std::vector<T>& lengths, const CombinatorialPair& pair,
                    const std::vector<T>& coefficients, std::vector<T> image_widths = {});

template <Scalar T>
struct KoParams {
    T amplitude;
    T center;  ///< in (0,1), relative to each branch
    T bend;
    bool zero_mean = false;
};

/// One parameter set per letter (or a single set shared by all letters).
template <Scalar T>
Giem<T> ko_iem(const std::vector<T>& lengths, const CombinatorialPair& pair,
               const std::vector<KoParams<T>>& params);

/// Lengths (1 - g, g) with g = (sqrt 5 - 1)/2, for the two-letter rotation class.
template <Scalar T>
std::vector<T> golden_lengths();

}  // namespace renorm
