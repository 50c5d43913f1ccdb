#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "renorm/numerics/scalar.hpp"

namespace renorm::num {

template <Scalar T>
struct Sample {
    T x;
    T y;
};

/// Sum of |y[j+1] - y[j]|. Throws BadGrid unless x is strictly increasing
/// and there are at least two samples.
template <Scalar T>
T total_variation(std::span<const Sample<T>> samples);

/// Central differences inside, second-order one-sided differences at the ends.
/// Needs at least three strictly increasing abscissae.
template <Scalar T>
std::vector<Sample<T>> grid_derivative(std::span<const Sample<T>> samples);

/// n equally spaced points from u to v inclusive (n >= 2).
template <Scalar T>
std::vector<T> uniform_grid(const T& u, const T& v, std::size_t n);

}  // namespace renorm::num
