#pragma once

#include <optional>
#include <string>
#include <vector>

#include "renorm/numerics/scalar.hpp"

namespace renorm {

/// Increasing homeomorphism g of [0,1] with g(0) = 0 and g(1) = 1. A branch
/// is this profile transported affinely onto its domain and image.
template <Scalar T>
class Profile {
public:
    enum class Kind { Linear, Mobius, KO };

    /// g(u) = u
    static Profile linear();
    /// g(u) = m u / (1 + (m - 1) u), m > 0
    static Profile mobius(const T& m);
    /// g(u) = u + c [w(u) - w(0) - u (w(1) - w(0))] + bend u (u - 1)
    /// with w(u) = (u - u0)^2 log|u - u0| and c = amplitude / 2, so that
    /// g''/g' behaves like amplitude * log|u - u0| next to u0.
    /// With zero_mean the bend is replaced by the value making g'(0) = g'(1).
    /// amplitude = 0 and a vanishing bend give the linear profile.
    static Profile ko(const T& amplitude, const T& u0, const T& bend, bool zero_mean);

    Kind kind() const { return kind_; }
    std::string describe() const;

    T value(const T& u) const;
    T slope(const T& u) const;
    /// Throws NoSecondDerivative at the singular point.
    T curvature(const T& u) const;
    T inverse(const T& v) const;

    /// Point of [0,1] where the curvature is unbounded, if any.
    std::optional<T> singular_point() const;
    /// Minimum of g' over [0,1] (exact location of the extremum, not sampled).
    T min_slope() const;
    /// Total variation of log g' over [0,1], from its monotone pieces.
    T log_slope_variation() const;

    const T& mobius_coefficient() const { return m_; }
    const T& bend() const { return b_; }

private:
    T w(const T& u) const;
    T dw(const T& u) const;
    /// Points of (0,1) where g' has a local extremum.
    std::vector<T> slope_critical_points() const;

    Kind kind_ = Kind::Linear;
    T m_{1};
    T c_{0}, b_{0}, u0_{0};
    T w0_{0}, dw_total_{0};
};

/// One piece of a g.i.e.m.: the profile carried from [left, right) onto
/// [image_left, image_right).
template <Scalar T>
struct Branch {
    T left, right;
    T image_left, image_right;
    Profile<T> profile;

    T width() const { return right - left; }
    T image_width() const { return image_right - image_left; }
    bool contains(const T& x) const { return !(x < left) && x < right; }

    /// Accepts the closed interval; eval(right) is the image's right end.
    T eval(const T& x) const;
    T deriv(const T& x) const;
    T second_deriv(const T& x) const;
    /// f''/f'
    T nonlinearity(const T& x) const;
    T log_deriv(const T& x) const;
    /// Preimage of y in [image_left, image_right].
    T inverse(const T& y) const;
    std::vector<T> singular_points() const;

    T to_unit(const T& x) const { return (x - left) / width(); }
};

}  // namespace renorm
