#include "renorm/giem/branch.hpp"

#include <algorithm>
#include <sstream>

namespace renorm {

template <Scalar T>
Profile<T> Profile<T>::linear() {
    return Profile{};
}

template <Scalar T>
Profile<T> Profile<T>::mobius(const T& m) {
    if (!(m > 0)) throw std::invalid_argument("Mobius coefficient must be positive");
    Profile p;
    if (m == 1) return p;
    p.kind_ = Kind::Mobius;
    p.m_ = m;
    return p;
}

template <Scalar T>
Profile<T> Profile<T>::ko(const T& amplitude, const T& u0, const T& bend, bool zero_mean) {
    if (!(T(0) < u0 && u0 < T(1))) throw std::invalid_argument("KO center must lie in (0,1)");
    Profile p;
    p.kind_ = Kind::KO;
    p.c_ = amplitude / 2;
    p.u0_ = u0;
    if (p.c_ != 0) {
        p.w0_ = p.w(T(0));
        p.dw_total_ = p.w(T(1)) - p.w0_;
    }
    p.b_ = zero_mean ? T(-p.c_ * (p.dw(T(1)) - p.dw(T(0))) / 2) : bend;
    if (p.c_ == 0 && p.b_ == 0) return linear();
    return p;
}

template <Scalar T>
std::string Profile<T>::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case Kind::Linear: os << "linear"; break;
        case Kind::Mobius: os << "mobius(m=" << num::format(m_, 12) << ")"; break;
        case Kind::KO:
            os << "ko(amplitude=" << num::format(T(2 * c_), 12) << ", center=" << num::format(u0_, 12)
               << ", bend=" << num::format(b_, 12) << ")";
            break;
    }
    return os.str();
}

template <Scalar T>
T Profile<T>::w(const T& u) const {
    T s = u - u0_;
    if (s == 0) return T(0);
    return s * s * num::log(num::abs(s));
}

template <Scalar T>
T Profile<T>::dw(const T& u) const {
    T s = u - u0_;
    if (s == 0 || c_ == 0) return T(0);
    return 2 * s * num::log(num::abs(s)) + s;
}

template <Scalar T>
T Profile<T>::value(const T& u) const {
    switch (kind_) {
        case Kind::Linear: return u;
        case Kind::Mobius: return m_ * u / (1 + (m_ - 1) * u);
        case Kind::KO: {
            T g = u + b_ * u * (u - 1);
            if (c_ != 0) g += c_ * (w(u) - w0_ - u * dw_total_);
            return g;
        }
    }
    return u;
}

template <Scalar T>
T Profile<T>::slope(const T& u) const {
    switch (kind_) {
        case Kind::Linear: return T(1);
        case Kind::Mobius: {
            T den = 1 + (m_ - 1) * u;
            return m_ / (den * den);
        }
        case Kind::KO: {
            T s = 1 + b_ * (2 * u - 1);
            if (c_ != 0) s += c_ * (dw(u) - dw_total_);
            return s;
        }
    }
    return T(1);
}

template <Scalar T>
T Profile<T>::curvature(const T& u) const {
    switch (kind_) {
        case Kind::Linear: return T(0);
        case Kind::Mobius: {
            T den = 1 + (m_ - 1) * u;
            return -2 * m_ * (m_ - 1) / (den * den * den);
        }
        case Kind::KO: {
            if (c_ == 0) return 2 * b_;
            T s = u - u0_;
            if (s == 0) throw NoSecondDerivative("curvature is unbounded at the profile center");
            return c_ * (2 * num::log(num::abs(s)) + 3) + 2 * b_;
        }
    }
    return T(0);
}

template <Scalar T>
T Profile<T>::inverse(const T& v) const {
    if (v == 0 || v == 1) return v;
    switch (kind_) {
        case Kind::Linear: return v;
        case Kind::Mobius: return v / (m_ - (m_ - 1) * v);
        case Kind::KO: break;
    }
    if constexpr (is_exact_v<T>) {
        if (c_ == 0) {
            // b u^2 + (1 - b) u - v = 0, root in [0,1]
            if (b_ == 0) return v;
            throw Inexact("inverse of a quadratic profile is not rational in general");
        }
        throw Inexact("KO profile needs floating arithmetic");
    } else {
        const T eps = num::unit_roundoff<T>();
        T lo(0), hi(1), x = v;
        for (int iter = 0; iter < 400; ++iter) {
            T fx = value(x) - v;
            if (fx == 0) return x;
            if (fx < 0)
                lo = x;
            else
                hi = x;
            T next = x - fx / slope(x);
            if (!(lo < next && next < hi)) next = (lo + hi) / 2;
            T step = num::abs(T(next - x));
            x = next;
            if (step <= 2 * eps || hi - lo <= 2 * eps) return x;
        }
        throw NonConvergent("profile inversion did not converge");
    }
}

template <Scalar T>
std::optional<T> Profile<T>::singular_point() const {
    if (kind_ == Kind::KO && c_ != 0) return u0_;
    return std::nullopt;
}

template <Scalar T>
std::vector<T> Profile<T>::slope_critical_points() const {
    std::vector<T> pts;
    if (kind_ != Kind::KO || c_ == 0) return pts;
    // curvature vanishes where log|u - u0| = -(3 + 2b/c) / 2
    T r = num::exp(T(-(3 + 2 * b_ / c_) / 2));
    for (T p : {T(u0_ - r), T(u0_ + r)})
        if (T(0) < p && p < T(1)) pts.push_back(p);
    return pts;
}

template <Scalar T>
T Profile<T>::min_slope() const {
    switch (kind_) {
        case Kind::Linear: return T(1);
        case Kind::Mobius: return m_ < 1 ? m_ : T(1 / m_);
        case Kind::KO: break;
    }
    T best = std::min(slope(T(0)), slope(T(1)));
    for (const T& p : slope_critical_points()) best = std::min(best, slope(p));
    return best;
}

template <Scalar T>
T Profile<T>::log_slope_variation() const {
    switch (kind_) {
        case Kind::Linear: return T(0);
        case Kind::Mobius: return 2 * num::abs(num::log(m_));
        case Kind::KO: break;
    }
    std::vector<T> pts{T(0)};
    for (const T& p : slope_critical_points()) pts.push_back(p);
    pts.push_back(T(1));
    std::sort(pts.begin(), pts.end());
    T tv(0);
    for (std::size_t j = 0; j + 1 < pts.size(); ++j)
        tv += num::abs(T(num::log(slope(pts[j + 1])) - num::log(slope(pts[j]))));
    return tv;
}

template <Scalar T>
T Branch<T>::eval(const T& x) const {
    if (x == left) return image_left;
    if (x == right) return image_right;
    if (profile.kind() == Profile<T>::Kind::Linear) return image_left + (x - left) * image_width() / width();
    return image_left + image_width() * profile.value(to_unit(x));
}

template <Scalar T>
T Branch<T>::deriv(const T& x) const {
    return image_width() / width() * profile.slope(to_unit(x));
}

template <Scalar T>
T Branch<T>::second_deriv(const T& x) const {
    if (profile.kind() == Profile<T>::Kind::Linear) return T(0);
    return image_width() / (width() * width()) * profile.curvature(to_unit(x));
}

template <Scalar T>
T Branch<T>::nonlinearity(const T& x) const {
    if (profile.kind() == Profile<T>::Kind::Linear) return T(0);
    T u = to_unit(x);
    return profile.curvature(u) / (profile.slope(u) * width());
}

template <Scalar T>
T Branch<T>::log_deriv(const T& x) const {
    return num::log(deriv(x));
}

template <Scalar T>
T Branch<T>::inverse(const T& y) const {
    if (y == image_left) return left;
    if (y == image_right) return right;
    if (profile.kind() == Profile<T>::Kind::Linear) return left + (y - image_left) * width() / image_width();
    return left + width() * profile.inverse((y - image_left) / image_width());
}

template <Scalar T>
std::vector<T> Branch<T>::singular_points() const {
    std::vector<T> pts;
    if (auto u = profile.singular_point()) pts.push_back(left + *u * width());
    return pts;
}

#define RENORM_INSTANTIATE_BRANCH(T) \
    template class Profile<T>;       \
    template struct Branch<T>;
RENORM_FOR_EACH_SCALAR(RENORM_INSTANTIATE_BRANCH)
#undef RENORM_INSTANTIATE_BRANCH

}  // namespace renorm
