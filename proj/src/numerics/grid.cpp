#include "renorm/numerics/grid.hpp"

#include <string>

namespace renorm::num {

namespace {

template <Scalar T>
void require_increasing(std::span<const Sample<T>> s, std::size_t min_size) {
    if (s.size() < min_size)
        throw BadGrid("need at least " + std::to_string(min_size) + " samples, got " +
                      std::to_string(s.size()));
    for (std::size_t j = 0; j + 1 < s.size(); ++j)
        if (!(s[j].x < s[j + 1].x))
            throw BadGrid("abscissae not strictly increasing at index " + std::to_string(j));
}

}  // namespace

template <Scalar T>
T total_variation(std::span<const Sample<T>> samples) {
    require_increasing(samples, 2);
    T tv(0);
    for (std::size_t j = 0; j + 1 < samples.size(); ++j) tv += abs(T(samples[j + 1].y - samples[j].y));
    return tv;
}

template <Scalar T>
std::vector<Sample<T>> grid_derivative(std::span<const Sample<T>> s) {
    require_increasing(s, 3);
    const std::size_t n = s.size();
    std::vector<Sample<T>> out(n);
    // Three-point Lagrange derivative, exact for quadratics on any grid.
    auto three_point = [](const Sample<T>& a, const Sample<T>& b, const Sample<T>& c, const T& x) {
        T d0 = (T(2) * x - b.x - c.x) / ((a.x - b.x) * (a.x - c.x));
        T d1 = (T(2) * x - a.x - c.x) / ((b.x - a.x) * (b.x - c.x));
        T d2 = (T(2) * x - a.x - b.x) / ((c.x - a.x) * (c.x - b.x));
        return T(a.y * d0 + b.y * d1 + c.y * d2);
    };
    out[0] = {s[0].x, three_point(s[0], s[1], s[2], s[0].x)};
    for (std::size_t j = 1; j + 1 < n; ++j)
        out[j] = {s[j].x, three_point(s[j - 1], s[j], s[j + 1], s[j].x)};
    out[n - 1] = {s[n - 1].x, three_point(s[n - 3], s[n - 2], s[n - 1], s[n - 1].x)};
    return out;
}

template <Scalar T>
std::vector<T> uniform_grid(const T& u, const T& v, std::size_t n) {
    if (n < 2) throw BadGrid("uniform grid needs at least 2 points");
    std::vector<T> xs(n);
    const T step = (v - u) / T(n - 1);
    for (std::size_t j = 0; j < n; ++j) xs[j] = u + step * T(j);
    xs[n - 1] = v;
    return xs;
}

#define RENORM_INSTANTIATE_GRID(T)                                                    \
    template T total_variation<T>(std::span<const Sample<T>>);                        \
    template std::vector<Sample<T>> grid_derivative<T>(std::span<const Sample<T>>);   \
    template std::vector<T> uniform_grid<T>(const T&, const T&, std::size_t);
RENORM_FOR_EACH_SCALAR(RENORM_INSTANTIATE_GRID)
#undef RENORM_INSTANTIATE_GRID

}  // namespace renorm::num
