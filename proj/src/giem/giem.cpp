#include "renorm/giem/giem.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace renorm {

bool ValidationReport::ok() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

const ValidationCheck* ValidationReport::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

std::string ValidationReport::summary() const {
    std::ostringstream os;
    for (const auto& c : checks) {
        os << (c.passed ? "pass " : "FAIL ") << c.name;
        if (!c.detail.empty()) os << ": " << c.detail;
        os << '\n';
    }
    os << "interior discontinuities: " << discontinuities << '\n';
    return os.str();
}

template <Scalar T>
Giem<T>::Giem(CombinatorialPair pair, std::vector<Branch<T>> branches)
    : pair_(std::move(pair)), branches_(std::move(branches)) {
    if (branches_.size() != pair_.size())
        throw std::invalid_argument("one branch per letter is required");
    const std::size_t d = size();
    domain_order_.resize(d);
    image_order_.resize(d);
    std::iota(domain_order_.begin(), domain_order_.end(), Letter{0});
    std::iota(image_order_.begin(), image_order_.end(), Letter{0});
    std::sort(domain_order_.begin(), domain_order_.end(),
              [&](Letter a, Letter b) { return branches_[a].left < branches_[b].left; });
    std::sort(image_order_.begin(), image_order_.end(),
              [&](Letter a, Letter b) { return branches_[a].image_left < branches_[b].image_left; });
    for (Letter a : domain_order_) domain_lefts_.push_back(branches_[a].left);
    for (Letter a : image_order_) image_lefts_.push_back(branches_[a].image_left);
}

template <Scalar T>
std::vector<T> Giem<T>::lengths() const {
    std::vector<T> out;
    for (const auto& b : branches_) out.push_back(b.width());
    return out;
}

template <Scalar T>
Letter Giem<T>::letter_at(const T& x) const {
    auto it = std::upper_bound(domain_lefts_.begin(), domain_lefts_.end(), x);
    if (it != domain_lefts_.begin()) {
        Letter a = domain_order_[static_cast<std::size_t>(it - domain_lefts_.begin()) - 1];
        if (branches_[a].contains(x)) return a;
    }
    throw OutOfDomain("point " + num::format(x, 20) + " is outside [0,1)");
}

template <Scalar T>
Letter Giem<T>::image_letter_at(const T& y) const {
    auto it = std::upper_bound(image_lefts_.begin(), image_lefts_.end(), y);
    if (it != image_lefts_.begin()) {
        Letter a = image_order_[static_cast<std::size_t>(it - image_lefts_.begin()) - 1];
        const auto& b = branches_[a];
        if (!(y < b.image_left) && y < b.image_right) return a;
    }
    throw OutOfDomain("point " + num::format(y, 20) + " is outside the image of f");
}

template <Scalar T>
T Giem<T>::second_deriv(const T& x) const {
    const auto& b = branches_[letter_at(x)];
    for (const auto& s : b.singular_points())
        if (s == x) throw NoSecondDerivative("second derivative undefined at a singular point");
    return b.second_deriv(x);
}

template <Scalar T>
Orbit<T> Giem<T>::iterate(const T& x, std::size_t k, bool keep_orbit, bool with_derivative) const {
    Orbit<T> orbit{x, T(1), {}, {}};
    if (keep_orbit) {
        orbit.points.reserve(k + 1);
        orbit.points.push_back(x);
        orbit.letters.reserve(k);
    }
    for (std::size_t i = 0; i < k; ++i) {
        Letter a = letter_at(orbit.point);
        const auto& b = branches_[a];
        if (with_derivative) orbit.derivative *= b.deriv(orbit.point);
        orbit.point = b.eval(orbit.point);
        if (keep_orbit) {
            orbit.points.push_back(orbit.point);
            orbit.letters.push_back(a);
        }
    }
    return orbit;
}

template <Scalar T>
std::vector<T> Giem<T>::singular_points() const {
    std::vector<T> pts;
    for (const auto& b : branches_)
        for (const auto& s : b.singular_points()) pts.push_back(s);
    std::sort(pts.begin(), pts.end());
    return pts;
}

template <Scalar T>
T Giem<T>::log_derivative_variation() const {
    T theta(0);
    for (const auto& b : branches_) theta += b.profile.log_slope_variation();
    for (std::size_t j = 0; j + 1 < domain_order_.size(); ++j) {
        const auto& left = branches_[domain_order_[j]];
        const auto& right = branches_[domain_order_[j + 1]];
        T d_left = left.image_width() / left.width() * left.profile.slope(T(1));
        T d_right = right.image_width() / right.width() * right.profile.slope(T(0));
        if (d_left != d_right) theta += num::abs(num::log(T(d_left / d_right)));
    }
    return theta;
}

template <Scalar T>
bool Giem<T>::is_standard() const {
    return std::all_of(branches_.begin(), branches_.end(), [](const Branch<T>& b) {
        return b.profile.kind() == Profile<T>::Kind::Linear && b.width() == b.image_width();
    });
}

template <Scalar T>
ValidationReport validate(const Giem<T>& f) {
    ValidationReport report;
    const auto& pair = f.pair();
    const std::size_t d = f.size();
    const T tol = T(4 * d) * num::unit_roundoff<T>();
    auto close = [&](const T& x, const T& y) { return num::abs(T(x - y)) <= tol; };
    auto fmt = [](const T& x) { return num::format(x, 12); };

    report.checks.push_back({"irreducibility", pair.irreducible(), pair.to_string()});

    {
        ValidationCheck c{"domain tiling", true, ""};
        T edge(0);
        for (std::size_t j = 0; j < d && c.passed; ++j) {
            const auto& b = f.branch(pair.letter_at(0, j));
            if (!close(b.left, edge)) {
                c.passed = false;
                c.detail = "gap or overlap before " + pair.name(pair.letter_at(0, j)) + " at " + fmt(b.left);
            }
            edge = b.right;
        }
        if (c.passed && !close(edge, T(1))) {
            c.passed = false;
            c.detail = "domains end at " + fmt(edge);
        }
        report.checks.push_back(c);
    }
    {
        ValidationCheck c{"image tiling", true, ""};
        std::vector<Letter> by_image(d);
        std::iota(by_image.begin(), by_image.end(), Letter{0});
        std::sort(by_image.begin(), by_image.end(),
                  [&](Letter a, Letter b) { return f.branch(a).image_left < f.branch(b).image_left; });
        T edge(0);
        for (Letter a : by_image) {
            const auto& b = f.branch(a);
            if (c.passed && !close(b.image_left, edge)) {
                c.passed = false;
                c.detail = "images overlap or leave a gap at " + pair.name(a) + " (" + fmt(b.image_left) +
                           " vs " + fmt(edge) + ")";
            }
            edge = b.image_right;
        }
        if (c.passed && !close(edge, T(1))) {
            c.passed = false;
            c.detail = "images end at " + fmt(edge);
        }
        report.checks.push_back(c);

        ValidationCheck order{"image order", true, ""};
        for (std::size_t j = 0; j < d; ++j)
            if (pair.letter_at(1, j) != by_image[j]) {
                order.passed = false;
                order.detail = "image order disagrees with the bottom row at position " + std::to_string(j);
                break;
            }
        report.checks.push_back(order);
    }
    {
        ValidationCheck c{"orientation", true, ""};
        for (Letter a = 0; a < d && c.passed; ++a) {
            const auto& b = f.branch(a);
            if (!(b.width() > 0) || !(b.image_width() > 0)) {
                c.passed = false;
                c.detail = "empty interval for " + pair.name(a);
            } else if (!(b.profile.min_slope() > 0)) {
                c.passed = false;
                c.detail = "branch " + pair.name(a) + " is not increasing (min slope " +
                           fmt(b.profile.min_slope()) + ")";
            }
        }
        report.checks.push_back(c);
    }
    {
        for (std::size_t j = 0; j + 1 < d; ++j) {
            const auto& left = f.branch(pair.letter_at(0, j));
            const auto& right = f.branch(pair.letter_at(0, j + 1));
            if (!close(left.image_right, right.image_left)) ++report.discontinuities;
        }
        report.checks.push_back({"genus one", report.discontinuities <= 2,
                                 std::to_string(report.discontinuities) + " interior discontinuities"});
    }
    return report;
}

template <Scalar T>
Giem<T> assemble(const std::vector<T>& lengths, const std::vector<T>& image_widths,
                 const CombinatorialPair& pair, const std::vector<Profile<T>>& profiles) {
    const std::size_t d = pair.size();
    if (lengths.size() != d || image_widths.size() != d || profiles.size() != d)
        throw std::invalid_argument("expected one length, image width and profile per letter");
    std::vector<Branch<T>> branches(d);
    T edge(0);
    for (std::size_t j = 0; j < d; ++j) {
        Letter a = pair.letter_at(0, j);
        branches[a].left = edge;
        edge = j + 1 == d ? T(1) : T(edge + lengths[a]);
        branches[a].right = edge;
    }
    edge = T(0);
    for (std::size_t j = 0; j < d; ++j) {
        Letter a = pair.letter_at(1, j);
        branches[a].image_left = edge;
        edge += image_widths[a];
        branches[a].image_right = edge;
        branches[a].profile = profiles[a];
    }
    // keep the last right end at 1 when the widths tile within roundoff
    Letter last = pair.letter_at(1, d - 1);
    if (num::abs(T(edge - 1)) <= T(4 * d) * num::unit_roundoff<T>()) branches[last].image_right = T(1);
    return Giem<T>(pair, std::move(branches));
}

namespace {

template <Scalar T>
Giem<T> checked(Giem<T> f, const char* family) {
    auto report = validate(f);
    if (!report.ok())
        throw InvalidFamilyParams(std::string(family) + " parameters do not give a valid map", report.summary());
    return f;
}

template <Scalar T>
void check_lengths(const std::vector<T>& lengths, const CombinatorialPair& pair) {
    if (lengths.size() != pair.size()) throw InvalidFamilyParams("expected one length per letter", "");
    T total(0);
    for (const auto& l : lengths) {
        if (!(l > 0)) throw InvalidFamilyParams("lengths must be positive", "");
        total += l;
    }
    if (num::abs(T(total - 1)) > T(4 * lengths.size()) * num::unit_roundoff<T>())
        throw InvalidFamilyParams("lengths must sum to 1, got " + num::format(total, 20), "");
}

}  // namespace

template <Scalar T>
Giem<T> standard_iem(const std::vector<T>& lengths, const CombinatorialPair& pair) {
    check_lengths(lengths, pair);
    return checked(assemble(lengths, lengths, pair, std::vector<Profile<T>>(pair.size())), "standard");
}

template <Scalar T>
Giem<T> affine_iem(const std::vector<T>& lengths, const CombinatorialPair& pair, std::vector<T> slopes) {
    check_lengths(lengths, pair);
    const std::size_t d = pair.size();
    if (slopes.size() + 1 == d) {
        T used(0);
        for (std::size_t a = 0; a + 1 < d; ++a) used += slopes[a] * lengths[a];
        slopes.push_back((1 - used) / lengths[d - 1]);
    }
    if (slopes.size() != d) throw InvalidFamilyParams("affine family needs d-1 or d slopes", "");
    std::vector<T> widths(d);
    for (std::size_t a = 0; a < d; ++a) {
        if (!(slopes[a] > 0))
            throw InvalidFamilyParams("affine slopes must be positive (solved last slope " +
                                          num::format(slopes[a], 12) + ")", "");
        widths[a] = slopes[a] * lengths[a];
    }
    return checked(assemble(lengths, widths, pair, std::vector<Profile<T>>(d)), "affine");
}

template <Scalar T>
Giem<T> moebius_iem(const std::vector<T>& lengths, const CombinatorialPair& pair,
                    const std::vector<T>& coefficients, std::vector<T> image_widths) {
    check_lengths(lengths, pair);
    const std::size_t d = pair.size();
    if (coefficients.size() != d) throw InvalidFamilyParams("Mobius family needs one coefficient per letter", "");
    if (image_widths.empty()) image_widths = lengths;
    std::vector<Profile<T>> profiles;
    for (const auto& m : coefficients) {
        if (!(m > 0)) throw InvalidFamilyParams("Mobius coefficients must be positive", "");
        profiles.push_back(Profile<T>::mobius(m));
    }
    return checked(assemble(lengths, image_widths, pair, profiles), "Mobius");
}

template <Scalar T>
Giem<T> ko_iem(const std::vector<T>& lengths, const CombinatorialPair& pair,
               const std::vector<KoParams<T>>& params) {
    check_lengths(lengths, pair);
    const std::size_t d = pair.size();
    if (params.size() != d && params.size() != 1)
        throw InvalidFamilyParams("KO family needs one parameter set or one per letter", "");
    std::vector<Profile<T>> profiles;
    for (std::size_t a = 0; a < d; ++a) {
        const auto& p = params.size() == 1 ? params[0] : params[a];
        try {
            profiles.push_back(Profile<T>::ko(p.amplitude, p.center, p.bend, p.zero_mean));
        } catch (const std::invalid_argument& e) {
            throw InvalidFamilyParams(e.what(), "");
        }
    }
    return checked(assemble(lengths, lengths, pair, profiles), "KO");
}

template <Scalar T>
std::vector<T> golden_lengths() {
    T g = (num::sqrt(T(5)) - 1) / 2;
    return {T(1 - g), g};
}

#define RENORM_INSTANTIATE_GIEM(T)                                                                    \
    template class Giem<T>;                                                                           \
    template ValidationReport validate<T>(const Giem<T>&);                                            \
    template Giem<T> assemble<T>(const std::vector<T>&, const std::vector<T>&, const CombinatorialPair&, \
                                 const std::vector<Profile<T>>&);                                     \
    template Giem<T> standard_iem<T>(const std::vector<T>&, const CombinatorialPair&);                \
    template Giem<T> affine_iem<T>(const std::vector<T>&, const CombinatorialPair&, std::vector<T>);  \
    template Giem<T> moebius_iem<T>(const std::vector<T>&, const CombinatorialPair&,                  \
                                    const std::vector<T>&, std::vector<T>);                           \
    template Giem<T> ko_iem<T>(const std::vector<T>&, const CombinatorialPair&,                       \
                               const std::vector<KoParams<T>>&);                                      \
    template std::vector<T> golden_lengths<T>();
RENORM_FOR_EACH_SCALAR(RENORM_INSTANTIATE_GIEM)
#undef RENORM_INSTANTIATE_GIEM

}  // namespace renorm
