#include "renorm/giem/combinatorics.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace renorm {

namespace {

void require_bijection(const std::vector<std::size_t>& pos, std::size_t d, const char* row) {
    if (pos.size() != d) throw std::invalid_argument(std::string(row) + " row has wrong size");
    std::vector<bool> seen(d, false);
    for (auto p : pos) {
        if (p >= d || seen[p])
            throw std::invalid_argument(std::string(row) + " row is not a permutation");
        seen[p] = true;
    }
}

}  // namespace

CombinatorialPair::CombinatorialPair(std::vector<std::string> alphabet, std::vector<std::size_t> top,
                                     std::vector<std::size_t> bottom)
    : alphabet_(std::move(alphabet)), top_(std::move(top)), bottom_(std::move(bottom)) {
    const std::size_t d = alphabet_.size();
    if (d < 2) throw std::invalid_argument("alphabet needs at least two letters");
    require_bijection(top_, d, "top");
    require_bijection(bottom_, d, "bottom");
    rebuild_inverse();
}

void CombinatorialPair::rebuild_inverse() {
    const std::size_t d = top_.size();
    top_inv_.assign(d, 0);
    bottom_inv_.assign(d, 0);
    for (Letter a = 0; a < d; ++a) {
        top_inv_[top_[a]] = a;
        bottom_inv_[bottom_[a]] = a;
    }
}

CombinatorialPair CombinatorialPair::from_orders(const std::vector<std::string>& top_order,
                                                 const std::vector<std::string>& bottom_order) {
    const std::size_t d = top_order.size();
    if (bottom_order.size() != d) throw std::invalid_argument("rows have different lengths");
    std::vector<std::size_t> top(d), bottom(d, d);
    for (std::size_t j = 0; j < d; ++j) top[j] = j;
    for (std::size_t j = 0; j < d; ++j) {
        auto it = std::find(top_order.begin(), top_order.end(), bottom_order[j]);
        if (it == top_order.end())
            throw std::invalid_argument("letter '" + bottom_order[j] + "' missing from top row");
        bottom[static_cast<std::size_t>(it - top_order.begin())] = j;
    }
    return CombinatorialPair(top_order, std::move(top), std::move(bottom));
}

CombinatorialPair CombinatorialPair::rotation_class(const std::vector<std::size_t>& permutation) {
    const std::size_t d = permutation.size();
    std::vector<std::string> alphabet(d);
    std::vector<std::size_t> top(d), bottom(d);
    for (std::size_t j = 0; j < d; ++j) {
        alphabet[j] = d <= 26 ? std::string(1, static_cast<char>('A' + j)) : "L" + std::to_string(j);
        top[j] = j;
        if (permutation[j] < 1) throw std::invalid_argument("permutation entries are 1-based");
        bottom[j] = permutation[j] - 1;
    }
    return CombinatorialPair(std::move(alphabet), std::move(top), std::move(bottom));
}

Letter CombinatorialPair::letter(const std::string& name) const {
    auto it = std::find(alphabet_.begin(), alphabet_.end(), name);
    if (it == alphabet_.end()) throw std::invalid_argument("unknown letter '" + name + "'");
    return static_cast<Letter>(it - alphabet_.begin());
}

bool CombinatorialPair::irreducible() const {
    const std::size_t d = size();
    // prefix j of both rows agree as sets iff the max bottom position among the
    // first j top letters is j-1
    std::size_t reach = 0;
    for (std::size_t j = 0; j + 1 < d; ++j) {
        reach = std::max(reach, bottom_[top_inv_[j]]);
        if (reach == j) return false;
    }
    return true;
}

std::vector<std::string> CombinatorialPair::order(int row) const {
    std::vector<std::string> out;
    for (std::size_t j = 0; j < size(); ++j) out.push_back(alphabet_[letter_at(row, j)]);
    return out;
}

std::string CombinatorialPair::to_string() const {
    std::ostringstream os;
    for (int row = 0; row < 2; ++row) {
        if (row) os << " / ";
        for (const auto& s : order(row)) os << s << ' ';
    }
    std::string s = os.str();
    return s.substr(0, s.size() - 1);
}

std::vector<std::size_t> monodromy(const CombinatorialPair& pair) {
    std::vector<std::size_t> p(pair.size());
    for (Letter a = 0; a < pair.size(); ++a) p[pair.position(0, a)] = pair.position(1, a);
    return p;
}

}  // namespace renorm
