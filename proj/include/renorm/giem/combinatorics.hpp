#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace renorm {

/// Letters are indices into the alphabet.
using Letter = std::size_t;

/// Orderings of the letters before (top) and after (bottom) applying the map.
/// Positions are 0-based: top[a] == 0 means letter a is the leftmost interval.
class CombinatorialPair {
public:
    CombinatorialPair() = default;
    /// Throws std::invalid_argument unless both positions are bijections onto {0..d-1}.
    CombinatorialPair(std::vector<std::string> alphabet, std::vector<std::size_t> top,
                      std::vector<std::size_t> bottom);

    /// Build from the letter sequences read left to right, e.g. {"A","B"}, {"B","A"}.
    static CombinatorialPair from_orders(const std::vector<std::string>& top_order,
                                         const std::vector<std::string>& bottom_order);
    /// Top order = alphabet, bottom position of letter j = permutation[j] - 1 (1-based input).
    static CombinatorialPair rotation_class(const std::vector<std::size_t>& permutation);

    std::size_t size() const { return top_.size(); }
    const std::vector<std::string>& alphabet() const { return alphabet_; }
    const std::string& name(Letter a) const { return alphabet_.at(a); }
    Letter letter(const std::string& name) const;

    std::size_t position(int row, Letter a) const { return row == 0 ? top_[a] : bottom_[a]; }
    Letter letter_at(int row, std::size_t pos) const {
        return row == 0 ? top_inv_[pos] : bottom_inv_[pos];
    }
    const std::vector<std::size_t>& top() const { return top_; }
    const std::vector<std::size_t>& bottom() const { return bottom_; }

    /// No proper initial block of the top order equals an initial block of the bottom order.
    bool irreducible() const;

    /// Letters read left to right in the given row.
    std::vector<std::string> order(int row) const;
    std::string to_string() const;

    friend bool operator==(const CombinatorialPair& x, const CombinatorialPair& y) {
        return x.top_ == y.top_ && x.bottom_ == y.bottom_;
    }

private:
    void rebuild_inverse();

    std::vector<std::string> alphabet_;
    std::vector<std::size_t> top_, bottom_;
    std::vector<Letter> top_inv_, bottom_inv_;
};

/// p with p[top(a)] == bottom(a) for every letter a.
std::vector<std::size_t> monodromy(const CombinatorialPair& pair);

}  // namespace renorm
