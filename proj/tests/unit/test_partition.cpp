#include <doctest.h>

#include <random>
#include <set>

#include "renorm/partition/partition.hpp"

using namespace renorm;

namespace {

CombinatorialPair swap2() { return CombinatorialPair::from_orders({"A", "B"}, {"B", "A"}); }

std::vector<Rational> fibonacci_lengths(std::size_t k) {
    std::vector<BigInt> fib{BigInt(1), BigInt(1)};
    while (fib.size() <= k) fib.push_back(fib[fib.size() - 1] + fib[fib.size() - 2]);
    return {Rational(fib[k - 2], fib[k]), Rational(fib[k - 1], fib[k])};
}

// All images f^i(J), 0 <= i < count, compared pairwise.
bool pairwise_disjoint(const Giem<Rational>& f, Rational u, Rational v, std::size_t count) {
    std::vector<std::vector<std::pair<Rational, Rational>>> images{{{u, v}}};
    for (std::size_t i = 1; i < count; ++i) {
        std::vector<std::pair<Rational, Rational>> next;
        for (auto [l, r] : images.back()) {
            for (const auto& b : f.branches()) {
                Rational lo = std::max(l, b.left), hi = std::min(r, b.right);
                if (lo < hi) next.emplace_back(b.eval(lo), b.eval(hi));
            }
        }
        images.push_back(next);
    }
    for (std::size_t i = 0; i < images.size(); ++i)
        for (std::size_t j = i + 1; j < images.size(); ++j)
            for (const auto& x : images[i])
                for (const auto& y : images[j])
                    if (x.first < y.second && y.first < x.second) return false;
    return true;
}

}  // namespace

TEST_CASE("depth zero partition is the base intervals") {
    auto f = standard_iem<Rational>({Rational(2, 7), Rational(5, 7)}, swap2());
    auto p = build_partition(renormalize(f, 0));
    REQUIRE(p.size() == 2);
    CHECK(p.atoms[0].left == 0);
    CHECK(p.atoms[0].right == Rational(2, 7));
    CHECK(p.atoms[1].right == 1);
    CHECK(partition_norm(p) == Rational(5, 7));
}

TEST_CASE("golden norm at depth zero") {
    num::ScopedPrecision prec(256);
    auto f = standard_iem<Extended>(golden_lengths<Extended>(), swap2());
    auto p = build_partition(renormalize(f, 0));
    CHECK(p.norm == golden_lengths<Extended>()[1]);
}

TEST_CASE("Fibonacci partitions: counts, tiling, provenance") {
    auto f = std::make_shared<const Giem<Rational>>(standard_iem<Rational>(fibonacci_lengths(40), swap2()));
    std::vector<std::size_t> fib{1, 1};
    while (fib.size() < 20) fib.push_back(fib[fib.size() - 1] + fib[fib.size() - 2]);
    auto s = initial_state(f);
    auto prev = build_partition(s);
    for (std::size_t n = 1; n <= 12; ++n) {
        auto next_state = step(s);
        auto p = build_partition(next_state);
        CHECK(p.size() == fib[n + 2]);
        Rational total(0);
        for (const auto& a : p.atoms) total += a.length();
        CHECK(total == 1);
        for (std::size_t k = 0; k + 1 < p.size(); ++k) CHECK(p.atoms[k].right == p.atoms[k + 1].left);
        // provenance is a bijection onto the atoms
        std::set<std::size_t> seen;
        for (Letter a = 0; a < 2; ++a)
            for (std::size_t i = 0; i < p.index[a].size(); ++i) {
                CHECK(p.at(a, i).letter == a);
                CHECK(p.at(a, i).iterate == i);
                seen.insert(p.index[a][i]);
            }
        CHECK(seen.size() == p.size());
        CHECK(p.norm < prev.norm);

        auto split = split_preserved_new(prev, p, next_state.history.back());
        CHECK(split.matches_step);
        CHECK(split.preserved.size() + split.fresh.size() == p.size());
        // each fresh atom sits properly inside its parent, and the parent is
        // the union of its children
        std::vector<Rational> covered(prev.size(), Rational(0));
        for (std::size_t k = 0; k < p.size(); ++k) covered[split.parent[k]] += p.atoms[k].length();
        for (std::size_t j = 0; j < prev.size(); ++j) CHECK(covered[j] == prev.atoms[j].length());
        for (std::size_t k : split.fresh) CHECK(p.atoms[k].length() < prev.atoms[split.parent[k]].length());

        prev = std::move(p);
        s = std::move(next_state);
    }
}

TEST_CASE("preserved/new split on random maps") {
    std::mt19937_64 rng(5);
    const std::vector<std::vector<std::size_t>> perms{{3, 2, 1}, {2, 3, 1}, {3, 1, 2}, {4, 3, 2, 1}};
    for (int trial = 0; trial < 12; ++trial) {
        auto pair = CombinatorialPair::rotation_class(perms[rng() % perms.size()]);
        std::vector<long> raw;
        long total = 0;
        for (std::size_t a = 0; a < pair.size(); ++a) {
            raw.push_back(1 + static_cast<long>(rng() % 501));
            total += raw.back();
        }
        std::vector<Rational> lengths;
        for (long r : raw) lengths.emplace_back(r, total);
        std::shared_ptr<const Giem<Rational>> f;
        try {
            f = std::make_shared<const Giem<Rational>>(standard_iem<Rational>(lengths, pair));
        } catch (const InvalidFamilyParams&) {
            continue;
        }
        auto s = initial_state(f);
        auto prev = build_partition(s);
        for (int n = 0; n < 6; ++n) {
            try {
                s = step(s);
            } catch (const NotRenormalizable&) {
                break;
            }
            auto p = build_partition(s);
            CHECK(split_preserved_new(prev, p, s.history.back()).matches_step);
            prev = std::move(p);
        }
    }
}

TEST_CASE("split errors") {
    auto f = standard_iem<Rational>(fibonacci_lengths(20), swap2());
    auto s2 = renormalize(f, 2);
    auto p0 = build_partition(renormalize(f, 0));
    auto p2 = build_partition(s2);
    CHECK_THROWS_AS(split_preserved_new(p0, p2, s2.history.back()), InconsistentDepths);
    CHECK_THROWS_AS(parents(p2, p0), InconsistentDepths);
    CHECK(parents(p0, p2).size() == p2.size());
}

TEST_CASE("equidistribution discrepancy") {
    num::ScopedPrecision prec(256);
    auto f = std::make_shared<const Giem<Extended>>(standard_iem<Extended>(golden_lengths<Extended>(), swap2()));
    auto s = initial_state(f);
    // same depth: each atom is wholly inside one tower
    auto p = build_partition(s);
    Extended worst(0);
    for (Letter a = 0; a < 2; ++a) {
        Extended tower(0);
        for (std::size_t i = 0; i < p.index[a].size(); ++i) tower += p.at(a, i).length();
        worst = std::max({worst, tower, Extended(1 - tower)});
    }
    CHECK(num::abs(Extended(equidistribution_discrepancy(p, p) - worst)) < Extended("1e-70"));

    std::vector<Extended> values;
    for (std::size_t n = 0; n <= 16; ++n) {
        if (n > 0) s = step(s);
        if (n >= 4 && n % 4 == 0) values.push_back(equidistribution_discrepancy(s, n / 2));
    }
    for (std::size_t k = 1; k < values.size(); ++k) CHECK(values[k] < values[k - 1]);
}

TEST_CASE("q_n-small intervals") {
    auto f = std::make_shared<const Giem<Rational>>(standard_iem<Rational>(fibonacci_lengths(30), swap2()));
    auto s = initial_state(f);
    for (int n = 0; n < 6; ++n) s = step(s);
    const std::size_t q = s.max_return_time();
    for (Letter a = 0; a < 2; ++a) {
        CHECK(qn_small_check(s.left(a), s.right(a), s));
        CHECK(pairwise_disjoint(*f, s.left(a), s.right(a), q));
    }
    // one more iterate brings the longest tower back over itself
    Letter longest = s.return_time(0) == q ? 0 : 1;
    CHECK_FALSE(pairwise_disjoint(*f, s.left(longest), s.right(longest), q + 1));
    CHECK_FALSE(qn_small_check(Rational(0), Rational(1), s));

    std::mt19937_64 rng(3);
    int agree = 0, small = 0;
    for (int t = 0; t < 60; ++t) {
        Rational u(static_cast<long>(rng() % 10000), 10000);
        Rational w(1 + static_cast<long>(rng() % 400), 10000);
        Rational v = std::min(Rational(u + w), Rational(1));
        bool fast = qn_small_check(u, v, s);
        CHECK(fast == pairwise_disjoint(*f, u, v, q));
        agree += 1;
        small += fast ? 1 : 0;
    }
    CHECK(agree == 60);
    CHECK(small > 0);
    CHECK(small < 60);
}

TEST_CASE("partition CSV") {
    auto f = standard_iem<Rational>(fibonacci_lengths(20), swap2());
    auto p = build_partition(renormalize(f, 3));
    auto csv = partition_csv(p, f.pair(), 10);
    CHECK(csv.rfind("depth,letter,iterate,left,right,length\n", 0) == 0);
    CHECK(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) == p.size() + 1);
}

TEST_CASE("k-step decay of a norm sequence") {
    const std::vector<Rational> norms{8, 4, 3, 1};
    CHECK(k_step_decay(norms, 1) == Rational(3, 4));
    CHECK(k_step_decay(norms, 2) == Rational(3, 8));
    CHECK(k_step_decay(norms, 3) == Rational(1, 8));
    CHECK_THROWS_AS(k_step_decay(norms, 4), std::invalid_argument);
    CHECK_THROWS_AS(k_step_decay(norms, 0), std::invalid_argument);
}
