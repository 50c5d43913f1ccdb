#include <doctest.h>

#include <random>

#include "renorm/rauzy/rauzy.hpp"

using namespace renorm;

namespace {

CombinatorialPair swap2() { return CombinatorialPair::from_orders({"A", "B"}, {"B", "A"}); }

// Iterate f until the orbit comes back to [0, len); returns (point, steps).
template <class T>
std::pair<T, std::size_t> first_return(const Giem<T>& f, const T& len, T x) {
    std::size_t steps = 0;
    do {
        x = f.eval(x);
        ++steps;
        REQUIRE(steps < 10000000);
    } while (!(x < len));
    return {x, steps};
}

std::vector<BigInt> fibonacci(std::size_t n) {
    std::vector<BigInt> fib{BigInt(1), BigInt(1)};
    while (fib.size() < n) fib.push_back(fib[fib.size() - 1] + fib[fib.size() - 2]);
    return fib;
}

// Rational stand-in for the golden rotation: lengths (F_{k-2}, F_{k-1}) / F_k.
std::vector<Rational> fibonacci_lengths(std::size_t k) {
    auto fib = fibonacci(k + 1);
    return {Rational(fib[k - 2], fib[k]), Rational(fib[k - 1], fib[k])};
}

}  // namespace

TEST_CASE("single step: longer first interval") {
    // top A B, bottom B A, |A| = 3/5 > |B| = 2/5: the last top letter B loses
    auto f = std::make_shared<const Giem<Rational>>(standard_iem<Rational>({Rational(3, 5), Rational(2, 5)}, swap2()));
    auto s1 = step(initial_state(f));
    const auto& rec = s1.history.back();
    CHECK(rec.type == 1);
    CHECK(rec.winner == 0);
    CHECK(rec.loser == 1);
    CHECK(s1.lengths == std::vector<Rational>{Rational(1, 5), Rational(2, 5)});
    CHECK(s1.length == Rational(3, 5));
    for (int j = 0; j < 30; ++j) {
        Rational x(j, 50);
        auto [y, q] = first_return(*f, s1.length, x);
        CHECK(eval_return_map(s1, x, true) == y);
        CHECK(s1.return_time(s1.letter_at(x)) == q);
    }

    // the mirror case is type 0
    auto g = std::make_shared<const Giem<Rational>>(standard_iem<Rational>({Rational(2, 5), Rational(3, 5)}, swap2()));
    auto t1 = step(initial_state(g));
    CHECK(t1.history.back().type == 0);
    CHECK(t1.lengths == std::vector<Rational>{Rational(2, 5), Rational(1, 5)});
}

TEST_CASE("equal candidate lengths are not renormalizable") {
    auto f = standard_iem<Rational>({Rational(1, 2), Rational(1, 2)}, swap2());
    try {
        renormalize(f, 3);
        FAIL("expected NotRenormalizable");
    } catch (const NotRenormalizable& e) {
        CHECK(e.depth() == 0);
    }
}

TEST_CASE("depth zero state") {
    auto f = standard_iem<Rational>({Rational(2, 7), Rational(5, 7)}, swap2());
    auto s = renormalize(f, 0);
    CHECK(s.depth == 0);
    CHECK(s.lengths == f.lengths());
    CHECK(s.return_times == std::vector<BigInt>{BigInt(1), BigInt(1)});
    for (int j = 0; j < 14; ++j) CHECK(eval_return_map(s, Rational(j, 14)) == f.eval(Rational(j, 14)));
}

TEST_CASE("Fibonacci rotation: alternating types and oracle return times") {
    auto f = std::make_shared<const Giem<Rational>>(standard_iem<Rational>(fibonacci_lengths(40), swap2()));
    auto fib = fibonacci(40);
    auto s = initial_state(f);
    for (std::size_t n = 1; n <= 10; ++n) {
        Rational before = s.length;
        s = step(s);
        CHECK(s.history.back().type == static_cast<int>((n - 1) % 2));
        // q_A, q_B are consecutive Fibonacci numbers
        std::vector<BigInt> q = s.return_times;
        std::sort(q.begin(), q.end());
        CHECK(q[0] == fib[n]);
        CHECK(q[1] == fib[n + 1]);
        CHECK(s.length < before);
        // brute-force return counts at sample points of every atom
        for (Letter a = 0; a < 2; ++a) {
            for (int j = 0; j < 5; ++j) {
                Rational x = s.left(a) + s.lengths[a] * Rational(j, 5);
                auto [y, steps] = first_return(*f, s.length, x);
                CHECK(BigInt(steps) == s.return_times[a]);
                CHECK(s.return_time(a) == steps);
                CHECK(eval_return_map(s, x, true) == y);
            }
        }
    }
    CHECK(s.return_times[0] == 89);
    CHECK(s.return_times[1] == 144);
}

TEST_CASE("length bookkeeping and combinatorics on random rational maps") {
    std::mt19937_64 rng(11);
    const std::vector<std::vector<std::size_t>> perms{{2, 1}, {3, 2, 1}, {2, 3, 1}, {3, 1, 2}, {4, 3, 2, 1}, {2, 4, 3, 1}};
    int tested = 0;
    for (int trial = 0; trial < 40; ++trial) {
        auto pair = CombinatorialPair::rotation_class(perms[rng() % perms.size()]);
        std::vector<Rational> lengths;
        std::vector<long> raw;
        long total = 0;
        for (std::size_t a = 0; a < pair.size(); ++a) {
            raw.push_back(1 + static_cast<long>(rng() % 997));
            total += raw.back();
        }
        for (long r : raw) lengths.emplace_back(r, total);
        std::shared_ptr<const Giem<Rational>> f;
        try {
            f = std::make_shared<const Giem<Rational>>(standard_iem<Rational>(lengths, pair));
        } catch (const InvalidFamilyParams&) {
            continue;
        }
        auto s = initial_state(f);
        for (int n = 0; n < 8; ++n) {
            RauzyState<Rational> next;
            try {
                next = step(s);
            } catch (const NotRenormalizable&) {
                break;
            }
            const auto& rec = next.history.back();
            const Rational& loser_len = rec.type == 0 ? s.image_widths[rec.loser] : s.lengths[rec.loser];
            CHECK(s.length - next.length == loser_len);
            Rational sum(0);
            for (const auto& l : next.lengths) sum += l;
            CHECK(sum == next.length);
            CHECK(next.pair.irreducible());
            CHECK(next.return_times[rec.winner] == s.return_times[rec.winner]);
            CHECK(next.return_times[rec.loser] == s.return_times[rec.loser] + s.return_times[rec.winner]);
            s = std::move(next);
        }
        ++tested;
    }
    CHECK(tested > 20);
}

TEST_CASE("nonlinear maps: nested domains") {
    num::ScopedPrecision prec(256);
    auto f = moebius_iem<Extended>(golden_lengths<Extended>(), swap2(), {Extended(2), Extended("0.6")});
    auto s = renormalize(f, 0);
    for (int n = 1; n <= 5; ++n) {
        auto next = step(s);
        CHECK(next.length < s.length);
        for (Letter a = 0; a < 2; ++a) CHECK(next.right(a) <= s.length);
        // return map lands in the domain, first-return property holds
        for (int j = 0; j < 20; ++j) {
            Extended x = next.length * Extended(j) / 20;
            Extended y = eval_return_map(next, x, true);
            CHECK(y < next.length);
            CHECK(y >= 0);
        }
        s = std::move(next);
    }
    CHECK(eval_return_map(s, Extended(0)) < s.length);
}

TEST_CASE("connections") {
    auto third = standard_iem<Rational>({Rational(2, 3), Rational(1, 3)}, swap2());
    auto r = check_no_connection(third, 10, Rational(0));
    CHECK(r.found);
    CHECK(r.iterate == 2);

    auto half = standard_iem<Rational>({Rational(1, 2), Rational(1, 2)}, swap2());
    auto h = check_no_connection(half, 10, Rational(0));
    CHECK(h.found);
    CHECK(h.iterate == 1);

    num::ScopedPrecision prec(256);
    auto golden = standard_iem<Extended>(golden_lengths<Extended>(), swap2());
    auto g = check_no_connection(golden, 10000, Extended(boost::multiprecision::ldexp(Extended(1), -200)));
    CHECK_FALSE(g.found);
    CHECK(g.depth_checked == 10000);
}

TEST_CASE("k-bounded combinatorics") {
    num::ScopedPrecision prec(256);
    auto s = renormalize(standard_iem<Extended>(golden_lengths<Extended>(), swap2()), 30);
    auto labels = s.labels();
    for (auto reading : {ChainReading::IndexConsistent, ChainReading::Literal}) {
        auto k = minimal_k(labels, 2, reading);
        REQUIRE(k.has_value());
        CHECK(*k <= 3);
        auto report = check_k_bounded(labels, 2, *k, reading);
        CHECK(report.passed);
        if (*k > 1) CHECK_FALSE(check_k_bounded(labels, 2, *k - 1, reading).passed);
    }
    CHECK_THROWS_AS(check_k_bounded(std::span(labels).first(5), 2, 3), HistoryTooShort);

    // letter 1 never wins
    std::vector<StepLabel> stuck(40, StepLabel{0, 0, 1});
    for (std::size_t k = 1; k <= 20; ++k) CHECK_FALSE(check_k_bounded(stuck, 2, k).passed);
    CHECK_FALSE(minimal_k(stuck, 2).has_value());
}

TEST_CASE("history CSV") {
    auto s = renormalize(standard_iem<Rational>(fibonacci_lengths(20), swap2()), 3);
    auto csv = history_csv(s, 10);
    CHECK(csv.rfind("depth,type,winner,loser,domain_length,q_A,q_B\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}
