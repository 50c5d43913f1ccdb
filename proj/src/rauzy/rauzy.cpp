#include "renorm/rauzy/rauzy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace renorm {

template <Scalar T>
T RauzyState<T>::left(Letter a) const {
    T x(0);
    for (std::size_t j = 0; j < pair.position(0, a); ++j) x += lengths[pair.letter_at(0, j)];
    return x;
}

template <Scalar T>
T RauzyState<T>::image_left(Letter a) const {
    T x(0);
    for (std::size_t j = 0; j < pair.position(1, a); ++j) x += image_widths[pair.letter_at(1, j)];
    return x;
}

template <Scalar T>
Letter RauzyState<T>::letter_at(const T& x) const {
    if (x < 0 || !(x < length))
        throw OutOfDomain("point " + num::format(x, 20) + " is outside the induction domain");
    T edge(0);
    for (std::size_t j = 0; j < size(); ++j) {
        Letter a = pair.letter_at(0, j);
        edge += lengths[a];
        if (x < edge) return a;
    }
    return pair.letter_at(0, size() - 1);
}

template <Scalar T>
std::size_t RauzyState<T>::max_return_time() const {
    std::size_t q = 0;
    for (const auto& it : itineraries) q = std::max(q, it.size());
    return q;
}

template <Scalar T>
std::vector<StepLabel> RauzyState<T>::labels() const {
    return std::vector<StepLabel>(history.begin(), history.end());
}

template <Scalar T>
T RauzyState<T>::follow(Letter a, T x) const {
    for (Letter s : itineraries[a]) x = base->branch(s).eval(x);
    return x;
}

template <Scalar T>
T RauzyState<T>::follow_back(Letter a, T y) const {
    const auto& it = itineraries[a];
    for (auto s = it.rbegin(); s != it.rend(); ++s) y = base->branch(*s).inverse(y);
    return y;
}

template <Scalar T>
RauzyState<T> initial_state(std::shared_ptr<const Giem<T>> f) {
    RauzyState<T> s;
    s.base = f;
    s.length = T(1);
    s.pair = f->pair();
    for (Letter a = 0; a < f->size(); ++a) {
        s.lengths.push_back(f->branch(a).width());
        s.image_widths.push_back(f->branch(a).image_width());
        s.return_times.push_back(BigInt(1));
        s.itineraries.push_back({a});
    }
    return s;
}

namespace {

// Inserts the last letter of the row that changes right after the winner.
CombinatorialPair update_pair(const CombinatorialPair& pair, int type, Letter winner) {
    const std::size_t d = pair.size();
    std::vector<std::size_t> rows[2] = {pair.top(), pair.bottom()};
    const int changed = 1 - type;
    const std::size_t anchor = pair.position(changed, winner);
    auto& row = rows[changed];
    for (Letter a = 0; a < d; ++a) {
        const std::size_t p = pair.position(changed, a);
        if (p == d - 1)
            row[a] = anchor + 1;
        else if (p > anchor)
            row[a] = p + 1;
    }
    return CombinatorialPair(pair.alphabet(), rows[0], rows[1]);
}

}  // namespace

template <Scalar T>
RauzyState<T> step(const RauzyState<T>& s) {
    const std::size_t d = s.size();
    const Letter top_last = s.pair.letter_at(0, d - 1);
    const Letter bottom_last = s.pair.letter_at(1, d - 1);
    const T& top_len = s.lengths[top_last];
    const T& bottom_len = s.image_widths[bottom_last];

    T gap = num::abs(T(top_len - bottom_len));
    bool equal = gap == 0;
    if constexpr (!is_exact_v<T>) {
        const int bits = static_cast<int>(num::mantissa_bits<T>());
        const T tol = num::from_ld<T>(std::ldexp(1.0L, 8 - bits));
        equal = gap <= tol;
    }
    if (equal) throw NotRenormalizable("compared intervals have equal length", s.depth);

    RauzyState<T> next = s;
    next.depth = s.depth + 1;
    StepRecord<T> rec;
    if (bottom_len < top_len) {
        // type 0: the image of bottom_last is cut off the end of top_last
        rec.type = 0;
        rec.winner = top_last;
        rec.loser = bottom_last;
        const T cut = s.length - bottom_len;
        const T x = s.follow(top_last, cut);
        const T image_left = s.image_left(top_last);
        const T image_right = image_left + s.image_widths[top_last];
        if (!(image_left < x && x < image_right))
            throw TilingViolation("type-0 cut image left the winner's image; raise float_bits", s.depth);
        next.length = cut;
        next.lengths[top_last] = top_len - bottom_len;
        next.image_widths[top_last] = x - image_left;
        next.image_widths[bottom_last] = image_right - x;
        auto& it = next.itineraries[bottom_last];
        it.insert(it.end(), s.itineraries[top_last].begin(), s.itineraries[top_last].end());
    } else {
        // type 1: top_last is cut off, and its preimage splits bottom_last
        rec.type = 1;
        rec.winner = bottom_last;
        rec.loser = top_last;
        const T top_left = s.length - top_len;
        const T c = s.follow_back(bottom_last, top_left);
        const T l = s.left(bottom_last);
        const T r = l + s.lengths[bottom_last];
        if (!(l < c && c < r))
            throw TilingViolation("type-1 cut left the winner's interval; raise float_bits", s.depth);
        next.length = top_left;
        next.lengths[bottom_last] = c - l;
        next.lengths[top_last] = r - c;
        next.image_widths[bottom_last] = bottom_len - top_len;
        std::vector<Letter> it = s.itineraries[bottom_last];
        it.insert(it.end(), s.itineraries[top_last].begin(), s.itineraries[top_last].end());
        next.itineraries[top_last] = std::move(it);
    }
    next.pair = update_pair(s.pair, rec.type, rec.winner);
    next.return_times[rec.loser] = s.return_times[rec.loser] + s.return_times[rec.winner];

    rec.new_domain_length = next.length;
    rec.new_lengths = next.lengths;
    rec.new_pair = next.pair;
    rec.new_return_times = next.return_times;
    next.history.push_back(std::move(rec));
    return next;
}

template <Scalar T>
RauzyState<T> renormalize(std::shared_ptr<const Giem<T>> f, std::size_t n) {
    auto report = validate(*f);
    if (!report.ok() || !report.genus_one())
        throw InvalidFamilyParams("renormalization needs a valid genus-one map", report.summary());
    RauzyState<T> s = initial_state(std::move(f));
    for (std::size_t m = 0; m < n; ++m) s = step(s);
    return s;
}

template <Scalar T>
T eval_return_map(const RauzyState<T>& s, const T& x, bool check_first_return) {
    const Letter a = s.letter_at(x);
    const std::size_t q = s.return_time(a);
    T y = x;
    for (std::size_t i = 0; i < q; ++i) {
        y = s.base->eval(y);
        if (check_first_return && i + 1 < q && y < s.length)
            throw std::logic_error("orbit re-entered the induction domain before its return time");
    }
    return y;
}

template <Scalar T>
std::string ConnectionReport<T>::describe(const CombinatorialPair& pair) const {
    if (!found) return "no connection found up to depth " + std::to_string(depth_checked);
    return "f^" + std::to_string(iterate) + " maps the left end of " + pair.name(from) +
           " to the left end of " + pair.name(to) + " (distance " + num::format(distance, 6) + ")";
}

template <Scalar T>
ConnectionReport<T> check_no_connection(const Giem<T>& f, std::size_t depth, const T& tol) {
    ConnectionReport<T> report;
    report.depth_checked = depth;
    const auto& pair = f.pair();
    std::vector<std::pair<T, Letter>> targets;
    for (Letter b = 0; b < f.size(); ++b)
        if (pair.position(0, b) != 0) targets.emplace_back(f.branch(b).left, b);
    std::sort(targets.begin(), targets.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });

    // iterate all starting points together so the earliest m is reported
    std::vector<T> points;
    for (Letter a = 0; a < f.size(); ++a) points.push_back(f.branch(a).left);
    for (std::size_t m = 1; m <= depth; ++m) {
        for (Letter a = 0; a < f.size(); ++a) {
            points[a] = f.eval(points[a]);
            const T& x = points[a];
            auto it = std::lower_bound(targets.begin(), targets.end(), x,
                                       [](const auto& t, const T& v) { return t.first < v; });
            for (auto cand : {it, it == targets.begin() ? it : std::prev(it)}) {
                if (cand == targets.end()) continue;
                T dist = num::abs(T(cand->first - x));
                bool hit = is_exact_v<T> ? dist == 0 : dist <= tol;
                if (hit) {
                    report.found = true;
                    report.iterate = m;
                    report.from = a;
                    report.to = cand->second;
                    report.distance = dist;
                    return report;
                }
            }
        }
    }
    return report;
}

std::string to_string(ChainReading reading) {
    return reading == ChainReading::Literal ? "literal" : "index-consistent";
}

namespace {

bool chain_holds(std::span<const StepLabel> h, std::size_t n1, std::size_t p, ChainReading reading) {
    for (std::size_t i = 0; i < p; ++i) {
        const StepLabel& now = h[n1 + i];
        const StepLabel& after = h[n1 + i + 1];
        Letter lhs, rhs;
        if (reading == ChainReading::Literal) {
            lhs = now.last(1 - h[n1 + p].type);
            rhs = after.last(now.type);
        } else {
            lhs = now.loser;
            rhs = after.winner;
        }
        if (lhs != rhs) return false;
    }
    return true;
}

bool pair_ok(std::span<const StepLabel> h, std::size_t n, std::size_t k, Letter beta, Letter gamma,
             ChainReading reading) {
    const std::size_t lo = n + 1 >= k ? n + 1 - k : 0;
    for (std::size_t n1 = lo; n1 < n + k && n1 < h.size(); ++n1) {
        if (h[n1].winner != beta) continue;
        for (std::size_t end = std::max(n1, lo); end < n + k && end < h.size(); ++end) {
            if (h[end].loser != gamma) continue;
            if (chain_holds(h, n1, end - n1, reading)) return true;
        }
    }
    return false;
}

}  // namespace

KBoundedReport check_k_bounded(std::span<const StepLabel> history, std::size_t alphabet_size,
                               std::size_t k, ChainReading reading) {
    if (k == 0) throw std::invalid_argument("k must be positive");
    if (history.size() < 2 * k)
        throw HistoryTooShort("k-bounded check with k = " + std::to_string(k) + " needs " +
                              std::to_string(2 * k) + " steps, history has " + std::to_string(history.size()));
    KBoundedReport report;
    report.k = k;
    report.reading = reading;
    report.window_first = 0;
    report.window_last = history.size() - k;
    for (std::size_t n = report.window_first; n <= report.window_last; ++n)
        for (Letter beta = 0; beta < alphabet_size; ++beta)
            for (Letter gamma = 0; gamma < alphabet_size; ++gamma)
                if (!pair_ok(history, n, k, beta, gamma, reading)) {
                    ++report.failure_count;
                    if (report.failures.size() < 20) report.failures.push_back({n, beta, gamma});
                }
    report.passed = report.failure_count == 0;
    report.minimal_k = minimal_k(history, alphabet_size, reading);
    return report;
}

std::optional<std::size_t> minimal_k(std::span<const StepLabel> history, std::size_t alphabet_size,
                                     ChainReading reading) {
    for (std::size_t k = 1; 2 * k <= history.size(); ++k) {
        bool ok = true;
        for (std::size_t n = 0; ok && n + k <= history.size(); ++n)
            for (Letter beta = 0; ok && beta < alphabet_size; ++beta)
                for (Letter gamma = 0; ok && gamma < alphabet_size; ++gamma)
                    ok = pair_ok(history, n, k, beta, gamma, reading);
        if (ok) return k;
    }
    return std::nullopt;
}

namespace {

// For two letters the step types run the subtractive Euclidean algorithm on
// the pair of lengths, so a type prefix pins the length ratio to an interval.
// Undoing the steps from (1, 1) gives a point of that interval; intervals of
// equal depth are disjoint, so these points order the prefixes.
Rational prefix_position(const std::vector<int>& types) {
    Rational a(1), b(1);
    for (auto t = types.rbegin(); t != types.rend(); ++t) {
        if (*t == 0)
            b += a;
        else
            a += b;
    }
    return b / (a + b);
}

template <Scalar T>
std::vector<int> type_prefix(const Giem<T>& f, std::size_t depth) {
    std::vector<int> types;
    auto s = initial_state(std::make_shared<const Giem<T>>(f));
    for (std::size_t n = 0; n < depth; ++n) {
        try {
            s = step(s);
        } catch (const NotRenormalizable&) {
            break;
        }
        types.push_back(s.history.back().type);
    }
    return types;
}

// sign of (position of the prefix of f) - (position of target); a prefix cut
// short by a connection counts as a match up to where it stopped
template <Scalar T>
int compare_prefix(const Giem<T>& f, const std::vector<int>& target) {
    auto types = type_prefix(f, target.size());
    std::vector<int> head(target.begin(), target.begin() + static_cast<std::ptrdiff_t>(types.size()));
    if (types == target) return 0;
    const Rational mine = prefix_position(types), theirs = prefix_position(head);
    if (types == head) return 0;
    return mine < theirs ? -1 : 1;
}

}  // namespace

template <Scalar T>
T tune_to_golden(const std::function<Giem<T>(const T&)>& family, T lo, T hi, std::size_t depth) {
    std::vector<int> target;
    for (std::size_t n = 0; n < depth; ++n) target.push_back(static_cast<int>(n % 2));
    if (family(lo).size() != 2) throw InvalidFamilyParams("golden tuning needs a two-letter family", "");
    int at_lo = compare_prefix(family(lo), target);
    if (at_lo == 0) return lo;
    int at_hi = compare_prefix(family(hi), target);
    if (at_hi == 0) return hi;
    if (at_lo == at_hi)
        throw InvalidFamilyParams("golden tuning bracket does not straddle the golden combinatorics", "");
    for (int iter = 0; iter < 400; ++iter) {
        T mid = (lo + hi) / 2;
        if (!(lo < mid && mid < hi)) break;
        int c = compare_prefix(family(mid), target);
        if (c == 0) return mid;
        (c == at_lo ? lo : hi) = mid;
    }
    throw NonConvergent("golden tuning ran out of precision before matching " + std::to_string(depth) + " steps");
}

template <Scalar T>
std::string history_csv(const RauzyState<T>& s, int digits) {
    std::ostringstream os;
    os << "depth,type,winner,loser,domain_length";
    for (const auto& name : s.pair.alphabet()) os << ",q_" << name;
    os << '\n';
    os << "0,,,," << num::format(T(1), digits);
    for (std::size_t a = 0; a < s.size(); ++a) os << ",1";
    os << '\n';
    for (std::size_t m = 0; m < s.history.size(); ++m) {
        const auto& r = s.history[m];
        os << m + 1 << ',' << r.type << ',' << s.pair.name(r.winner) << ',' << s.pair.name(r.loser) << ','
           << num::format(r.new_domain_length, digits);
        for (const auto& q : r.new_return_times) os << ',' << q.str();
        os << '\n';
    }
    return os.str();
}

#define RENORM_INSTANTIATE_RAUZY(T)                                                              \
    template struct RauzyState<T>;                                                               \
    template RauzyState<T> initial_state<T>(std::shared_ptr<const Giem<T>>);                     \
    template RauzyState<T> step<T>(const RauzyState<T>&);                                        \
    template RauzyState<T> renormalize<T>(std::shared_ptr<const Giem<T>>, std::size_t);          \
    template T eval_return_map<T>(const RauzyState<T>&, const T&, bool);                         \
    template struct ConnectionReport<T>;                                                         \
    template ConnectionReport<T> check_no_connection<T>(const Giem<T>&, std::size_t, const T&);  \
    template std::string history_csv<T>(const RauzyState<T>&, int);                              \
    template T tune_to_golden<T>(const std::function<Giem<T>(const T&)>&, T, T, std::size_t);
RENORM_FOR_EACH_SCALAR(RENORM_INSTANTIATE_RAUZY)
#undef RENORM_INSTANTIATE_RAUZY

}  // namespace renorm
