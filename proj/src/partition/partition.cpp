#include "renorm/partition/partition.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace renorm {

template <Scalar T>
std::size_t DynamicalPartition<T>::locate(const T& x) const {
    auto it = std::upper_bound(atoms.begin(), atoms.end(), x,
                               [](const T& v, const Atom<T>& a) { return v < a.left; });
    if (it == atoms.begin()) throw OutOfDomain("point lies left of the partition");
    return static_cast<std::size_t>(it - atoms.begin()) - 1;
}

template <Scalar T>
T tiling_tolerance(std::size_t atoms) {
    if constexpr (is_exact_v<T>) {
        return T(0);
    } else {
        const int bits = static_cast<int>(num::mantissa_bits<T>());
        return num::from_ld<T>(std::ldexp(1.0L, 8 - bits)) * T(static_cast<long double>(atoms));
    }
}

template <Scalar T>
DynamicalPartition<T> build_partition(const RauzyState<T>& s) {
    DynamicalPartition<T> p;
    p.depth = s.depth;
    const auto& f = *s.base;
    for (Letter a = 0; a < s.size(); ++a) {
        T l = s.left(a), r = s.right(a);
        const auto& it = s.itineraries[a];
        for (std::size_t i = 0; i < it.size(); ++i) {
            p.atoms.push_back({a, i, it[i], l, r});
            const auto& b = f.branch(it[i]);
            l = b.eval(l);
            r = b.eval(r);
        }
    }
    std::sort(p.atoms.begin(), p.atoms.end(),
              [](const Atom<T>& x, const Atom<T>& y) { return x.left < y.left; });

    const T tol = tiling_tolerance<T>(p.atoms.size());
    auto bad = [&](const T& gap) { return num::abs(gap) > tol; };
    if (bad(p.atoms.front().left) || bad(T(p.atoms.back().right - 1)))
        throw TilingViolation("partition does not cover [0,1); raise float_bits", s.depth);
    for (std::size_t k = 0; k + 1 < p.atoms.size(); ++k)
        if (bad(T(p.atoms[k + 1].left - p.atoms[k].right)))
            throw TilingViolation("gap or overlap between partition atoms; raise float_bits", s.depth);
    for (const auto& atom : p.atoms)
        if (!(atom.left < atom.right))
            throw TilingViolation("degenerate partition atom; raise float_bits", s.depth);

    p.index.resize(s.size());
    for (Letter a = 0; a < s.size(); ++a) p.index[a].resize(s.itineraries[a].size());
    for (std::size_t k = 0; k < p.atoms.size(); ++k) p.index[p.atoms[k].letter][p.atoms[k].iterate] = k;
    p.norm = partition_norm(p);
    return p;
}

template <Scalar T>
T partition_norm(const DynamicalPartition<T>& p) {
    T best(0);
    for (const auto& a : p.atoms) best = std::max(best, a.length());
    return best;
}

template <Scalar T>
T k_step_decay(const std::vector<T>& norms, std::size_t k) {
    if (k == 0 || norms.size() < k + 1) throw std::invalid_argument("need k >= 1 and at least k + 1 norms");
    T worst(0);
    for (std::size_t n = 0; n + k < norms.size(); ++n) worst = std::max(worst, T(norms[n + k] / norms[n]));
    return worst;
}

template <Scalar T>
std::vector<std::size_t> parents(const DynamicalPartition<T>& coarse, const DynamicalPartition<T>& fine) {
    if (fine.depth < coarse.depth) throw InconsistentDepths("fine partition is shallower than the coarse one");
    const T tol = tiling_tolerance<T>(fine.size());
    std::vector<std::size_t> up(fine.size());
    for (std::size_t k = 0; k < fine.size(); ++k) {
        const auto& atom = fine.atoms[k];
        const std::size_t j = coarse.locate((atom.left + atom.right) / 2);
        const auto& host = coarse.atoms[j];
        if (atom.left < host.left - tol || atom.right > host.right + tol)
            throw NotRefining("atom at depth " + std::to_string(fine.depth) + " is not inside an atom at depth " +
                              std::to_string(coarse.depth));
        up[k] = j;
    }
    return up;
}

template <Scalar T>
Refinement<T> split_preserved_new(const DynamicalPartition<T>& coarse, const DynamicalPartition<T>& fine,
                                  const StepLabel& step) {
    if (fine.depth != coarse.depth + 1)
        throw InconsistentDepths("expected consecutive depths, got " + std::to_string(coarse.depth) + " and " +
                                 std::to_string(fine.depth));
    Refinement<T> out;
    out.parent = parents(coarse, fine);
    const T tol = tiling_tolerance<T>(fine.size());
    for (std::size_t k = 0; k < fine.size(); ++k) {
        const auto& atom = fine.atoms[k];
        const auto& host = coarse.atoms[out.parent[k]];
        const bool same = num::abs(T(atom.left - host.left)) <= tol && num::abs(T(atom.right - host.right)) <= tol;
        (same ? out.preserved : out.fresh).push_back(k);
    }

    // predicted from the step: the winner's whole orbit is cut, and the
    // loser's orbit is cut where it runs through the winner's old orbit
    const Letter top = step.last(0), bottom = step.last(1);
    const std::size_t q_bottom = coarse.index[bottom].size();
    auto predicted_new = [&](const Atom<T>& a) {
        if (step.type == 0) return a.letter == top || (a.letter == bottom && a.iterate >= q_bottom);
        return a.letter == bottom || (a.letter == top && a.iterate < q_bottom);
    };
    out.matches_step = true;
    std::vector<bool> is_fresh(fine.size(), false);
    for (std::size_t k : out.fresh) is_fresh[k] = true;
    for (std::size_t k = 0; k < fine.size(); ++k)
        if (predicted_new(fine.atoms[k]) != is_fresh[k]) out.matches_step = false;
    return out;
}

template <Scalar T>
T equidistribution_discrepancy(const DynamicalPartition<T>& coarse, const DynamicalPartition<T>& fine) {
    const auto up = parents(coarse, fine);
    const std::size_t d = fine.index.size();
    std::vector<T> tower(d, T(0));
    std::vector<T> inside(coarse.size() * d, T(0));
    for (std::size_t k = 0; k < fine.size(); ++k) {
        const auto& atom = fine.atoms[k];
        tower[atom.letter] += atom.length();
        inside[up[k] * d + atom.letter] += atom.length();
    }
    T worst(0);
    for (std::size_t j = 0; j < coarse.size(); ++j)
        for (Letter a = 0; a < d; ++a)
            worst = std::max(worst, num::abs(T(inside[j * d + a] / coarse.atoms[j].length() - tower[a])));
    return worst;
}

template <Scalar T>
T equidistribution_discrepancy(const RauzyState<T>& s, std::size_t r) {
    if (r > s.depth) throw InconsistentDepths("coarse depth exceeds the state depth");
    RauzyState<T> c = initial_state(s.base);
    for (std::size_t m = 0; m < r; ++m) c = step(c);
    return equidistribution_discrepancy(build_partition(c), build_partition(s));
}

template <Scalar T>
bool qn_small_check(const T& u, const T& v, const RauzyState<T>& s, const T& tol) {
    if (!(u < v)) return true;
    const auto& f = *s.base;
    const std::size_t q = s.max_return_time();
    struct Piece {
        T left, right;
        std::size_t iterate;
    };
    std::vector<Piece> all;
    std::vector<std::pair<T, T>> current{{u, v}};
    for (std::size_t i = 0;; ++i) {
        for (const auto& [l, r] : current) all.push_back({l, r, i});
        if (i + 1 == q) break;
        std::vector<std::pair<T, T>> next;
        for (auto [l, r] : current) {
            while (l < r) {
                const auto& b = f.branch(f.letter_at(l));
                const T cut = r < b.right ? r : b.right;
                next.emplace_back(b.eval(l), b.eval(cut));
                l = cut;
            }
        }
        current = std::move(next);
    }
    std::sort(all.begin(), all.end(), [](const Piece& x, const Piece& y) { return x.left < y.left; });
    T reach = all.front().right;
    for (std::size_t k = 1; k < all.size(); ++k) {
        if (all[k].left < reach - tol) return false;
        reach = std::max(reach, all[k].right);
    }
    return true;
}

template <Scalar T>
std::string partition_csv(const DynamicalPartition<T>& p, const CombinatorialPair& pair, int digits) {
    std::ostringstream out;
    out << "depth,letter,iterate,left,right,length\n";
    for (const auto& a : p.atoms)
        out << p.depth << ',' << pair.name(a.letter) << ',' << a.iterate << ',' << num::format(a.left, digits) << ','
            << num::format(a.right, digits) << ',' << num::format(a.length(), digits) << '\n';
    return out.str();
}

#define RENORM_INSTANTIATE(T)                                                                                     \
    template struct DynamicalPartition<T>;                                                                        \
    template T tiling_tolerance<T>(std::size_t);                                                                  \
    template DynamicalPartition<T> build_partition(const RauzyState<T>&);                                         \
    template T partition_norm(const DynamicalPartition<T>&);                                                      \
    template T k_step_decay(const std::vector<T>&, std::size_t);                                                  \
    template std::vector<std::size_t> parents(const DynamicalPartition<T>&, const DynamicalPartition<T>&);        \
    template Refinement<T> split_preserved_new(const DynamicalPartition<T>&, const DynamicalPartition<T>&,        \
                                               const StepLabel&);                                                 \
    template T equidistribution_discrepancy(const DynamicalPartition<T>&, const DynamicalPartition<T>&);          \
    template T equidistribution_discrepancy(const RauzyState<T>&, std::size_t);                                   \
    template bool qn_small_check(const T&, const T&, const RauzyState<T>&, const T&);                             \
    template std::string partition_csv(const DynamicalPartition<T>&, const CombinatorialPair&, int);
RENORM_FOR_EACH_SCALAR(RENORM_INSTANTIATE)
#undef RENORM_INSTANTIATE

}  // namespace renorm
