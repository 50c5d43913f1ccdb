#include "renorm/martingale/martingale.hpp"

#include <algorithm>
#include <exception>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace renorm {

template <Scalar T>
T StepFunction<T>::integral() const {
    T total(0);
    for (std::size_t k = 0; k < values.size(); ++k) total += values[k] * partition->atoms[k].length();
    return total;
}

namespace {

template <Scalar T>
T atom_average(const num::Integrand<T>& g, const Atom<T>& atom, const PrecisionContext& ctx,
               const std::vector<T>& cuts) {
    std::vector<T> inside;
    for (const auto& c : cuts)
        if (atom.left < c && c < atom.right) inside.push_back(c);
    // the tolerance is on the average, so scale it by the atom length
    const T len = atom.length();
    const T tol = num::from_ld<T>(ctx.quad_tol) * len;
    auto r = num::integrate<T>(g, atom.left, atom.right, tol, inside, ctx.max_panels);
    return r.value / len;
}

// log f'(right-) - log f'(left) on the branch holding the atom
template <Scalar T>
T log_slope_jump(const Branch<T>& b, const T& l, const T& r) {
    if (b.profile.kind() == Profile<T>::Kind::Linear) return T(0);
    return num::log(T(b.deriv(r) / b.deriv(l)));
}

}  // namespace

template <Scalar T>
StepFunction<T> phi_n_serial(const num::Integrand<T>& g, std::shared_ptr<const DynamicalPartition<T>> p,
                             const PrecisionContext& ctx, const std::vector<T>& cuts) {
    StepFunction<T> phi{p, std::vector<T>(p->size())};
    for (std::size_t k = 0; k < p->size(); ++k) phi.values[k] = atom_average(g, p->atoms[k], ctx, cuts);
    return phi;
}

template <Scalar T>
StepFunction<T> phi_n(const num::Integrand<T>& g, std::shared_ptr<const DynamicalPartition<T>> p,
                      const PrecisionContext& ctx, const std::vector<T>& cuts) {
    StepFunction<T> phi{p, std::vector<T>(p->size())};
    const auto n = static_cast<std::ptrdiff_t>(p->size());
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t k = 0; k < n; ++k) {
        try {
            phi.values[k] = atom_average(g, p->atoms[k], ctx, cuts);
        } catch (...) {
#pragma omp critical(renorm_phi_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return phi;
}

template <Scalar T>
StepFunction<T> phi_nonlinearity(const Giem<T>& f, std::shared_ptr<const DynamicalPartition<T>> p) {
    StepFunction<T> phi{p, std::vector<T>(p->size())};
    for (std::size_t k = 0; k < p->size(); ++k) {
        const auto& a = p->atoms[k];
        phi.values[k] = log_slope_jump(f.branch(a.branch), a.left, a.right) / a.length();
    }
    return phi;
}

template <Scalar T>
T phi_closed_form_defect(const Giem<T>& f, std::shared_ptr<const DynamicalPartition<T>> p,
                         const PrecisionContext& ctx) {
    auto closed = phi_nonlinearity(f, p);
    num::Integrand<T> g = [&f](const T& x) { return f.nonlinearity(x); };
    auto quad = phi_n(g, p, ctx, f.singular_points());
    T worst(0);
    for (std::size_t k = 0; k < p->size(); ++k)
        worst = std::max(worst, num::abs(T(closed.values[k] - quad.values[k])));
    return worst;
}

template <Scalar T>
StepFunction<T> h_n(const StepFunction<T>& fine, const StepFunction<T>& coarse) {
    if (fine.depth() != coarse.depth() + 1)
        throw InconsistentDepths("increments need consecutive depths, got " + std::to_string(coarse.depth()) +
                                 " and " + std::to_string(fine.depth()));
    const auto up = parents(*coarse.partition, *fine.partition);
    StepFunction<T> h{fine.partition, std::vector<T>(fine.values.size())};
    for (std::size_t k = 0; k < h.values.size(); ++k) h.values[k] = fine.values[k] - coarse.values[up[k]];
    return h;
}

template <Scalar T>
T conditional_expectation_check(const StepFunction<T>& fine, const StepFunction<T>& coarse) {
    const auto up = parents(*coarse.partition, *fine.partition);
    std::vector<T> mass(coarse.values.size(), T(0));
    for (std::size_t k = 0; k < fine.values.size(); ++k)
        mass[up[k]] += fine.values[k] * fine.partition->atoms[k].length();
    T worst(0);
    for (std::size_t j = 0; j < mass.size(); ++j)
        worst = std::max(worst,
                         num::abs(T(mass[j] / coarse.partition->atoms[j].length() - coarse.values[j])));
    return worst;
}

template <Scalar T>
T increment_mean_defect(const StepFunction<T>& h, const DynamicalPartition<T>& coarse) {
    const auto up = parents(coarse, *h.partition);
    std::vector<T> mass(coarse.size(), T(0));
    for (std::size_t k = 0; k < h.values.size(); ++k) mass[up[k]] += h.values[k] * h.partition->atoms[k].length();
    T worst(0);
    for (const auto& m : mass) worst = std::max(worst, num::abs(m));
    return worst;
}

template <Scalar T>
T lp_norm(const StepFunction<T>& h, const T& p) {
    if (p < 1) throw std::invalid_argument("L_p norm needs p >= 1");
    T total(0);
    if constexpr (is_exact_v<T>) {
        if (p == 1) {
            for (std::size_t k = 0; k < h.values.size(); ++k)
                total += num::abs(h.values[k]) * h.partition->atoms[k].length();
            return total;
        }
        if (p == 2) {
            for (std::size_t k = 0; k < h.values.size(); ++k)
                total += h.values[k] * h.values[k] * h.partition->atoms[k].length();
            return num::sqrt(total);
        }
    }
    for (std::size_t k = 0; k < h.values.size(); ++k) {
        if (h.values[k] == 0) continue;
        total += num::pow(num::abs(h.values[k]), p) * h.partition->atoms[k].length();
    }
    if (total == 0) return total;
    return num::pow(total, T(T(1) / p));
}

template <Scalar T>
std::vector<T> l2_partial_sums(const std::vector<T>& norms) {
    std::vector<T> out;
    T run(0);
    for (const auto& r : norms) {
        run += r * r;
        out.push_back(run);
    }
    return out;
}

template <Scalar T>
T nonlinearity_square_integral(const Giem<T>& f, const PrecisionContext& ctx) {
    T total(0);
    for (const auto& b : f.branches()) {
        if (b.profile.kind() == Profile<T>::Kind::Linear) continue;
        num::Integrand<T> g2 = [&b](const T& x) {
            T v = b.nonlinearity(x);
            return T(v * v);
        };
        auto cuts = b.singular_points();
        total += num::integrate<T>(g2, b.left, b.right, ctx, cuts);
    }
    return total;
}

template <Scalar T>
T l2_distance(const T& g_square_integral, const StepFunction<T>& phi) {
    T explained(0);
    for (std::size_t k = 0; k < phi.values.size(); ++k)
        explained += phi.values[k] * phi.values[k] * phi.partition->atoms[k].length();
    T rest = g_square_integral - explained;
    if (rest <= 0) return T(0);
    return num::sqrt(rest);
}

template <Scalar T>
EtaSequence<T> eta_sequence(const std::vector<T>& norms, const T& lambda, std::size_t first_depth, const T& p) {
    if (!(lambda > 0 && lambda < 1)) throw BadLambda("decay base must lie in (0,1)");
    EtaSequence<T> eta;
    eta.first_depth = first_depth;
    eta.lambda = lambda;
    eta.p = p;
    const std::size_t count = norms.size();
    eta.values.assign(count, T(0));
    T biggest(0);
    for (const auto& r : norms) biggest = std::max(biggest, r);
    // backward Horner: eta_n = r_n + lambda * eta_{n+1}
    T acc(0);
    for (std::size_t k = count; k-- > 0;) {
        acc = norms[k] + lambda * acc;
        eta.values[k] = acc;
    }
    // omitted tail sum_{m > N} lambda^(m-n) r_m, with r_m bounded by the largest computed norm
    eta.truncation_bounds.assign(count, T(0));
    T power(1);
    for (std::size_t k = count; k-- > 0;) {
        power *= lambda;
        eta.truncation_bounds[k] = power * biggest / (T(1) - lambda);
    }
    for (const auto& v : eta.values) eta.sum_squares += v * v;
    return eta;
}

std::string martingale_csv(const std::vector<MartingaleRow>& rows) {
    std::ostringstream out;
    out << "depth,h_norm_p,l2_residual,eta,eta_square_sum\n";
    for (const auto& r : rows)
        out << r.depth << ',' << r.h_norm << ',' << r.l2_residual << ',' << r.eta << ',' << r.eta_square_sum << '\n';
    return out.str();
}

#define RENORM_INSTANTIATE(T)                                                                                      \
    template struct StepFunction<T>;                                                                               \
    template StepFunction<T> phi_n(const num::Integrand<T>&, std::shared_ptr<const DynamicalPartition<T>>,         \
                                   const PrecisionContext&, const std::vector<T>&);                                \
    template StepFunction<T> phi_n_serial(const num::Integrand<T>&, std::shared_ptr<const DynamicalPartition<T>>,  \
                                          const PrecisionContext&, const std::vector<T>&);                         \
    template StepFunction<T> h_n(const StepFunction<T>&, const StepFunction<T>&);                                  \
    template T conditional_expectation_check(const StepFunction<T>&, const StepFunction<T>&);                      \
    template T increment_mean_defect(const StepFunction<T>&, const DynamicalPartition<T>&);                        \
    template T lp_norm(const StepFunction<T>&, const T&);                                                          \
    template std::vector<T> l2_partial_sums(const std::vector<T>&);                                                \
    template T l2_distance(const T&, const StepFunction<T>&);                                                      \
    template EtaSequence<T> eta_sequence(const std::vector<T>&, const T&, std::size_t, const T&);
RENORM_FOR_EACH_SCALAR(RENORM_INSTANTIATE)
#undef RENORM_INSTANTIATE

#define RENORM_INSTANTIATE_FLOAT(T)                                                                                \
    template StepFunction<T> phi_nonlinearity(const Giem<T>&, std::shared_ptr<const DynamicalPartition<T>>);       \
    template T phi_closed_form_defect(const Giem<T>&, std::shared_ptr<const DynamicalPartition<T>>,                \
                                      const PrecisionContext&);                                                    \
    template T nonlinearity_square_integral(const Giem<T>&, const PrecisionContext&);
RENORM_FOR_EACH_FLOAT(RENORM_INSTANTIATE_FLOAT)
template StepFunction<Rational> phi_nonlinearity(const Giem<Rational>&,
                                                 std::shared_ptr<const DynamicalPartition<Rational>>);
template Rational nonlinearity_square_integral(const Giem<Rational>&, const PrecisionContext&);
#undef RENORM_INSTANTIATE_FLOAT

}  // namespace renorm
