#include "renorm/cli/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>

#include "renorm/analysis/analysis.hpp"
#include "renorm/errors.hpp"
#include "renorm/martingale/martingale.hpp"

#ifndef RENORM_VERSION
#define RENORM_VERSION "0.0.0"
#endif

namespace renorm::cli {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
    return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

template <Scalar T>
T parse_real(const std::string& text) {
    const auto slash = text.find('/');
    if (slash == std::string::npos || is_exact_v<T>) return num::parse<T>(text);
    return T(num::parse<T>(text.substr(0, slash)) / num::parse<T>(text.substr(slash + 1)));
}

template <Scalar T>
std::vector<T> parse_reals(const std::vector<std::string>& texts) {
    std::vector<T> out;
    for (const auto& t : texts) out.push_back(parse_real<T>(t));
    return out;
}

std::vector<KoParamText> default_ko(std::size_t letters) {
    if (letters == 2) return {{"0.1", "0.37", "0.4"}, {"-0.08", "0.61", "-0.35"}};
    return {{"0.1", "0.37", "0.4"}};
}

template <Scalar T>
struct Built {
    std::shared_ptr<const Giem<T>> map;
    std::optional<T> tuned_length;  ///< length of the second letter after tuning
};

template <Scalar T>
Built<T> build_family(const ExperimentConfig& c) {
    const auto& fs = c.family;
    CombinatorialPair pair;
    try {
        pair = CombinatorialPair::from_orders(fs.top, fs.bottom);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("family.top/bottom: ") + e.what());
    }
    Built<T> out;
    std::vector<KoParams<T>> ko;
    const bool zero_mean = fs.name == "ko-zero-mean";
    for (const auto& p : fs.ko.empty() ? default_ko(pair.size()) : fs.ko)
        ko.push_back({parse_real<T>(p.amplitude), parse_real<T>(p.center), parse_real<T>(p.bend), zero_mean});

    std::vector<T> lengths;
    if (fs.golden_tuned()) {
        if constexpr (is_exact_v<T>) {
            throw ConfigError("family.lengths: golden tuning needs extended arithmetic");
        } else {
            std::function<Giem<T>(const T&)> family = [&](const T& x) {
                return ko_iem<T>({T(1 - x), x}, pair, ko);
            };
            const T x = tune_to_golden(family, parse_real<T>(fs.tune_lo), parse_real<T>(fs.tune_hi),
                                       fs.tune_depth.value_or(c.depth + 4));
            out.tuned_length = x;
            lengths = {T(1 - x), x};
        }
    } else if (fs.lengths.size() == 1 && fs.lengths[0] == "golden") {
        try {
            lengths = golden_lengths<T>();
        } catch (const Inexact&) {
            throw ConfigError("family.lengths: golden lengths need extended arithmetic");
        }
    } else {
        lengths = parse_reals<T>(fs.lengths);
    }

    Giem<T> f = [&] {
        if (fs.name == "standard") return standard_iem(lengths, pair);
        if (fs.name == "affine") return affine_iem(lengths, pair, parse_reals<T>(fs.slopes));
        if (fs.name == "mobius")
            return moebius_iem(lengths, pair, parse_reals<T>(fs.coefficients), parse_reals<T>(fs.image_widths));
        return ko_iem(lengths, pair, ko);
    }();
    out.map = std::make_shared<const Giem<T>>(std::move(f));
    return out;
}

template <Scalar T>
long double ld(const T& v) {
    return num::to_ld(v);
}

std::string ld_text(long double v) {
    std::ostringstream os;
    os.precision(21);
    os << v;
    return os.str();
}

/// Sup-norm noise level for a composition of q + 1 maps.
template <Scalar T>
T noise_floor(std::size_t q) {
    return T(1000) * T(static_cast<long>(q + 1)) * num::unit_roundoff<T>();
}

template <Scalar T>
T log_abs(const T& x) {
    if constexpr (is_exact_v<T>) {
        return T(std::log(std::fabs(ld(x))));
    } else {
        return num::log(num::abs(x));
    }
}

/// Decay rate per step of the partition norms, from the k-step ratio.
template <Scalar T>
std::pair<T, std::size_t> measured_lambda(const RauzyState<T>& s, const std::vector<T>& norms) {
    const auto labels = s.labels();
    std::size_t k = 1;
    if (auto mk = minimal_k(labels, s.size())) k = std::max<std::size_t>(*mk, 1);
    if (norms.size() < k + 1) return {T(1), k};
    const T ratio = k_step_decay(norms, k);
    if constexpr (is_exact_v<T>) {
        return {k == 1 ? ratio : T(std::pow(ld(ratio), 1.0L / static_cast<long double>(k))), k};
    } else {
        return {num::pow(ratio, T(1) / T(static_cast<long>(k))), k};
    }
}

/// Least-squares slope of log y over x, skipping non-positive values.
template <Scalar T>
std::optional<long double> log_slope(const std::vector<std::size_t>& xs, const std::vector<T>& ys) {
    std::vector<long double> x, y;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(ys[i] > 0)) continue;
        x.push_back(static_cast<long double>(xs[i]));
        y.push_back(ld(log_abs(ys[i])));
    }
    if (x.size() < 2) return std::nullopt;
    return linear_fit(x, y).first;
}

template <Scalar T>
class Experiment {
public:
    Experiment(const ExperimentConfig& c, RunRecord& rec) : c_(c), rec_(rec), ctx_(c.precision) {
        const auto t0 = Clock::now();
        built_ = build_family<T>(c);
        rec_.timings["build_ms"] = elapsed_ms(t0);
        if (built_.tuned_length) rec_.report["tuned_length"] = fmt(*built_.tuned_length);
    }

    void run() {
        switch (c_.kind) {
            case ExperimentKind::Convergence: convergence(); break;
            case ExperimentKind::Martingale: martingale(); break;
            case ExperimentKind::Denjoy: denjoy(); break;
            case ExperimentKind::Combinatorics: combinatorics(); break;
            case ExperimentKind::Diagnostics: diagnostics(); break;
        }
    }

private:
    std::string fmt(const T& v) const { return num::format(v, c_.digits()); }
    double csv_ms(double ms) const { return c_.record_runtime ? ms : 0.0; }
    const Giem<T>& map() const { return *built_.map; }

    void check(std::string name, bool ok, std::string detail) {
        rec_.checks.push_back({std::move(name), ok, std::move(detail)});
    }

    /// Norms of h_n = phi_n - phi_{n-1} of the nonlinearity (h_0 = phi_0).
    struct Averages {
        std::optional<StepFunction<T>> previous;
        std::vector<T> h_norms;

        void add(const StepFunction<T>& phi) {
            h_norms.push_back(previous ? lp_norm(h_n(phi, *previous), T(2)) : lp_norm(phi, T(2)));
            previous = phi;
        }
    };

    std::vector<T> eta_values(const std::vector<T>& h_norms, const T& lambda) {
        if (!(lambda > 0 && lambda < 1)) return std::vector<T>(h_norms.size(), T(0));
        auto eta = eta_sequence(h_norms, lambda, 0);
        rec_.report["eta_truncation_bound_first"] = fmt(eta.truncation_bounds.front());
        return eta.values;
    }

    void convergence() {
        auto s = initial_state(built_.map);
        std::vector<ConvergenceRecord<T>> rows;
        std::vector<T> norms;
        Averages avg;
        json per_depth = json::array();
        for (std::size_t n = 0; n <= c_.depth; ++n) {
            const auto t0 = Clock::now();
            if (n > 0) s = step(s);
            auto p = std::make_shared<const DynamicalPartition<T>>(build_partition(s));
            norms.push_back(p->norm);
            if constexpr (is_exact_v<T>) {
                avg.h_norms.push_back(T(0));
            } else {
                avg.add(phi_nonlinearity(map(), p));
            }
            if (n >= c_.first_depth) {
                for (Letter a = 0; a < s.size(); ++a) {
                    const auto ta = Clock::now();
                    const auto m = compute_mn(s, a, ctx_, false);
                    const MobiusApproximant<T> F{c_.target == "identity" ? T(1) : m.value};
                    ConvergenceRecord<T> r;
                    r.depth = n;
                    r.letter = a;
                    r.m_n = m.value;
                    r.delta = deviation(s, a, F, ctx_);
                    r.partition_norm = p->norm;
                    r.log_mn = m.value == 1 ? T(0) : log_abs(m.value);
                    r.runtime_ms = csv_ms(elapsed_ms(ta));
                    rows.push_back(r);
                }
            }
            per_depth.push_back(elapsed_ms(t0));
        }
        rec_.timings["per_depth_ms"] = per_depth;

        const auto [lambda, k] = measured_lambda(s, norms);
        const auto eta = eta_values(avg.h_norms, lambda);
        for (auto& r : rows) r.eta = eta[r.depth];
        rec_.report["k"] = k;
        rec_.report["lambda"] = fmt(lambda);
        rec_.tables.push_back(Table::from_csv("convergence", convergence_csv(rows, map().pair(), c_.digits())));

        // per depth, worst letter
        std::vector<std::size_t> depths;
        std::vector<T> c0, c1, logm, eta_n, envelope;
        for (const auto& r : rows) {
            if (depths.empty() || depths.back() != r.depth) {
                depths.push_back(r.depth);
                c0.push_back(T(0));
                c1.push_back(T(0));
                logm.push_back(T(0));
                eta_n.push_back(r.eta);
            }
            c0.back() = std::max(c0.back(), r.delta.c0);
            c1.back() = std::max(c1.back(), r.delta.c1);
            logm.back() = std::max(logm.back(), num::abs(r.log_mn));
        }
        auto plot = [&](const std::string& name, const std::vector<T>& ys) {
            PlotData d{name, {}};
            for (std::size_t i = 0; i < depths.size(); ++i)
                if (ys[i] > 0) d.points.emplace_back(std::to_string(depths[i]), ld_text(std::log(ld(ys[i]))));
            rec_.plots.push_back(std::move(d));
        };
        plot("log_delta_c0", c0);
        plot("log_delta_c1", c1);
        plot("log_abs_log_mn", logm);
        plot("log_eta", eta_n);

        const std::string fam = c_.family.name;
        const bool closure = fam == "standard" || (fam == "mobius" && c_.target == "mobius");
        if (closure) {
            bool ok = true;
            std::string worst;
            for (const auto& r : rows) {
                const T floor = noise_floor<T>(s.max_return_time());
                if (r.delta.c0 > floor || r.delta.c1 > floor) {
                    ok = false;
                    worst = "depth " + std::to_string(r.depth) + " letter " + map().pair().name(r.letter) +
                            ": c1 = " + fmt(r.delta.c1);
                    break;
                }
            }
            check("closure", ok, ok ? "all deviations at arithmetic noise" : worst);
        } else {
            const auto slope = log_slope(depths, c1);
            check("delta_c1_trend", slope && *slope < 0,
                  slope ? "least-squares slope of log delta_c1 = " + ld_text(*slope) : "not enough positive values");
            // single constant for the envelope lambda^n + eta_n
            T C(1);
            for (std::size_t i = 0; i < depths.size(); ++i) {
                T lam_n(1);
                for (std::size_t j = 0; j < depths[i]; ++j) lam_n *= lambda;
                C = std::max(C, T(c1[i] / (lam_n + eta_n[i])));
            }
            rec_.report["envelope_constant"] = fmt(C);
        }
        if (fam == "ko-zero-mean") {
            const auto slope = log_slope(depths, logm);
            check("log_mn_trend", slope && *slope < 0,
                  slope ? "least-squares slope of log|log m_n| = " + ld_text(*slope) : "not enough positive values");
            T first = std::max(c0.front(), c1.front()), last = std::max(c0.back(), c1.back());
            check("identity_distance", last < first, "C1 distance to the identity " + fmt(first) + " -> " + fmt(last));
        }
    }

    void martingale() {
        if constexpr (is_exact_v<T>) {
            throw ConfigError("arithmetic.mode: martingale experiments need extended arithmetic");
        } else {
            const auto& f = map();
            const num::Integrand<T> g = [&f](const T& x) { return f.nonlinearity(x); };
            const auto cuts = f.singular_points();
            const T g_square = nonlinearity_square_integral(f, ctx_);
            auto s = initial_state(built_.map);
            std::vector<T> norms, residuals, towers, increments;
            Averages avg;
            json per_depth = json::array();
            for (std::size_t n = 0; n <= c_.depth; ++n) {
                const auto t0 = Clock::now();
                if (n > 0) s = step(s);
                auto p = std::make_shared<const DynamicalPartition<T>>(build_partition(s));
                norms.push_back(p->norm);
                auto phi = phi_n(g, p, ctx_, cuts);
                if (avg.previous) {
                    towers.push_back(conditional_expectation_check(phi, *avg.previous));
                    increments.push_back(increment_mean_defect(h_n(phi, *avg.previous), *avg.previous->partition));
                } else {
                    towers.push_back(T(0));
                    increments.push_back(T(0));
                }
                residuals.push_back(l2_distance(g_square, phi));
                avg.add(phi);
                per_depth.push_back(elapsed_ms(t0));
            }
            rec_.timings["per_depth_ms"] = per_depth;

            const auto [lambda, k] = measured_lambda(s, norms);
            const auto eta = eta_values(avg.h_norms, lambda);
            const auto eta_sq = l2_partial_sums(eta);
            std::vector<MartingaleRow> rows;
            std::ostringstream defects;
            defects << "depth,tower_defect,increment_defect\n";
            for (std::size_t n = c_.first_depth; n <= c_.depth; ++n) {
                rows.push_back({n, fmt(avg.h_norms[n]), fmt(residuals[n]), fmt(eta[n]), fmt(eta_sq[n])});
                defects << n << ',' << fmt(towers[n]) << ',' << fmt(increments[n]) << '\n';
            }
            rec_.tables.push_back(Table::from_csv("martingale", martingale_csv(rows)));
            rec_.tables.push_back(Table::from_csv("martingale_defects", defects.str()));
            PlotData plot{"l2_residual", {}};
            for (std::size_t n = c_.first_depth; n <= c_.depth; ++n)
                if (residuals[n] > 0) plot.points.emplace_back(std::to_string(n), ld_text(std::log(ld(residuals[n]))));
            rec_.plots.push_back(plot);

            const T g_norm = num::sqrt(g_square);
            rec_.report["k"] = k;
            rec_.report["lambda"] = fmt(lambda);
            rec_.report["g_l2_norm"] = fmt(g_norm);
            rec_.report["final_residual_fraction"] = fmt(g_norm > 0 ? T(residuals.back() / g_norm) : T(0));

            // residuals come from ||g||^2 - sum |D| phi_D^2, so compare squares with a quadrature allowance
            const T slack = T(1000) * num::from_ld<T>(ctx_.quad_tol);
            bool monotone = true;
            std::string where = "non-increasing";
            for (std::size_t n = c_.first_depth + 1; n <= c_.depth; ++n)
                if (residuals[n] * residuals[n] > residuals[n - 1] * residuals[n - 1] + slack) {
                    monotone = false;
                    where = "increases at depth " + std::to_string(n);
                    break;
                }
            check("l2_residual_non_increasing", monotone, where);
            const T tower = *std::max_element(towers.begin(), towers.end());
            const T inc = *std::max_element(increments.begin(), increments.end());
            check("tower_property", tower <= num::from_ld<T>(c_.tower_tol), "max defect " + fmt(tower));
            check("increment_mean", inc <= num::from_ld<T>(c_.increment_tol), "max defect " + fmt(inc));
        }
    }

    void denjoy() {
        if constexpr (is_exact_v<T>) {
            throw ConfigError("arithmetic.mode: Denjoy checks need extended arithmetic");
        } else {
            auto s = initial_state(built_.map);
            std::ostringstream csv;
            csv << "n,theta,theta_grid,max_log_product,exponent_ratio,max_pair_log_ratio,products_checked,"
                   "pairs_checked,pairs_rejected,pair_violations\n";
            std::size_t violations = 0;
            T exponent(0);
            for (std::size_t n = 0; n <= c_.depth; ++n) {
                if (n > 0) s = step(s);
                if (n < c_.first_depth) continue;
                const auto r = denjoy_check(s, c_.points, c_.pairs, c_.seed + n);
                csv << n << ',' << fmt(r.theta) << ',' << fmt(r.theta_grid) << ',' << fmt(r.max_log_product) << ','
                    << fmt(r.exponent_ratio) << ',' << fmt(r.max_pair_log_ratio) << ',' << r.products_checked << ','
                    << r.pairs_checked << ',' << r.pairs_rejected << ',' << r.pair_violations << '\n';
                violations += r.pair_violations;
                exponent = std::max(exponent, r.exponent_ratio);
            }
            rec_.tables.push_back(Table::from_csv("denjoy", csv.str()));
            rec_.report["product_exponent"] = fmt(exponent);
            check("two_point_ratios", violations == 0, std::to_string(violations) + " pair(s) outside the bound");
        }
    }

    void combinatorics() {
        auto s = initial_state(built_.map);
        std::vector<T> norms;
        std::ostringstream csv;
        csv << "n,partition_norm\n";
        for (std::size_t n = 0; n <= c_.depth; ++n) {
            if (n > 0) s = step(s);
            norms.push_back(build_partition(s).norm);
            csv << n << ',' << fmt(norms.back()) << '\n';
        }
        rec_.tables.push_back(Table::from_csv("history", history_csv(s, c_.digits())));
        rec_.tables.push_back(Table::from_csv("partition_norms", csv.str()));
        PlotData plot{"log_partition_norm", {}};
        for (std::size_t n = 0; n < norms.size(); ++n)
            plot.points.emplace_back(std::to_string(n), ld_text(std::log(ld(norms[n]))));
        rec_.plots.push_back(plot);

        const auto labels = s.labels();
        json kb;
        for (auto reading : {ChainReading::IndexConsistent, ChainReading::Literal}) {
            const auto mk = minimal_k(labels, s.size(), reading);
            kb[to_string(reading)] = mk ? json(*mk) : json(nullptr);
        }
        rec_.report["minimal_k"] = kb;
        const auto [lambda, k] = measured_lambda(s, norms);
        rec_.report["k"] = k;
        rec_.report["lambda"] = fmt(lambda);
        check("partition_decay", lambda < 1, "per-step decay " + fmt(lambda) + " from k = " + std::to_string(k));

        const T tol = is_exact_v<T> ? T(0) : T(1024) * num::unit_roundoff<T>();
        const auto conn = check_no_connection(map(), c_.depth, tol);
        rec_.report["connection"] = conn.describe(map().pair());
        check("no_connection", !conn.found, conn.describe(map().pair()));
    }

    void diagnostics() {
        const std::size_t points = c_.tau_points;
        std::vector<T> grid;
        for (std::size_t j = 1; j <= points; ++j) grid.push_back(T(static_cast<long>(j)) / T(static_cast<long>(points + 1)));
        const T qtol = num::from_ld<T>(ctx_.quad_tol);
        auto s = initial_state(built_.map);
        std::ostringstream csv;
        csv << "n,letter,q,log_mn,mn_defect,max_tau,max_weighted_dtau,int_dtau,int_weighted_d2tau,"
               "decomposition_bound,anchor_residual,zqn_residual";
        if (c_.sums) csv << ",s1,e,q_sum,u_sum";
        csv << '\n';
        bool mn_ok = true, zq_ok = true, anchor_ok = true;
        T worst_mn(0), worst_zq(0), worst_anchor(0);
        for (std::size_t n = 0; n <= c_.depth; ++n) {
            if (n > 0) s = step(s);
            if (n < c_.first_depth) continue;
            for (Letter a = 0; a < s.size(); ++a) {
                const T q(static_cast<long>(s.return_time(a)));
                const auto m = compute_mn(s, a, ctx_, true);
                const auto td = tau_diagnostics(s, a, std::span<const T>(grid), ctx_, std::optional<T>(T(1000000)));
                const T zq = zqn_identity_check(s, a, std::span<const T>(grid), ctx_);
                csv << n << ',' << map().pair().name(a) << ',' << s.return_time(a) << ',' << fmt(td.log_mn) << ','
                    << fmt(m.defect) << ',' << fmt(td.max_tau) << ',' << fmt(td.max_weighted_dtau) << ','
                    << fmt(td.int_dtau) << ',' << fmt(td.int_weighted_d2tau) << ',' << fmt(td.decomposition_bound)
                    << ',' << fmt(td.anchor_residual) << ',' << fmt(zq);
                if (c_.sums) {
                    const auto sums = diagnostic_sums(s, a, std::optional<T>(T(1) / 2), ctx_);
                    csv << ',' << fmt(*sums.s1) << ',' << fmt(*sums.e) << ',' << fmt(sums.q) << ',' << fmt(sums.u);
                }
                csv << '\n';
                mn_ok = mn_ok && m.defect <= T(10) * qtol * q;
                zq_ok = zq_ok && zq <= T(1000) * qtol * q;
                anchor_ok = anchor_ok && td.anchor_residual <= T(1000) * qtol;
                worst_mn = std::max(worst_mn, m.defect);
                worst_zq = std::max(worst_zq, zq);
                worst_anchor = std::max(worst_anchor, td.anchor_residual);
            }
        }
        rec_.tables.push_back(Table::from_csv("diagnostics", csv.str()));
        check("mn_closed_form", mn_ok, "max defect " + fmt(worst_mn));
        check("zqn_identity", zq_ok, "max residual " + fmt(worst_zq));
        check("recursion_anchor", anchor_ok, "max residual " + fmt(worst_anchor));
    }

    const ExperimentConfig& c_;
    RunRecord& rec_;
    PrecisionContext ctx_;
    Built<T> built_;
};

template <class F>
decltype(auto) with_scalar(const ExperimentConfig& c, F&& body) {
    if (c.precision.mode == ArithmeticMode::ExactRational) return body(Rational{});
    if (c.precision.float_bits == 64) return body(0.0L);
    num::ScopedPrecision guard(c.precision.float_bits);
    return body(Extended{});
}

json table_json(const Table& t) { return {{"columns", t.columns}, {"rows", t.rows}}; }

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

Table Table::from_csv(std::string name, const std::string& text) {
    Table t;
    t.name = std::move(name);
    std::istringstream in(text);
    std::string line;
    if (std::getline(in, line)) t.columns = split(line);
    while (std::getline(in, line))
        if (!line.empty()) t.rows.push_back(split(line));
    return t;
}

std::string Table::csv() const {
    std::ostringstream os;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
        os << '\n';
    };
    line(columns);
    for (const auto& r : rows) line(r);
    return os.str();
}

std::size_t Table::column(const std::string& name) const {
    auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw std::out_of_range("no column '" + name + "' in " + this->name);
    return static_cast<std::size_t>(it - columns.begin());
}

bool RunRecord::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

json RunRecord::to_json() const {
    json tables_json = json::object(), plots_json = json::object(), checks_json = json::array();
    for (const auto& t : tables) tables_json[t.name] = table_json(t);
    for (const auto& p : plots) {
        json pts = json::array();
        for (const auto& [x, y] : p.points) pts.push_back({x, y});
        plots_json[p.name] = pts;
    }
    for (const auto& c : checks) checks_json.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    return {{"tool", "renorm"},
            {"version", RENORM_VERSION},
            {"config", cli::to_json(config)},
            {"arithmetic",
             {{"mode", renorm::to_string(config.precision.mode)},
              {"float_bits", config.precision.float_bits},
              {"scalar", config.scalar()},
              {"digits", config.digits()}}},
            {"tables", tables_json},
            {"plots", plots_json},
            {"checks", checks_json},
            {"passed", passed()},
            {"report", report},
            {"timings", timings}};
}

RunRecord run(const ExperimentConfig& config) {
    RunRecord rec;
    rec.config = config;
    rec.report = json::object();
    rec.timings = json::object();
    const auto t0 = Clock::now();
    try {
        with_scalar(config, [&](auto zero) {
            using T = decltype(zero);
            Experiment<T>(config, rec).run();
        });
    } catch (const Inexact& e) {
        throw ConfigError(std::string("arithmetic.mode: exact arithmetic cannot carry this run (") + e.what() +
                          "); use extended");
    }
    rec.timings["total_ms"] = elapsed_ms(t0);
    return rec;
}

std::vector<std::filesystem::path> write_outputs(const RunRecord& record) {
    const auto& dir = record.config.output;
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    auto put = [&](const std::filesystem::path& p, const std::string& text) {
        std::ofstream out(p, std::ios::binary);
        out << text;
        if (!out) throw std::runtime_error("cannot write " + p.string());
        written.push_back(p);
    };
    for (const auto& t : record.tables) put(dir / (t.name + ".csv"), t.csv());
    for (const auto& p : record.plots) {
        std::ostringstream os;
        for (const auto& [x, y] : p.points) os << x << ' ' << y << '\n';
        put(dir / (p.name + ".dat"), os.str());
    }
    put(dir / "run.json", record.to_json().dump(2) + "\n");
    return written;
}

json validate_family(const ExperimentConfig& config) {
    return with_scalar(config, [&](auto zero) -> json {
        using T = decltype(zero);
        json out{{"family", config.family.name}, {"scalar", config.scalar()}};
        try {
            const auto built = build_family<T>(config);
            const auto report = validate(*built.map);
            out["ok"] = report.ok();
            out["genus_one"] = report.genus_one();
            out["discontinuities"] = report.discontinuities;
            json checks = json::array();
            for (const auto& c : report.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
            out["checks"] = checks;
            if (built.tuned_length) out["tuned_length"] = num::format(*built.tuned_length, config.digits());
        } catch (const InvalidFamilyParams& e) {
            out["ok"] = false;
            out["error"] = e.what();
            out["report"] = e.report();
        } catch (const Inexact& e) {
            throw ConfigError(std::string("arithmetic.mode: ") + e.what());
        }
        return out;
    });
}

json compare_runs(const json& a, const json& b) {
    const auto kind_a = a.at("config").at("experiment").get<std::string>();
    const auto kind_b = b.at("config").at("experiment").get<std::string>();
    if (kind_a != kind_b) throw IncompatibleRuns("cannot compare a " + kind_a + " run with a " + kind_b + " run");

    num::ScopedPrecision guard(1024);
    auto value = [](const std::string& cell) -> std::optional<Extended> {
        try {
            if (cell.find('/') != std::string::npos) {
                const auto r = num::parse<Rational>(cell);
                return Extended(numerator(r)) / Extended(denominator(r));
            }
            return num::parse<Extended>(cell);
        } catch (const std::exception&) {
            return std::nullopt;
        }
    };
    json diffs = json::array(), shape = json::array();
    const auto& ta = a.at("tables");
    const auto& tb = b.at("tables");
    for (const auto& [name, x] : ta.items()) {
        if (!tb.contains(name)) continue;
        const auto& y = tb[name];
        const auto cols_a = x.at("columns").get<std::vector<std::string>>();
        const auto cols_b = y.at("columns").get<std::vector<std::string>>();
        const auto rows_a = x.at("rows").get<std::vector<std::vector<std::string>>>();
        const auto rows_b = y.at("rows").get<std::vector<std::vector<std::string>>>();
        if (rows_a.size() != rows_b.size())
            shape.push_back({{"table", name}, {"rows_a", rows_a.size()}, {"rows_b", rows_b.size()}});
        const std::size_t rows = std::min(rows_a.size(), rows_b.size());
        for (std::size_t i = 0; i < cols_a.size(); ++i) {
            auto it = std::find(cols_b.begin(), cols_b.end(), cols_a[i]);
            if (it == cols_b.end()) continue;
            const auto j = static_cast<std::size_t>(it - cols_b.begin());
            Extended worst_rel(0), worst_abs(0);
            std::size_t mismatched = 0;
            for (std::size_t r = 0; r < rows; ++r) {
                const auto& u = rows_a[r].at(i);
                const auto& v = rows_b[r].at(j);
                if (u == v) continue;
                const auto p = value(u), q = value(v);
                if (!p || !q) {
                    ++mismatched;
                    worst_rel = std::max(worst_rel, Extended(1));
                    continue;
                }
                const Extended d = num::abs(Extended(*p - *q));
                const Extended scale = std::max(num::abs(*p), num::abs(*q));
                if (d == 0) continue;
                ++mismatched;
                worst_abs = std::max(worst_abs, d);
                worst_rel = std::max(worst_rel, Extended(d / scale));
            }
            if (mismatched > 0)
                diffs.push_back({{"table", name},
                                 {"column", cols_a[i]},
                                 {"rows_differing", mismatched},
                                 {"max_relative_difference", num::format(worst_rel, 20)},
                                 {"max_absolute_difference", num::format(worst_abs, 20)}});
        }
    }
    return {{"experiment", kind_a}, {"differences", diffs}, {"shape", shape},
            {"identical", diffs.empty() && shape.empty()}};
}

std::pair<int, json> failure_report(const std::exception& e) {
    json r{{"message", e.what()}};
    auto suggest_bits = [&] { r["suggestion"] = "raise arithmetic.float_bits (or --bits)"; };
    if (const auto* x = dynamic_cast<const NotRenormalizable*>(&e)) {
        r["error"] = "NotRenormalizable";
        r["depth"] = x->depth();
        r["suggestion"] = "the map has a connection or rational combinatorics at this depth; lower the depth";
        return {NotRenormalizableFailure, r};
    }
    if (const auto* x = dynamic_cast<const TilingViolation*>(&e)) {
        r["error"] = "TilingViolation";
        r["depth"] = x->depth();
        suggest_bits();
        return {PrecisionFailure, r};
    }
    if (dynamic_cast<const NonConvergent*>(&e)) {
        r["error"] = "NonConvergent";
        suggest_bits();
        return {PrecisionFailure, r};
    }
    if (dynamic_cast<const GridInadequate*>(&e)) {
        r["error"] = "GridInadequate";
        r["suggestion"] = "raise grid_points";
        return {PrecisionFailure, r};
    }
    if (dynamic_cast<const SignConventionViolation*>(&e)) {
        r["error"] = "SignConventionViolation";
        suggest_bits();
        return {PrecisionFailure, r};
    }
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const InvalidFamilyParams*>(&e) ||
        dynamic_cast<const IncompatibleRuns*>(&e) || dynamic_cast<const json::exception*>(&e) ||
        dynamic_cast<const std::invalid_argument*>(&e)) {
        r["error"] = dynamic_cast<const IncompatibleRuns*>(&e) ? "IncompatibleRuns" : "ConfigError";
        if (const auto* x = dynamic_cast<const InvalidFamilyParams*>(&e)) {
            r["error"] = "InvalidFamilyParams";
            r["report"] = x->report();
        }
        return {ConfigFailure, r};
    }
    r["error"] = "InternalError";
    return {1, r};
}

}  // namespace renorm::cli
