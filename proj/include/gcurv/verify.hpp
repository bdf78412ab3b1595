#pragma once

// Numerical verification of the semigroup characterizations of curvature
// and of the gradient-decay mechanism behind the Liouville property:
//
//   (b)  Gamma(P_t f)           <= P_t Gamma(f)
//   (c)  P_t(f^2) - (P_t f)^2   <= 2t P_t Gamma(f)
//   (d)  2t Gamma(P_t f)        <= P_t(f^2) - (P_t f)^2
//
// all three hold for every f and t > 0 exactly when the graph satisfies
// CD(0,inf). The module measures per-vertex margins RHS - LHS, runs the
// randomized equivalence experiment with a directed small-t violation
// search (the t -> 0 derivative of the (b)-gap at x is 2 Gamma2(f)(x), so
// a negative-curvature witness localizes a violation far more reliably
// than blind sampling), checks the interpolation identity
// d/ds P_s (P_{t-s} f)^2 = 2 P_s Gamma(P_{t-s} f) by finite differences,
// solves Dirichlet problems, and builds intrinsic-metric cutoff sequences
// with Gamma(eta_k) <= 1/k.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "gcurv/curvature.hpp"
#include "gcurv/gamma.hpp"
#include "gcurv/graph.hpp"
#include "gcurv/heat.hpp"
#include "gcurv/random.hpp"

namespace gcurv {

enum class Condition { b_gradient, c_poincare, d_reverse_poincare };

inline const char* to_string(Condition c) {
    switch (c) {
    case Condition::b_gradient: return "b";
    case Condition::c_poincare: return "c";
    case Condition::d_reverse_poincare: return "d";
    }
    return "?";
}

/// Per-vertex margins RHS - LHS of the selected condition, composed exactly
/// as written above. Nonnegative margins mean the inequality holds there.
inline RealFunction check_condition(const WeightedGraph& g, const HeatOperator& p,
                                    const RealFunction& f, double t, Condition which) {
    if (!(t > 0.0)) throw std::invalid_argument("check_condition needs t > 0");
    const RealFunction ptf = p.apply(t, f);
    switch (which) {
    case Condition::b_gradient:
        return p.apply(t, gamma(g, f)) - gamma(g, ptf);
    case Condition::c_poincare: {
        const RealFunction variance =
            p.apply(t, f.cwiseProduct(f)) - ptf.cwiseProduct(ptf);
        return 2.0 * t * p.apply(t, gamma(g, f)) - variance;
    }
    case Condition::d_reverse_poincare: {
        const RealFunction variance =
            p.apply(t, f.cwiseProduct(f)) - ptf.cwiseProduct(ptf);
        return variance - 2.0 * t * gamma(g, ptf);
    }
    }
    throw std::logic_error("unreachable");
}

struct InequalityReport {
    Condition condition = Condition::b_gradient;
    std::vector<double> t_grid;
    // margins[sample][ti] = min over vertices of RHS - LHS
    std::vector<std::vector<double>> margins;
    double global_worst_margin = std::numeric_limits<double>::infinity();
    int witness_sample = -1;
    double witness_t = 0.0;
    int witness_vertex = -1;
    RealFunction witness_f;
};

struct ViolationWitness {
    RealFunction f;
    double t = 0.0;
    int vertex = -1;
    Condition condition = Condition::b_gradient;
    double gap = 0.0; // LHS - RHS > 0 at the witness
};

struct EquivalenceOutcome {
    double curvature_min = 0.0;
    int curvature_argmin = -1;
    std::uint64_t seed = 0;
    int n_samples = 0;
    std::vector<double> t_grid;
    std::array<InequalityReport, 3> reports; // b, c, d
    std::optional<ViolationWitness> violation;
};

/// Randomized check of the equivalence: computes K_min = min_x K_max(x,inf),
/// measures all three margins over seeded random functions, and when
/// K_min < 0 runs the directed violation search (curvature witness plus
/// geometric small-t scan of condition (b) at the minimizing vertex).
inline EquivalenceOutcome equivalence_experiment(const WeightedGraph& g, int n_samples,
                                                 const std::vector<double>& t_grid,
                                                 std::uint64_t seed, int threads = 0) {
    if (n_samples < 1) throw std::invalid_argument("equivalence_experiment: n_samples >= 1");
    for (const double t : t_grid)
        if (!(t > 0.0)) throw std::invalid_argument("equivalence_experiment: t grid must be positive");

    EquivalenceOutcome outcome;
    outcome.seed = seed;
    outcome.n_samples = n_samples;
    outcome.t_grid = t_grid;

    const auto profile = curvature_profile(g, std::numeric_limits<double>::infinity(), threads);
    outcome.curvature_min = std::numeric_limits<double>::infinity();
    for (const auto& r : profile) {
        if (r.status == CurvatureStatus::ok && r.k_max < outcome.curvature_min) {
            outcome.curvature_min = r.k_max;
            outcome.curvature_argmin = r.vertex;
        }
    }

    const HeatOperator p(g);
    const std::array<Condition, 3> conditions = {Condition::b_gradient, Condition::c_poincare,
                                                 Condition::d_reverse_poincare};
    for (std::size_t ci = 0; ci < 3; ++ci) {
        outcome.reports[ci].condition = conditions[ci];
        outcome.reports[ci].t_grid = t_grid;
        outcome.reports[ci].margins.assign(static_cast<std::size_t>(n_samples),
                                           std::vector<double>(t_grid.size(), 0.0));
    }

    std::mt19937_64 rng(seed);
    std::vector<RealFunction> fs;
    fs.reserve(static_cast<std::size_t>(n_samples));
    for (int i = 0; i < n_samples; ++i) fs.push_back(random_function(g.size(), rng));

    // trials run concurrently into per-(sample, t) slots and argmin records;
    // the reduction below walks them in fixed order, so the outcome does not
    // depend on scheduling
    std::vector<std::array<std::vector<int>, 3>> argmins(static_cast<std::size_t>(n_samples));
    for (auto& per_sample : argmins)
        for (auto& per_condition : per_sample)
            per_condition.assign(t_grid.size(), 0);

    auto run_sample = [&](int si) {
        const RealFunction& f = fs[static_cast<std::size_t>(si)];
        const RealFunction gf = gamma(g, f);
        const RealFunction f_sq = f.cwiseProduct(f);
        for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
            const double t = t_grid[ti];
            const RealFunction ptf = p.apply(t, f);
            const RealFunction pt_gf = p.apply(t, gf);
            const RealFunction gamma_ptf = gamma(g, ptf);
            const RealFunction variance = p.apply(t, f_sq) - ptf.cwiseProduct(ptf);

            const std::array<RealFunction, 3> margin_fns = {
                pt_gf - gamma_ptf,
                2.0 * t * pt_gf - variance,
                variance - 2.0 * t * gamma_ptf,
            };
            for (std::size_t ci = 0; ci < 3; ++ci) {
                int argmin = 0;
                const double worst = margin_fns[ci].minCoeff(&argmin);
                outcome.reports[ci].margins[static_cast<std::size_t>(si)][ti] = worst;
                argmins[static_cast<std::size_t>(si)][ci][ti] = argmin;
            }
        }
    };

    int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min(workers, n_samples));
    if (workers == 1) {
        for (int si = 0; si < n_samples; ++si) run_sample(si);
    } else {
        std::atomic<int> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        auto worker = [&] {
            try {
                for (int si = next.fetch_add(1); si < n_samples; si = next.fetch_add(1))
                    run_sample(si);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
        if (failure) std::rethrow_exception(failure);
    }

    for (std::size_t ci = 0; ci < 3; ++ci) {
        auto& report = outcome.reports[ci];
        for (int si = 0; si < n_samples; ++si)
            for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
                const double worst = report.margins[static_cast<std::size_t>(si)][ti];
                if (worst < report.global_worst_margin) {
                    report.global_worst_margin = worst;
                    report.witness_sample = si;
                    report.witness_t = t_grid[ti];
                    report.witness_vertex = argmins[static_cast<std::size_t>(si)][ci][ti];
                    report.witness_f = fs[static_cast<std::size_t>(si)];
                }
            }
    }

    if (outcome.curvature_min < -1e-9 && outcome.curvature_argmin >= 0) {
        const int x = outcome.curvature_argmin;
        const RealFunction& f_star =
            profile[static_cast<std::size_t>(x)].witness;
        ViolationWitness best;
        best.condition = Condition::b_gradient;
        for (double t = 1e-4; t <= 1.0; t *= 2.0) {
            const double margin = check_condition(g, p, f_star, t, Condition::b_gradient)[x];
            if (-margin > best.gap) {
                best.gap = -margin;
                best.t = t;
                best.vertex = x;
                best.f = f_star;
            }
        }
        if (best.gap > 0.0) outcome.violation = best;
    }
    return outcome;
}

/// Central-difference check of d/ds P_s (P_{t-s} f)^2 = 2 P_s Gamma(P_{t-s} f).
/// Returns the max absolute deviation over vertices; O(h^2) in exact math.
inline double interpolation_check(const WeightedGraph& g, const HeatOperator& p,
                                  const RealFunction& f, double t, double s, double h) {
    if (!(0.0 < s && s < t)) throw std::invalid_argument("interpolation_check needs 0 < s < t");
    if (!(0.0 < h && h < std::min(s, t - s)))
        throw std::invalid_argument("interpolation_check needs 0 < h < min(s, t-s)");

    auto phi = [&](double sv) {
        const RealFunction inner = p.apply(t - sv, f);
        return p.apply(sv, inner.cwiseProduct(inner));
    };
    const RealFunction fd = (phi(s + h) - phi(s - h)) / (2.0 * h);
    const RealFunction exact = 2.0 * p.apply(s, gamma(g, p.apply(t - s, f)));
    return (fd - exact).cwiseAbs().maxCoeff();
}

struct GradientDecayCurve {
    std::vector<double> t_grid;
    std::vector<double> sup_gamma;  // sup_x Gamma(P_t f)(x)
    double sup_f_sq = 0.0;          // |f|_inf^2
    double worst_excess = 0.0;      // max over t of 2t sup_gamma - sup_f_sq (1 + 1e-6)
    bool bound_ok = true;           // 2t sup_gamma <= |f|_inf^2 (1 + 1e-6) throughout
};

/// The Liouville mechanism made quantitative: on a CD(0,inf) graph,
/// condition (d) bounds 2t Gamma(P_t f) by the variance term, which never
/// exceeds |f|_inf^2; so sup Gamma(P_t f) decays like 1/(2t).
inline GradientDecayCurve gradient_decay(const WeightedGraph& g, const HeatOperator& p,
                                         const RealFunction& f, const std::vector<double>& t_grid) {
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (!(t_grid[i] > 0.0))
            throw std::invalid_argument("gradient_decay: t grid must be positive");
        if (i > 0 && !(t_grid[i] > t_grid[i - 1]))
            throw std::invalid_argument("gradient_decay: t grid must be increasing");
    }
    GradientDecayCurve curve;
    curve.t_grid = t_grid;
    curve.sup_f_sq = f.size() ? f.cwiseAbs().maxCoeff() * f.cwiseAbs().maxCoeff() : 0.0;
    curve.worst_excess = -std::numeric_limits<double>::infinity();
    for (const double t : t_grid) {
        const double sup = gamma(g, p.apply(t, f)).maxCoeff();
        curve.sup_gamma.push_back(sup);
        const double excess = 2.0 * t * sup - curve.sup_f_sq * (1.0 + 1e-6);
        curve.worst_excess = std::max(curve.worst_excess, excess);
        if (excess > 0.0) curve.bound_ok = false;
    }
    return curve;
}

/// Dirichlet problem: Delta f = 0 off the boundary, f = values on it.
/// The interior system is symmetric diagonally dominant; solved densely,
/// residual checked against 1e-10 (at the scale of the boundary data).
inline RealFunction harmonic_solve(const WeightedGraph& g, const std::vector<int>& boundary,
                                   const std::vector<double>& values) {
    if (boundary.empty()) throw std::invalid_argument("harmonic_solve: boundary is empty");
    if (boundary.size() != values.size())
        throw std::invalid_argument("harmonic_solve: one value per boundary vertex");

    std::vector<int> interior_index(static_cast<std::size_t>(g.size()), -1);
    RealFunction f = RealFunction::Zero(g.size());
    std::vector<char> is_boundary(static_cast<std::size_t>(g.size()), 0);
    for (std::size_t i = 0; i < boundary.size(); ++i) {
        const int v = boundary[i];
        if (v < 0 || v >= g.size())
            throw GraphError(GraphFault::unknown_vertex, "harmonic_solve: boundary vertex out of range");
        if (is_boundary[static_cast<std::size_t>(v)])
            throw std::invalid_argument("harmonic_solve: duplicate boundary vertex");
        is_boundary[static_cast<std::size_t>(v)] = 1;
        f[v] = values[i];
    }

    std::vector<int> interior;
    for (int v = 0; v < g.size(); ++v)
        if (!is_boundary[static_cast<std::size_t>(v)]) {
            interior_index[static_cast<std::size_t>(v)] = static_cast<int>(interior.size());
            interior.push_back(v);
        }
    if (interior.empty()) return f; // nothing to solve

    const int ni = static_cast<int>(interior.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(ni, ni);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(ni);
    for (int i = 0; i < ni; ++i) {
        const int v = interior[static_cast<std::size_t>(i)];
        a(i, i) = g.edge_weight_sum(v);
        for (const auto& e : g.neighbors(v)) {
            const int j = interior_index[static_cast<std::size_t>(e.to)];
            if (j >= 0)
                a(i, j) -= e.mu;
            else
                rhs[i] += e.mu * f[e.to];
        }
    }

    Eigen::LDLT<Eigen::MatrixXd> solver(a);
    if (solver.info() != Eigen::Success)
        throw NumericalError("harmonic_solve: factorization failed");
    const Eigen::VectorXd sol = solver.solve(rhs);
    for (int i = 0; i < ni; ++i) f[interior[static_cast<std::size_t>(i)]] = sol[i];

    double scale = 1.0;
    for (const double v : values) scale = std::max(scale, std::abs(v));
    const RealFunction residual = laplacian(g, f);
    for (const int v : interior)
        if (std::abs(residual[v]) > 1e-10 * scale)
            throw NumericalError("harmonic_solve: residual " + std::to_string(residual[v]) +
                                 " exceeds contract at vertex " + g.label(v));
    return f;
}

// ---------------------------------------------------------------------------
// Intrinsic-metric cutoff sequences
// ---------------------------------------------------------------------------

/// eta_k(x) = min(1, max(0, 2 - rho(x0,x)/k)) where rho is the shortest-path
/// metric with edge lengths sigma(x,y) = min(Deg(x), Deg(y))^{-1/2}. That
/// sigma is intrinsic ((1/m(x)) sum_y mu_xy sigma^2 <= 1), which gives
/// Gamma(eta_k) <= 1/(2k^2) <= 1/k. eta_k increases to the constant 1;
/// the saturation index k0 is the first k with eta_k identically 1.
struct CutoffSequence {
    int base_vertex = 0;
    std::vector<double> rho;           // intrinsic distance from the base vertex
    double intrinsic_metric_max = 0.0; // max_x (1/m(x)) sum mu sigma^2
    int k0 = 1;
    std::vector<RealFunction> eta;     // eta_1 .. eta_{k_max}
    std::vector<double> max_gamma;     // max_x Gamma(eta_k)(x)
};

inline CutoffSequence build_cutoffs(const WeightedGraph& g, int base_vertex, int k_max) {
    if (k_max < 1) throw std::invalid_argument("build_cutoffs: k_max >= 1");
    if (base_vertex < 0 || base_vertex >= g.size())
        throw GraphError(GraphFault::unknown_vertex, "build_cutoffs: base vertex out of range");

    auto sigma = [&](int x, int y) {
        return 1.0 / std::sqrt(std::max(g.weighted_degree(x), g.weighted_degree(y)));
    };

    CutoffSequence seq;
    seq.base_vertex = base_vertex;
    seq.rho.assign(static_cast<std::size_t>(g.size()), std::numeric_limits<double>::infinity());
    using Entry = std::pair<double, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
    seq.rho[static_cast<std::size_t>(base_vertex)] = 0.0;
    queue.push({0.0, base_vertex});
    while (!queue.empty()) {
        const auto [dist, x] = queue.top();
        queue.pop();
        if (dist > seq.rho[static_cast<std::size_t>(x)]) continue;
        for (const auto& e : g.neighbors(x)) {
            const double candidate = dist + sigma(x, e.to);
            if (candidate < seq.rho[static_cast<std::size_t>(e.to)]) {
                seq.rho[static_cast<std::size_t>(e.to)] = candidate;
                queue.push({candidate, e.to});
            }
        }
    }

    seq.intrinsic_metric_max = 0.0;
    for (int x = 0; x < g.size(); ++x) {
        double acc = 0.0;
        for (const auto& e : g.neighbors(x)) {
            const double s = sigma(x, e.to);
            acc += e.mu * s * s;
        }
        seq.intrinsic_metric_max = std::max(seq.intrinsic_metric_max, acc / g.measure(x));
    }

    const double rho_max = *std::max_element(seq.rho.begin(), seq.rho.end());
    seq.k0 = 1;
    // same floating-point comparison path as the eta evaluation below
    while (!(2.0 - rho_max / static_cast<double>(seq.k0) >= 1.0)) ++seq.k0;

    for (int k = 1; k <= k_max; ++k) {
        RealFunction eta(g.size());
        for (int x = 0; x < g.size(); ++x)
            eta[x] = std::min(1.0, std::max(0.0, 2.0 - seq.rho[static_cast<std::size_t>(x)] /
                                                           static_cast<double>(k)));
        seq.max_gamma.push_back(gamma(g, eta).maxCoeff());
        seq.eta.push_back(std::move(eta));
    }
    return seq;
}

/// Two-column plot data (t value), 17 significant digits.
inline void write_plot_data(const std::string& path, const std::vector<double>& t,
                            const std::vector<double>& value) {
    if (t.size() != value.size())
        throw std::invalid_argument("write_plot_data: column length mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    char line[80];
    for (std::size_t i = 0; i < t.size(); ++i) {
        std::snprintf(line, sizeof line, "%.17g %.17g\n", t[i], value[i]);
        out << line;
    }
}

} // namespace gcurv
