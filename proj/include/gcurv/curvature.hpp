#pragma once

// CD(K,n) verification and maximal Bakry-Emery curvature.
//
// The condition at a vertex x,
//
//   Gamma2(f)(x) >= (1/n)(Delta f)^2(x) + K Gamma(f)(x)   for all f,
//
// only involves f on B2(x), so it is the PSD-ness of a dense form there.
// The largest admissible K,
//
//   K_max(x,n) = min { (Gamma2(f)(x) - (1/n)(Delta f(x))^2) / Gamma(f)(x) :
//                      Gamma(f)(x) != 0 },
//
// is computed by gauge-fixing f(x) = 0 (constant invariance makes this
// lossless), eliminating the Gamma-null directions supported on S2(x) by a
// Schur complement, and solving a symmetric eigenproblem on the S1(x)
// coordinates. curvature_oracle cross-checks the same quantity along an
// entirely different route: random sampling plus Rayleigh-quotient descent
// on forms polarized out of the global operators.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <mutex>
#include <optional>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "gcurv/gamma.hpp"
#include "gcurv/graph.hpp"
#include "gcurv/random.hpp"

namespace gcurv {

/// Dimension parameter n in (0, inf]. Infinity is represented exactly: the
/// (1/n) term is dropped, never approximated by a large number.
inline double inverse_dimension(double n) {
    if (std::isinf(n) && n > 0.0) return 0.0;
    if (!(n > 0.0)) throw std::invalid_argument("dimension n must be positive or inf");
    return 1.0 / n;
}

struct CdCheckResult {
    bool holds = false;
    double min_eig = 0.0;
    std::optional<RealFunction> witness; // violating direction when holds is false
};

/// Checks CD(K,n) at x: assembles Gamma2 - (1/n) d d^T - K Gamma over B2(x)
/// coordinates and tests its smallest eigenvalue against -tol.
inline CdCheckResult cd_check(const WeightedGraph& g, int x, double K, double n, double tol) {
    if (!(tol >= 0.0)) throw std::invalid_argument("cd_check: tol must be >= 0");
    const double inv_n = inverse_dimension(n);
    const LocalForm lf = local_form(g, x);
    const int b2 = static_cast<int>(lf.gamma2_matrix.rows());
    const int b1 = static_cast<int>(lf.b1_size);

    Eigen::MatrixXd form = lf.gamma2_matrix;
    if (inv_n != 0.0) {
        Eigen::VectorXd d = Eigen::VectorXd::Zero(b2);
        d.head(b1) = lf.delta_row;
        form.noalias() -= inv_n * (d * d.transpose());
    }
    form.topLeftCorner(b1, b1) -= K * lf.gamma_matrix;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(form);
    if (solver.info() != Eigen::Success)
        throw NumericalError("cd_check eigensolve failed at vertex " + g.label(x));

    CdCheckResult result;
    result.min_eig = solver.eigenvalues()[0];
    result.holds = result.min_eig >= -tol;
    if (!result.holds) {
        RealFunction w = RealFunction::Zero(g.size());
        for (int i = 0; i < b2; ++i)
            w[lf.support.members[static_cast<std::size_t>(i)]] = solver.eigenvectors()(i, 0);
        result.witness = std::move(w);
    }
    return result;
}

enum class CurvatureStatus { ok, undefined_isolated };

struct CurvatureResult {
    int vertex = 0;
    double dim = 0.0;
    CurvatureStatus status = CurvatureStatus::ok;
    double k_max = 0.0;                  // meaningful iff status == ok
    RealFunction witness;                // Gamma(witness)(vertex) = 1, supported on B2
    std::vector<double> pencil_spectrum; // reduced-pencil eigenvalues, ascending
};

/// Maximal K with CD(K,n) at x, plus a minimizing witness.
inline CurvatureResult curvature_at(const WeightedGraph& g, int x, double n) {
    const double inv_n = inverse_dimension(n);
    CurvatureResult result;
    result.vertex = x;
    result.dim = n;
    if (g.neighbors(x).empty()) { // only possible on the one-vertex graph
        result.status = CurvatureStatus::undefined_isolated;
        return result;
    }

    const LocalForm lf = local_form(g, x);
    const int b2 = static_cast<int>(lf.gamma2_matrix.rows());
    const int d1 = static_cast<int>(lf.b1_size) - 1; // |S1|
    const int d2 = b2 - d1 - 1;                      // |S2|

    // Gauge f(x) = 0: drop the center coordinate.
    Eigen::MatrixXd a = lf.gamma2_matrix.bottomRightCorner(d1 + d2, d1 + d2);
    if (inv_n != 0.0) {
        Eigen::VectorXd d = Eigen::VectorXd::Zero(d1 + d2);
        d.head(d1) = lf.delta_row.tail(d1);
        a.noalias() -= inv_n * (d * d.transpose());
    }

    // Gamma restricted to the gauge-fixed space is diagonal: mu_xy/(2 m(x))
    // on S1, zero on S2. Its null space are the functions supported on S2,
    // where the form reduces to the S2 block of Gamma2 -- diagonal with
    // entries (1/(2m(x))) sum_y mu_xy mu_yz / (2 m(y)) > 0.
    const Eigen::VectorXd gamma_diag = lf.gamma_matrix.diagonal().tail(d1);

    Eigen::MatrixXd reduced;
    Eigen::VectorXd s2_scale; // A22 diagonal, kept for the witness back-substitution
    if (d2 > 0) {
        s2_scale = a.bottomRightCorner(d2, d2).diagonal();
        if (s2_scale.minCoeff() <= 0.0)
            throw NumericalError("curvature form lost positivity on the Gamma null space at vertex " +
                                 g.label(x));
        const Eigen::MatrixXd a12 = a.topRightCorner(d1, d2);
        reduced = a.topLeftCorner(d1, d1);
        reduced.noalias() -= a12 * s2_scale.cwiseInverse().asDiagonal() * a12.transpose();
    } else {
        reduced = a;
    }

    const Eigen::VectorXd inv_sqrt_gamma = gamma_diag.cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd pencil =
        inv_sqrt_gamma.asDiagonal() * reduced * inv_sqrt_gamma.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(pencil);
    if (solver.info() != Eigen::Success)
        throw NumericalError("curvature eigensolve failed at vertex " + g.label(x));

    result.k_max = solver.eigenvalues()[0];
    result.pencil_spectrum.assign(solver.eigenvalues().data(),
                                  solver.eigenvalues().data() + solver.eigenvalues().size());

    // Back-substitute the unit eigenvector: S1 values D^{-1/2} u give
    // Gamma(witness)(x) = u^T u = 1; S2 values minimize the form for that
    // S1 restriction.
    const Eigen::VectorXd u = solver.eigenvectors().col(0);
    const Eigen::VectorXd s1_values = inv_sqrt_gamma.cwiseProduct(u);
    result.witness = RealFunction::Zero(g.size());
    for (int j = 0; j < d1; ++j)
        result.witness[lf.support.members[static_cast<std::size_t>(j) + 1]] = s1_values[j];
    if (d2 > 0) {
        const Eigen::VectorXd s2_values =
            -(a.topRightCorner(d1, d2).transpose() * s1_values).cwiseQuotient(s2_scale);
        for (int j = 0; j < d2; ++j)
            result.witness[lf.support.members[static_cast<std::size_t>(d1 + 1 + j)]] = s2_values[j];
    }
    return result;
}

/// curvature_at for every vertex, evaluated concurrently; results are placed
/// in vertex order, so the output is deterministic.
inline std::vector<CurvatureResult> curvature_profile(const WeightedGraph& g, double n,
                                                      int threads = 0) {
    const int nv = g.size();
    std::vector<CurvatureResult> results(static_cast<std::size_t>(nv));
    int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min(workers, nv));

    if (workers == 1) {
        for (int v = 0; v < nv; ++v) results[static_cast<std::size_t>(v)] = curvature_at(g, v, n);
        return results;
    }

    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        try {
            for (int v = next.fetch_add(1); v < nv; v = next.fetch_add(1))
                results[static_cast<std::size_t>(v)] = curvature_at(g, v, n);
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
    return results;
}

inline double min_curvature(const std::vector<CurvatureResult>& profile) {
    double k = std::numeric_limits<double>::infinity();
    for (const auto& r : profile)
        if (r.status == CurvatureStatus::ok) k = std::min(k, r.k_max);
    return k;
}

// ---------------------------------------------------------------------------
// Sampling oracle
// ---------------------------------------------------------------------------

namespace detail {

// Minimizes r(t) = a(t)/b(t) along f + t*dir where a, b are the quadratic
// forms; the stationarity condition is a quadratic in t.
struct LineSearchResult {
    double t = 0.0;
    bool moved = false;
};

inline LineSearchResult ratio_line_search(double a0, double a1, double a2, double b0, double b1,
                                          double b2, double current) {
    const double c2 = a2 * b1 - a1 * b2;
    const double c1 = a2 * b0 - a0 * b2;
    const double c0 = a1 * b0 - a0 * b1;

    double roots[2];
    int root_count = 0;
    if (std::abs(c2) > 1e-300) {
        const double disc = c1 * c1 - 4.0 * c2 * c0;
        if (disc >= 0.0) {
            const double sq = std::sqrt(disc);
            // Citardauq pairing for the better-conditioned root
            const double q = -0.5 * (c1 + (c1 >= 0.0 ? sq : -sq));
            roots[root_count++] = q / c2;
            if (std::abs(q) > 1e-300) roots[root_count++] = c0 / q;
        }
    } else if (std::abs(c1) > 1e-300) {
        roots[root_count++] = -c0 / c1;
    }

    LineSearchResult best;
    double best_value = current;
    for (int i = 0; i < root_count; ++i) {
        const double t = roots[i];
        if (!std::isfinite(t)) continue;
        const double bt = b0 + t * (2.0 * b1 + t * b2);
        if (bt <= 1e-14 * std::max(1.0, b0)) continue; // stay away from the Gamma null cone
        const double at = a0 + t * (2.0 * a1 + t * a2);
        const double value = at / bt;
        if (value < best_value) {
            best_value = value;
            best.t = t;
            best.moved = true;
        }
    }
    return best;
}

} // namespace detail

/// Upper bound on K_max(x,n) from `samples` random functions on B2(x)
/// (gauge f(x) = 0), each refined by nonlinear-CG descent on the ratio
/// (f^T A f)/(f^T B f). The forms A and B are polarized out of the *global*
/// operators, so this path shares no code with the local-form assembly or
/// the Schur/eigen reduction it cross-checks.
inline double curvature_oracle(const WeightedGraph& g, int x, double n, int samples,
                               std::uint64_t seed) {
    if (samples < 1) throw std::invalid_argument("curvature_oracle: samples must be >= 1");
    if (g.neighbors(x).empty())
        throw std::invalid_argument("curvature_oracle: vertex has no neighbors");
    const double inv_n = inverse_dimension(n);

    const Ball b2 = ball(g, x, 2);
    const int dim = static_cast<int>(b2.members.size()) - 1; // gauge-fixed coordinates

    // Quadratic-form values through the global operators only.
    RealFunction lifted = RealFunction::Zero(g.size());
    auto q_pair = [&](auto&& fill) {
        lifted.setZero();
        fill(lifted);
        const double dfx = laplacian(g, lifted)[x];
        const double qa = gamma2(g, lifted)[x] - inv_n * dfx * dfx;
        const double qb = gamma(g, lifted)[x];
        return std::pair<double, double>(qa, qb);
    };
    auto member = [&](int i) { return b2.members[static_cast<std::size_t>(i) + 1]; };

    Eigen::MatrixXd a(dim, dim), b(dim, dim);
    Eigen::VectorXd qa_diag(dim), qb_diag(dim);
    for (int i = 0; i < dim; ++i) {
        const auto [qa, qb] = q_pair([&](RealFunction& f) { f[member(i)] = 1.0; });
        qa_diag[i] = qa;
        qb_diag[i] = qb;
        a(i, i) = qa;
        b(i, i) = qb;
    }
    for (int i = 0; i < dim; ++i)
        for (int j = i + 1; j < dim; ++j) {
            const auto [qa, qb] = q_pair([&](RealFunction& f) {
                f[member(i)] = 1.0;
                f[member(j)] = 1.0;
            });
            a(i, j) = a(j, i) = 0.5 * (qa - qa_diag[i] - qa_diag[j]);
            b(i, j) = b(j, i) = 0.5 * (qb - qb_diag[i] - qb_diag[j]);
        }

    std::mt19937_64 rng(seed);
    double best = std::numeric_limits<double>::infinity();
    Eigen::VectorXd f(dim), af(dim), bf(dim), grad(dim), prev_grad(dim), dir(dim), ad(dim), bd(dim);

    for (int sample = 0; sample < samples; ++sample) {
        for (int i = 0; i < dim; ++i) f[i] = uniform_pm1(rng);
        af.noalias() = a * f;
        bf.noalias() = b * f;
        double fa = f.dot(af);
        double fb = f.dot(bf);
        if (fb <= 1e-14) continue; // vanishing Gamma; resample
        double ratio = fa / fb;

        dir.setZero();
        double prev_grad_sq = 0.0;
        int stalled = 0;
        for (int iter = 0; iter < 300; ++iter) {
            grad = (2.0 / fb) * (af - ratio * bf);
            const double grad_sq = grad.squaredNorm();
            if (grad_sq <= 1e-28 * std::max(1.0, ratio * ratio)) break;

            double beta = 0.0;
            if (iter > 0 && prev_grad_sq > 0.0)
                beta = std::max(0.0, grad.dot(grad - prev_grad) / prev_grad_sq);
            dir = -grad + beta * dir;
            prev_grad = grad;
            prev_grad_sq = grad_sq;

            ad.noalias() = a * dir;
            bd.noalias() = b * dir;
            const auto step = detail::ratio_line_search(fa, f.dot(ad), dir.dot(ad), fb, f.dot(bd),
                                                        dir.dot(bd), ratio);
            if (!step.moved) break;
            f += step.t * dir;
            af += step.t * ad;
            bf += step.t * bd;
            fa = f.dot(af);
            fb = f.dot(bf);
            const double next_ratio = fa / fb;
            if (std::abs(ratio - next_ratio) <= 1e-15 * std::max(1.0, std::abs(next_ratio))) {
                if (++stalled >= 3) {
                    ratio = next_ratio;
                    break;
                }
            } else {
                stalled = 0;
            }
            ratio = next_ratio;

            // keep the iterate at unit Gamma scale
            if (fb < 1e-8 || fb > 1e8) {
                const double scale = 1.0 / std::sqrt(fb);
                f *= scale;
                af *= scale;
                bf *= scale;
                fa = f.dot(af);
                fb = f.dot(bf);
            }
        }
        best = std::min(best, ratio);
    }
    return best;
}

} // namespace gcurv
