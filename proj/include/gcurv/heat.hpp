#pragma once

// Heat semigroup P_t = e^{t Delta} on a finite weighted graph, realized
// through one spectral decomposition of the m-symmetrized generator
//
//   S = M^{1/2} Delta M^{-1/2},   S_xy = mu_xy / sqrt(m(x) m(y)),
//                                 S_xx = -Deg(x),
//
// so that P_t f = M^{-1/2} U e^{t Lambda} U^T M^{1/2} f. One factorization
// serves every t, which is what the verification sweeps need. Dense
// eigendecomposition caps practical graph size around N = 2000.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "gcurv/gamma.hpp"
#include "gcurv/graph.hpp"
#include "gcurv/random.hpp"

namespace gcurv {

class HeatOperator {
public:
    /// Diagonalizes the symmetrized generator. Throws NumericalError when
    /// the eigensolver does not converge or the spectrum violates the
    /// generator contract (nonpositive, simple eigenvalue 0 spanned by
    /// M^{1/2} 1 on a connected graph).
    explicit HeatOperator(const WeightedGraph& g) : graph_(&g) {
        const int n = g.size();
        sqrt_m_.resize(n);
        inv_sqrt_m_.resize(n);
        for (int x = 0; x < n; ++x) {
            sqrt_m_[x] = std::sqrt(g.measure(x));
            inv_sqrt_m_[x] = 1.0 / sqrt_m_[x];
        }

        Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
        for (int x = 0; x < n; ++x) {
            s(x, x) = -g.weighted_degree(x);
            for (const auto& e : g.neighbors(x))
                s(x, e.to) = e.mu * inv_sqrt_m_[x] * inv_sqrt_m_[e.to];
        }

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s);
        if (solver.info() != Eigen::Success)
            throw NumericalError("heat generator eigendecomposition did not converge");
        eigenvalues_ = solver.eigenvalues(); // ascending
        basis_ = solver.eigenvectors();

        if (eigenvalues_[n - 1] > 1e-10)
            throw NumericalError("generator has a positive eigenvalue " +
                                 std::to_string(eigenvalues_[n - 1]));
        if (n > 1 && eigenvalues_[n - 2] > -1e-10)
            throw NumericalError("generator kernel is not simple (spectral gap below 1e-10)");
        Eigen::VectorXd kernel = sqrt_m_.matrix();
        kernel.normalize();
        if (std::abs(std::abs(kernel.dot(basis_.col(n - 1))) - 1.0) > 1e-8)
            throw NumericalError("generator kernel is not spanned by M^{1/2} 1");
    }

    const WeightedGraph& graph() const { return *graph_; }
    const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }

    /// P_t f. Rejects t < 0.
    RealFunction apply(double t, const RealFunction& f) const {
        if (!(t >= 0.0))
            throw std::invalid_argument("heat semigroup needs t >= 0, got " + std::to_string(t));
        detail::require_bound(*graph_, f, "HeatOperator::apply");
        Eigen::VectorXd coeff = basis_.transpose() * (f.array() * sqrt_m_).matrix();
        coeff.array() *= (t * eigenvalues_.array()).exp();
        const Eigen::VectorXd back = basis_ * coeff;
        return (back.array() * inv_sqrt_m_).matrix();
    }

private:
    const WeightedGraph* graph_;
    Eigen::ArrayXd sqrt_m_;
    Eigen::ArrayXd inv_sqrt_m_;
    Eigen::VectorXd eigenvalues_;
    Eigen::MatrixXd basis_;
};

/// Worst deviations from the semigroup contract over seeded random trials.
/// Deviations are relative, guarded at unit scale:
/// dev(a,b) = |a-b|_inf / max(1, |a|_inf, |b|_inf).
struct SemigroupLawReport {
    double composition = 0.0;     // P_{t+s} f vs P_t P_s f
    double self_adjointness = 0.0; // <P_t f, g>_m vs <f, P_t g>_m
    double commutation = 0.0;     // Delta P_t f vs P_t Delta f
    double contraction_p1 = 0.0;  // max(0, |P_t f|_p - |f|_p), p = 1
    double contraction_p2 = 0.0;  //                            p = 2
    double contraction_pinf = 0.0; //                           p = inf
    double positivity_min = 0.0;  // min_x P_t f (x) over trials with f >= 0
    std::uint64_t seed = 0;

    double worst_deviation() const {
        return std::max({composition, self_adjointness, commutation, contraction_p1,
                         contraction_p2, contraction_pinf, std::max(0.0, -positivity_min)});
    }
};

namespace detail {

inline double rel_dev(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const double scale = std::max({1.0, a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()});
    return (a - b).cwiseAbs().maxCoeff() / scale;
}

} // namespace detail

inline SemigroupLawReport semigroup_laws(const HeatOperator& p, double t, double s, int trials,
                                         std::uint64_t seed) {
    if (!(t >= 0.0) || !(s >= 0.0))
        throw std::invalid_argument("semigroup_laws needs t, s >= 0");
    const WeightedGraph& g = p.graph();
    SemigroupLawReport report;
    report.seed = seed;
    report.positivity_min = std::numeric_limits<double>::infinity();
    std::mt19937_64 rng(seed);
    const double inf = std::numeric_limits<double>::infinity();

    for (int trial = 0; trial < trials; ++trial) {
        const RealFunction f = random_function(g.size(), rng);
        const RealFunction h = random_function(g.size(), rng);

        report.composition =
            std::max(report.composition, detail::rel_dev(p.apply(t + s, f), p.apply(t, p.apply(s, f))));
        report.self_adjointness = std::max(
            report.self_adjointness,
            std::abs(inner_product_m(g, p.apply(t, f), h) - inner_product_m(g, f, p.apply(t, h))) /
                std::max(1.0, std::abs(inner_product_m(g, f, h))));
        report.commutation = std::max(
            report.commutation, detail::rel_dev(laplacian(g, p.apply(t, f)), p.apply(t, laplacian(g, f))));

        const RealFunction ptf = p.apply(t, f);
        report.contraction_p1 =
            std::max(report.contraction_p1, norm_p(g, ptf, 1.0) - norm_p(g, f, 1.0));
        report.contraction_p2 =
            std::max(report.contraction_p2, norm_p(g, ptf, 2.0) - norm_p(g, f, 2.0));
        report.contraction_pinf =
            std::max(report.contraction_pinf, norm_p(g, ptf, inf) - norm_p(g, f, inf));

        const RealFunction nonneg = f.array() + 1.0; // entries in [0, 2)
        report.positivity_min =
            std::min(report.positivity_min, p.apply(t, nonneg).minCoeff());
    }
    return report;
}

} // namespace gcurv
