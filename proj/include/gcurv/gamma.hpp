#pragma once

// The discrete operators on a weighted graph:
//
//   Delta f(x)   = (1/m(x)) sum_{y~x} mu_xy (f(y) - f(x))
//   Gamma(f,g)   = (1/2)(Delta(fg) - f Delta g - g Delta f)
//                = (1/(2 m(x))) sum_{y~x} mu_xy (f(y)-f(x))(g(y)-g(x))
//   Gamma2(f)    = (1/2) Delta Gamma(f) - Gamma(f, Delta f)
//   Q(f,g)       = (1/2) sum_{x~y} mu_xy (f(y)-f(x))(g(y)-g(x))
//
// plus the same operators re-expressed as dense quadratic/linear forms over
// ball coordinates (LocalForm), which is what the CD(K,n) eigenproblems
// consume. Global operators traverse the adjacency lists and never build an
// N x N matrix.

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "gcurv/graph.hpp"

namespace gcurv {

using RealFunction = Eigen::VectorXd;

namespace detail {

inline void require_bound(const WeightedGraph& g, const RealFunction& f, const char* name) {
    if (f.size() != g.size())
        throw std::invalid_argument(std::string(name) + ": function length " +
                                    std::to_string(f.size()) + " does not match |V| = " +
                                    std::to_string(g.size()));
}

} // namespace detail

inline RealFunction laplacian(const WeightedGraph& g, const RealFunction& f) {
    detail::require_bound(g, f, "laplacian");
    RealFunction out(g.size());
    for (int x = 0; x < g.size(); ++x) {
        double acc = 0.0;
        for (const auto& e : g.neighbors(x)) acc += e.mu * (f[e.to] - f[x]);
        out[x] = acc / g.measure(x);
    }
    return out;
}

/// Carre du champ via the explicit difference formula (the canonical route;
/// it avoids the cancellation the product expansion is exposed to).
inline RealFunction gamma(const WeightedGraph& g, const RealFunction& f, const RealFunction& h) {
    detail::require_bound(g, f, "gamma");
    detail::require_bound(g, h, "gamma");
    RealFunction out(g.size());
    for (int x = 0; x < g.size(); ++x) {
        double acc = 0.0;
        for (const auto& e : g.neighbors(x))
            acc += e.mu * (f[e.to] - f[x]) * (h[e.to] - h[x]);
        out[x] = acc / (2.0 * g.measure(x));
    }
    return out;
}

inline RealFunction gamma(const WeightedGraph& g, const RealFunction& f) {
    return gamma(g, f, f);
}

/// Same operator through its defining product expansion
/// (1/2)(Delta(fh) - f Delta h - h Delta f). Kept for cross-checking the
/// difference formula; prefer gamma() in computations.
inline RealFunction gamma_defining(const WeightedGraph& g, const RealFunction& f,
                                   const RealFunction& h) {
    detail::require_bound(g, f, "gamma_defining");
    detail::require_bound(g, h, "gamma_defining");
    const RealFunction product = f.cwiseProduct(h);
    const RealFunction term = laplacian(g, product) - f.cwiseProduct(laplacian(g, h)) -
                              h.cwiseProduct(laplacian(g, f));
    return 0.5 * term;
}

/// Iterated operator Gamma2(f) = (1/2) Delta Gamma(f) - Gamma(f, Delta f).
inline RealFunction gamma2(const WeightedGraph& g, const RealFunction& f) {
    detail::require_bound(g, f, "gamma2");
    const RealFunction gf = gamma(g, f);
    const RealFunction df = laplacian(g, f);
    return 0.5 * laplacian(g, gf) - gamma(g, f, df);
}

/// Dirichlet form Q(f,h) = sum over edges of mu_xy (f(y)-f(x))(h(y)-h(x)).
/// (The 1/2 in the ordered-pair definition cancels against counting each
/// edge twice.)
inline double dirichlet_form(const WeightedGraph& g, const RealFunction& f,
                             const RealFunction& h) {
    detail::require_bound(g, f, "dirichlet_form");
    detail::require_bound(g, h, "dirichlet_form");
    double acc = 0.0;
    for (const Edge& e : g.edges())
        acc += e.mu * (f[e.v] - f[e.u]) * (h[e.v] - h[e.u]);
    return acc;
}

/// l^p(V,m) norm; p = infinity gives max |f|.
inline double norm_p(const WeightedGraph& g, const RealFunction& f, double p) {
    detail::require_bound(g, f, "norm_p");
    if (std::isinf(p)) return f.cwiseAbs().maxCoeff();
    if (!(p >= 1.0))
        throw std::invalid_argument("norm_p: p must satisfy p >= 1 or p = inf");
    double acc = 0.0;
    for (int x = 0; x < g.size(); ++x) acc += g.measure(x) * std::pow(std::abs(f[x]), p);
    return std::pow(acc, 1.0 / p);
}

inline double inner_product_m(const WeightedGraph& g, const RealFunction& f,
                              const RealFunction& h) {
    detail::require_bound(g, f, "inner_product_m");
    detail::require_bound(g, h, "inner_product_m");
    double acc = 0.0;
    for (int x = 0; x < g.size(); ++x) acc += g.measure(x) * f[x] * h[x];
    return acc;
}

// ---------------------------------------------------------------------------
// Local forms over ball coordinates
// ---------------------------------------------------------------------------

/// The operators at a single vertex as dense forms. In the coordinates of
/// support.members (center first, S1, then S2):
///
///   f^T gamma_matrix f  = Gamma(f)(center)     over B1 coordinates
///   delta_row . f       = Delta f(center)      over B1 coordinates
///   f^T gamma2_matrix f = Gamma2(f)(center)    over B2 coordinates
///
/// Both form matrices annihilate the constant vector, and gamma_matrix is
/// PSD by construction.
struct LocalForm {
    int center = 0;
    Ball support;                 // radius 2
    std::size_t b1_size = 0;      // 1 + |S1|; B1 coordinates are members[0..b1_size)
    Eigen::MatrixXd gamma_matrix; // b1 x b1
    Eigen::VectorXd delta_row;    // b1
    Eigen::MatrixXd gamma2_matrix; // b2 x b2
};

inline LocalForm local_form(const WeightedGraph& g, int x) {
    LocalForm lf;
    lf.center = x;
    lf.support = ball(g, x, 2);
    lf.b1_size = lf.support.sphere_start[2];
    const int b1 = static_cast<int>(lf.b1_size);
    const int b2 = static_cast<int>(lf.support.members.size());

    std::unordered_map<int, int> pos;
    pos.reserve(lf.support.members.size());
    for (int i = 0; i < b2; ++i) pos.emplace(lf.support.members[i], i);

    // Gamma at the center: sum over neighbors of (mu/(2m)) (e_y - e_x)^2.
    lf.gamma_matrix = Eigen::MatrixXd::Zero(b1, b1);
    lf.delta_row = Eigen::VectorXd::Zero(b1);
    const double inv_m = 1.0 / g.measure(x);
    for (const auto& e : g.neighbors(x)) {
        const int j = pos.at(e.to);
        const double w = 0.5 * e.mu * inv_m;
        lf.gamma_matrix(0, 0) += w;
        lf.gamma_matrix(j, j) += w;
        lf.gamma_matrix(0, j) -= w;
        lf.gamma_matrix(j, 0) -= w;
        lf.delta_row[j] = e.mu * inv_m;
        lf.delta_row[0] -= e.mu * inv_m;
    }

    // Delta row of any vertex v in B1, in B2 coordinates.
    auto delta_row_at = [&](int v) {
        Eigen::VectorXd row = Eigen::VectorXd::Zero(b2);
        const double inv_mv = 1.0 / g.measure(v);
        const int pv = pos.at(v);
        for (const auto& e : g.neighbors(v)) {
            row[pos.at(e.to)] += e.mu * inv_mv;
            row[pv] -= e.mu * inv_mv;
        }
        return row;
    };
    // Adds c * (Gamma form at v) into M, in B2 coordinates.
    auto add_gamma_form = [&](Eigen::MatrixXd& M, int v, double c) {
        const double inv_mv = 1.0 / g.measure(v);
        const int pv = pos.at(v);
        for (const auto& e : g.neighbors(v)) {
            const int pw = pos.at(e.to);
            const double w = c * 0.5 * e.mu * inv_mv;
            M(pv, pv) += w;
            M(pw, pw) += w;
            M(pv, pw) -= w;
            M(pw, pv) -= w;
        }
    };

    // Gamma2 expanded over B2(x):
    //   Gamma2(f)(x) = (1/(2m(x))) sum_{y~x} mu_xy [ Gamma_y(f) - Gamma_x(f)
    //                    - f^T sym((e_y - e_x)(d_y - d_x)^T) f ]
    // where d_v is the Delta row at v.
    lf.gamma2_matrix = Eigen::MatrixXd::Zero(b2, b2);
    const Eigen::VectorXd d_center = delta_row_at(x);
    for (const auto& e : g.neighbors(x)) {
        const double c = 0.5 * e.mu * inv_m;
        add_gamma_form(lf.gamma2_matrix, e.to, c);
        add_gamma_form(lf.gamma2_matrix, x, -c);
        const Eigen::VectorXd dd = delta_row_at(e.to) - d_center;
        Eigen::VectorXd step = Eigen::VectorXd::Zero(b2);
        step[pos.at(e.to)] = 1.0;
        step[0] = -1.0;
        const double half_c = 0.5 * c;
        lf.gamma2_matrix.noalias() -= half_c * (step * dd.transpose());
        lf.gamma2_matrix.noalias() -= half_c * (dd * step.transpose());
    }
    return lf;
}

} // namespace gcurv
