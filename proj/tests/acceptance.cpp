// Acceptance suite: one pass/fail line per criterion.
//
// The library has no external reference tables to compare against; the
// anchors are closed-form micro-cases (the two-vertex graph), the
// independent sampling oracle for curvature, and the inequality margins
// themselves. Every tolerance is pinned here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "gcurv/curvature.hpp"
#include "gcurv/gamma.hpp"
#include "gcurv/graph.hpp"
#include "gcurv/heat.hpp"
#include "gcurv/random.hpp"
#include "gcurv/verify.hpp"

using namespace gcurv;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct CorpusEntry {
    const char* spec;
    WeightMode mode;
};

// every generator family at <= 50 vertices, physical and normalized
const std::vector<CorpusEntry>& corpus() {
    static const std::vector<CorpusEntry> entries = [] {
        std::vector<CorpusEntry> v;
        for (const char* spec : {"path:10", "cycle:12", "torus:2:5", "hypercube:4", "complete:8",
                                 "star:9", "regular_tree:3:3"})
            for (const WeightMode mode : {WeightMode::physical, WeightMode::normalized})
                v.push_back({spec, mode});
        return v;
    }();
    return entries;
}

std::vector<int> representative_vertices(const WeightedGraph& g) {
    std::vector<int> vs = {0, g.size() / 2, g.size() - 1};
    std::sort(vs.begin(), vs.end());
    vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
    return vs;
}

int failures = 0;

void criterion(int id, const std::string& name,
               const std::function<bool(std::string&)>& body) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] criterion %2d: %s%s%s [%.2f s]\n", ok ? "PASS" : "FAIL", id, name.c_str(),
                detail.empty() ? "" : " -- ", detail.c_str(), seconds);
    std::fflush(stdout);
    if (!ok) ++failures;
}

} // namespace

int main() {
    // 1. closed-form curvature on the two-vertex graph
    criterion(1, "closed-form curvature K2: K(inf)=2, K(n)=2-2/n", [](std::string& detail) {
        const auto start = std::chrono::steady_clock::now();
        const WeightedGraph k2 = generate("complete:2", WeightMode::physical);
        double worst = 0.0;
        worst = std::max(worst, std::abs(curvature_at(k2, 0, kInf).k_max - 2.0));
        for (const double n : {1.0, 2.0, 5.0, 100.0})
            worst = std::max(worst, std::abs(curvature_at(k2, 0, n).k_max - (2.0 - 2.0 / n)));
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        detail = "max deviation " + std::to_string(worst);
        return worst <= 1e-9 && seconds < 1.0;
    });

    // 2. oracle agreement across the corpus
    criterion(2, "oracle agreement, 1e4 samples with descent, |eig - oracle| <= 1e-6",
              [](std::string& detail) {
        const auto start = std::chrono::steady_clock::now();
        double worst = 0.0;
        bool lower_bound_ok = true;
        std::uint64_t seed = 1000;
        for (const auto& entry : corpus()) {
            const WeightedGraph g = generate(entry.spec, entry.mode);
            for (const double n : {2.0, kInf}) {
                const auto profile = curvature_profile(g, n);
                for (const int x : representative_vertices(g)) {
                    const double eig = profile[static_cast<std::size_t>(x)].k_max;
                    const double oracle = curvature_oracle(g, x, n, 10000, seed++);
                    worst = std::max(worst, std::abs(eig - oracle));
                    lower_bound_ok = lower_bound_ok && (oracle >= eig - 1e-8);
                }
            }
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        char buf[120];
        std::snprintf(buf, sizeof buf, "max |eig - oracle| %.2e, oracle >= eig - 1e-8: %s, %.1f s",
                      worst, lower_bound_ok ? "yes" : "NO", seconds);
        detail = buf;
        return worst <= 1e-6 && lower_bound_ok && seconds < 120.0;
    });

    // 3. threshold sharpness at every corpus vertex
    criterion(3, "cd_check sharp at K_max +/- 1e-6 for every corpus vertex",
              [](std::string& detail) {
        int checked = 0;
        for (const auto& entry : corpus()) {
            const WeightedGraph g = generate(entry.spec, entry.mode);
            for (const double n : {2.0, kInf}) {
                const auto profile = curvature_profile(g, n);
                for (int x = 0; x < g.size(); ++x) {
                    const double k_max = profile[static_cast<std::size_t>(x)].k_max;
                    if (!cd_check(g, x, k_max - 1e-6, n, 1e-10).holds) return false;
                    if (cd_check(g, x, k_max + 1e-6, n, 1e-10).holds) return false;
                    ++checked;
                }
            }
        }
        detail = std::to_string(checked) + " vertex checks";
        return checked > 0;
    });

    // 4. Theorem forward direction on oracle-confirmed nonnegative curvature
    criterion(4, "conditions (b),(c),(d) hold with margin >= -1e-7 when K_min >= 0",
              [](std::string& detail) {
        double worst_margin = kInf;
        for (const char* spec : {"cycle:16", "torus:2:6", "hypercube:4"}) {
            const auto graph_start = std::chrono::steady_clock::now();
            const WeightedGraph g = generate(spec, WeightMode::physical);
            const auto profile = curvature_profile(g, kInf);
            double k_min = kInf;
            int argmin = 0;
            for (const auto& r : profile)
                if (r.k_max < k_min) {
                    k_min = r.k_max;
                    argmin = r.vertex;
                }
            const double oracle = curvature_oracle(g, argmin, kInf, 3000, 4242);
            if (std::abs(oracle - k_min) > 1e-6) {
                detail = std::string("oracle disagrees on ") + spec;
                return false;
            }
            if (k_min < -1e-9) {
                detail = std::string(spec) + " unexpectedly has K_min < 0";
                return false;
            }
            const HeatOperator p(g);
            std::mt19937_64 rng(99);
            for (int trial = 0; trial < 100; ++trial) {
                const RealFunction f = random_function(g.size(), rng);
                for (const double t : {0.01, 0.1, 0.5, 1.0, 5.0, 20.0})
                    for (const Condition which :
                         {Condition::b_gradient, Condition::c_poincare,
                          Condition::d_reverse_poincare})
                        worst_margin =
                            std::min(worst_margin, check_condition(g, p, f, t, which).minCoeff());
            }
            const double seconds = std::chrono::duration<double>(
                                       std::chrono::steady_clock::now() - graph_start)
                                       .count();
            if (seconds >= 60.0) {
                detail = std::string(spec) + " exceeded 1 min";
                return false;
            }
        }
        char buf[80];
        std::snprintf(buf, sizeof buf, "worst margin %.3e", worst_margin);
        detail = buf;
        return worst_margin >= -1e-7;
    });

    // 5. converse: negative curvature forces a located violation
    criterion(5, "directed search finds a (b)-violation with gap >= 1e-9 when K_min < 0",
              [](std::string& detail) {
        int negative_graphs = 0;
        double smallest_gap = kInf;
        for (const auto& entry : corpus()) {
            const WeightedGraph g = generate(entry.spec, entry.mode);
            const auto profile = curvature_profile(g, kInf);
            double k_min = kInf;
            int argmin = 0;
            for (const auto& r : profile)
                if (r.k_max < k_min) {
                    k_min = r.k_max;
                    argmin = r.vertex;
                }
            const double oracle = curvature_oracle(g, argmin, kInf, 3000, 555);
            if (std::abs(oracle - k_min) > 1e-6) return false;
            if (k_min >= 0.0) continue;

            ++negative_graphs;
            const EquivalenceOutcome outcome = equivalence_experiment(g, 5, {0.1}, 777);
            if (!outcome.violation.has_value()) {
                detail = std::string("no violation found on ") + entry.spec + " (" +
                         to_string(entry.mode) + ")";
                return false;
            }
            smallest_gap = std::min(smallest_gap, outcome.violation->gap);
        }
        char buf[100];
        std::snprintf(buf, sizeof buf, "%d negative-curvature graphs, smallest gap %.3e",
                      negative_graphs, smallest_gap);
        detail = buf;
        return negative_graphs > 0 && smallest_gap >= 1e-9;
    });

    // 6. closed-form reverse Poincare values on K2
    criterion(6, "K2 condition (d) at t=0.25: LHS=e^{-1}/4, RHS=(1-e^{-1})/4 to 1e-9",
              [](std::string& detail) {
        const WeightedGraph k2 = generate("complete:2", WeightMode::physical);
        const HeatOperator p(k2);
        RealFunction f(2);
        f << 0.0, 1.0;
        const double t = 0.25;
        const RealFunction ptf = p.apply(t, f);
        const double lhs = 2.0 * t * gamma(k2, ptf)[0];
        const double rhs = (p.apply(t, f.cwiseProduct(f)) - ptf.cwiseProduct(ptf))[0];
        const double lhs_expected = 0.25 * std::exp(-1.0);
        const double rhs_expected = 0.25 * (1.0 - std::exp(-1.0));
        char buf[120];
        std::snprintf(buf, sizeof buf, "LHS %.9f (dev %.1e), RHS %.9f (dev %.1e)", lhs,
                      std::abs(lhs - lhs_expected), rhs, std::abs(rhs - rhs_expected));
        detail = buf;
        return std::abs(lhs - lhs_expected) <= 1e-9 && std::abs(rhs - rhs_expected) <= 1e-9;
    });

    // 7. gradient-decay bound on CD(0,inf)-certified graphs
    criterion(7, "2t sup Gamma(P_t f) <= |f|_inf^2 (1 + 1e-6) on certified graphs",
              [](std::string& detail) {
        const std::vector<double> grid = {0.01, 0.1, 0.5, 1.0, 5.0, 20.0};
        double worst_excess = -kInf;
        for (const char* spec : {"cycle:16", "torus:2:6", "hypercube:4"}) {
            const WeightedGraph g = generate(spec, WeightMode::physical);
            for (int x = 0; x < g.size(); ++x)
                if (!cd_check(g, x, 0.0, kInf, 1e-10).holds) {
                    detail = std::string(spec) + " is not CD(0,inf)";
                    return false;
                }
            const HeatOperator p(g);
            std::mt19937_64 rng(7);
            for (int trial = 0; trial < 50; ++trial) {
                const GradientDecayCurve curve =
                    gradient_decay(g, p, random_function(g.size(), rng), grid);
                worst_excess = std::max(worst_excess, curve.worst_excess);
                if (!curve.bound_ok) return false;
            }
        }
        char buf[80];
        std::snprintf(buf, sizeof buf, "worst excess %.3e", worst_excess);
        detail = buf;
        return true;
    });

    // 8. interpolation identity, second-order convergence
    criterion(8, "d/ds P_s(P_{t-s}f)^2 = 2 P_s Gamma(P_{t-s}f): order 2, dev(1e-3) <= 1e-5",
              [](std::string& detail) {
        const WeightedGraph g = generate("cycle:6", WeightMode::physical);
        const HeatOperator p(g);
        std::mt19937_64 rng(8);
        const RealFunction f = random_function(g.size(), rng);
        const double d1 = interpolation_check(g, p, f, 1.0, 0.5, 1e-3);
        const double d2 = interpolation_check(g, p, f, 1.0, 0.5, 5e-4);
        const double ratio = d1 / d2;
        char buf[100];
        std::snprintf(buf, sizeof buf, "dev(1e-3) %.3e, halving ratio %.2f", d1, ratio);
        detail = buf;
        return d1 <= 1e-5 && ratio >= 3.5 && ratio <= 4.5;
    });

    // 9. cutoff certification across the corpus
    criterion(9, "cutoffs: Gamma(eta_k) <= 1/(2k^2) <= 1/k, monotone, saturating",
              [](std::string& detail) {
        int graphs = 0;
        for (const auto& entry : corpus()) {
            const WeightedGraph g = generate(entry.spec, entry.mode);
            const CutoffSequence seq = build_cutoffs(g, 0, 20);
            if (seq.intrinsic_metric_max > 1.0 + 1e-12) return false;
            if (seq.k0 > 20) {
                detail = std::string("saturation beyond k=20 on ") + entry.spec;
                return false;
            }
            for (int k = 1; k <= 20; ++k) {
                const double mg = seq.max_gamma[static_cast<std::size_t>(k - 1)];
                // algebraically tight: allow the 1e-12 identity tolerance
                if (mg > (1.0 + 1e-12) / (2.0 * k * k)) return false;
                if (mg > 1.0 / k) return false;
                const auto& eta = seq.eta[static_cast<std::size_t>(k - 1)];
                if (eta.minCoeff() < 0.0 || eta.maxCoeff() > 1.0) return false;
                if (k > 1) {
                    const auto& prev = seq.eta[static_cast<std::size_t>(k - 2)];
                    for (int x = 0; x < g.size(); ++x)
                        if (prev[x] > eta[x]) return false;
                }
                if (k >= seq.k0 && (eta.minCoeff() != 1.0 || mg != 0.0)) return false;
            }
            ++graphs;
        }
        detail = std::to_string(graphs) + " corpus graphs, k <= 20";
        return graphs == static_cast<int>(corpus().size());
    });

    // 10. semigroup laws across the corpus
    criterion(10, "semigroup laws, lp contraction, stochastic completeness, energy decay",
              [](std::string& detail) {
        double worst = 0.0;
        std::uint64_t seed = 9000;
        for (const auto& entry : corpus()) {
            const WeightedGraph g = generate(entry.spec, entry.mode);
            const HeatOperator p(g);

            const SemigroupLawReport laws = semigroup_laws(p, 0.7, 0.3, 20, seed++);
            worst = std::max(worst, laws.worst_deviation());
            if (laws.composition > 1e-9 || laws.self_adjointness > 1e-9 ||
                laws.commutation > 1e-9 || laws.contraction_p1 > 1e-9 ||
                laws.contraction_p2 > 1e-9 || laws.contraction_pinf > 1e-9 ||
                laws.positivity_min < -1e-10) {
                detail = std::string("law deviation on ") + entry.spec;
                return false;
            }

            const RealFunction ones = RealFunction::Ones(g.size());
            for (const double t : {0.01, 0.1, 1.0, 10.0, 100.0})
                if ((p.apply(t, ones) - ones).cwiseAbs().maxCoeff() > 1e-10) {
                    detail = std::string("stochastic completeness on ") + entry.spec;
                    return false;
                }

            std::mt19937_64 rng(seed++);
            const RealFunction f = random_function(g.size(), rng);
            const double q0 = dirichlet_form(g, f, f);
            for (const double t : {0.05, 0.5, 2.0}) {
                const RealFunction ptf = p.apply(t, f);
                if (dirichlet_form(g, ptf, ptf) > q0 * (1.0 + 1e-12) + 1e-12) {
                    detail = std::string("energy decay on ") + entry.spec;
                    return false;
                }
            }
        }
        char buf[80];
        std::snprintf(buf, sizeof buf, "worst law deviation %.3e", worst);
        detail = buf;
        return true;
    });

    if (failures == 0)
        std::printf("acceptance: all 10 criteria passed\n");
    else
        std::printf("acceptance: %d criterion(s) FAILED\n", failures);
    return failures;
}
