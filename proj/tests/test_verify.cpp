#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "gcurv/curvature.hpp"
#include "gcurv/gamma.hpp"
#include "gcurv/graph.hpp"
#include "gcurv/heat.hpp"
#include "gcurv/random.hpp"
#include "gcurv/verify.hpp"

using namespace gcurv;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// oracle-confirmed minimum curvature at n = inf
double confirmed_k_min(const WeightedGraph& g, std::uint64_t seed) {
    const auto profile = curvature_profile(g, kInf);
    double k_min = kInf;
    int argmin = 0;
    for (const auto& r : profile)
        if (r.status == CurvatureStatus::ok && r.k_max < k_min) {
            k_min = r.k_max;
            argmin = r.vertex;
        }
    const double oracle = curvature_oracle(g, argmin, kInf, 2000, seed);
    REQUIRE_THAT(oracle, Catch::Matchers::WithinAbs(k_min, 1e-6));
    return k_min;
}

} // namespace

TEST_CASE("condition (d) closed form on the two-vertex graph") {
    const WeightedGraph k2 = generate("complete:2", WeightMode::physical);
    const HeatOperator p(k2);
    RealFunction f(2);
    f << 0.0, 1.0;
    const double t = 0.25;

    const double lhs = 2.0 * t * gamma(k2, p.apply(t, f))[0];
    const double rhs_expected = 0.25 * (1.0 - std::exp(-1.0));
    CHECK_THAT(lhs, Catch::Matchers::WithinAbs(0.25 * std::exp(-1.0), 1e-9));

    const RealFunction margin = check_condition(k2, p, f, t, Condition::d_reverse_poincare);
    CHECK_THAT(margin[0], Catch::Matchers::WithinAbs(rhs_expected - 0.25 * std::exp(-1.0), 1e-9));
}

TEST_CASE("constant functions have zero left-hand sides") {
    const WeightedGraph g = generate("torus:2:4", WeightMode::normalized);
    const HeatOperator p(g);
    const RealFunction c = RealFunction::Constant(g.size(), 2.5);
    for (const Condition which :
         {Condition::b_gradient, Condition::c_poincare, Condition::d_reverse_poincare}) {
        const RealFunction margin = check_condition(g, p, c, 0.5, which);
        CHECK(margin.minCoeff() >= -1e-12);
    }
    CHECK_THROWS_AS(check_condition(g, p, c, 0.0, Condition::b_gradient), std::invalid_argument);
}

TEST_CASE("forward direction on oracle-confirmed nonnegative curvature") {
    std::mt19937_64 rng(2);
    for (const char* spec : {"cycle:8", "torus:2:5", "hypercube:3"}) {
        const WeightedGraph g = generate(spec, WeightMode::physical);
        REQUIRE(confirmed_k_min(g, 77) >= -1e-9);
        const HeatOperator p(g);
        for (int trial = 0; trial < 25; ++trial) {
            const RealFunction f = random_function(g.size(), rng);
            for (const double t : {0.01, 0.1, 0.5, 1.0, 5.0, 20.0}) {
                for (const Condition which :
                     {Condition::b_gradient, Condition::c_poincare, Condition::d_reverse_poincare})
                    CHECK(check_condition(g, p, f, t, which).minCoeff() >= -1e-7);
            }
        }
    }
}

TEST_CASE("equivalence experiment on a flat cycle") {
    const WeightedGraph g = generate("cycle:8", WeightMode::physical);
    const EquivalenceOutcome outcome = equivalence_experiment(g, 30, {0.01, 0.1, 0.5, 1.0}, 11);
    CHECK_THAT(outcome.curvature_min, Catch::Matchers::WithinAbs(0.0, 1e-8));
    CHECK_FALSE(outcome.violation.has_value());
    for (const auto& report : outcome.reports) {
        CHECK(report.global_worst_margin >= -1e-7);
        CHECK(report.margins.size() == 30);
        CHECK(report.witness_sample >= 0);
    }
}

TEST_CASE("equivalence experiment finds violations exactly when curvature is negative") {
    // tree: oracle-confirmed negative minimum -> a condition-(b) violation
    const WeightedGraph tree = generate("regular_tree:3:3", WeightMode::physical);
    const double tree_k_min = confirmed_k_min(tree, 13);
    REQUIRE(tree_k_min < 0.0);
    const EquivalenceOutcome negative = equivalence_experiment(tree, 10, {0.1, 1.0}, 17);
    REQUIRE(negative.violation.has_value());
    CHECK(negative.violation->condition == Condition::b_gradient);
    CHECK(negative.violation->gap >= 1e-9);
    // the reported witness really violates (b) at the reported (t, x)
    const HeatOperator p(tree);
    const RealFunction margin =
        check_condition(tree, p, negative.violation->f, negative.violation->t, Condition::b_gradient);
    CHECK_THAT(margin[negative.violation->vertex],
               Catch::Matchers::WithinAbs(-negative.violation->gap, 1e-12));

    // positively curved graph -> no violation reported
    const WeightedGraph q3 = generate("hypercube:3", WeightMode::physical);
    REQUIRE(confirmed_k_min(q3, 19) > 0.0);
    const EquivalenceOutcome positive = equivalence_experiment(q3, 10, {0.1, 1.0}, 23);
    CHECK_FALSE(positive.violation.has_value());
}

TEST_CASE("small-t expansion of the (b)-gap has order two") {
    const WeightedGraph g = generate("regular_tree:3:2", WeightMode::physical);
    const HeatOperator p(g);
    std::mt19937_64 rng(29);
    const RealFunction f = random_function(g.size(), rng);
    const int x = 0;
    const double g2x = gamma2(g, f)[x];

    auto gap_error = [&](double t) {
        const double margin = check_condition(g, p, f, t, Condition::b_gradient)[x];
        return std::abs(margin - 2.0 * t * g2x);
    };
    const double e1 = gap_error(1e-3);
    const double e2 = gap_error(5e-4);
    CHECK(e1 / e2 >= 3.0);
    CHECK(e1 / e2 <= 5.0);
}

TEST_CASE("interpolation identity, second-order convergence") {
    const WeightedGraph g = generate("cycle:6", WeightMode::physical);
    const HeatOperator p(g);
    std::mt19937_64 rng(31);
    const RealFunction f = random_function(g.size(), rng);

    const double d1 = interpolation_check(g, p, f, 1.0, 0.5, 1e-3);
    const double d2 = interpolation_check(g, p, f, 1.0, 0.5, 5e-4);
    CHECK(d1 <= 1e-5);
    CHECK(d1 / d2 >= 3.5);
    CHECK(d1 / d2 <= 4.5);

    const RealFunction c = RealFunction::Constant(g.size(), 1.5);
    CHECK(interpolation_check(g, p, c, 1.0, 0.5, 1e-3) <= 1e-14);

    CHECK_THROWS_AS(interpolation_check(g, p, f, 1.0, 1.5, 1e-3), std::invalid_argument);
    CHECK_THROWS_AS(interpolation_check(g, p, f, 1.0, 0.5, 0.7), std::invalid_argument);
}

TEST_CASE("gradient decay curve and bound") {
    const WeightedGraph k2 = generate("complete:2", WeightMode::physical);
    const HeatOperator p2(k2);
    RealFunction f(2);
    f << 0.0, 1.0;
    const std::vector<double> grid = {0.01, 0.1, 0.5, 1.0, 5.0, 20.0};
    const GradientDecayCurve curve = gradient_decay(k2, p2, f, grid);
    REQUIRE(curve.sup_gamma.size() == grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK_THAT(curve.sup_gamma[i],
                   Catch::Matchers::WithinAbs(0.5 * std::exp(-4.0 * grid[i]), 1e-9));
    CHECK(curve.bound_ok);
    CHECK(curve.sup_f_sq == 1.0);

    const RealFunction c = RealFunction::Constant(2, 3.0);
    const GradientDecayCurve flat = gradient_decay(k2, p2, c, grid);
    for (const double v : flat.sup_gamma) CHECK(v == 0.0);

    // CD(0,inf)-certified torus with random bounded data
    const WeightedGraph torus = generate("torus:2:5", WeightMode::physical);
    REQUIRE(confirmed_k_min(torus, 37) >= -1e-9);
    const HeatOperator pt(torus);
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        const RealFunction h = random_function(torus.size(), rng);
        CHECK(gradient_decay(torus, pt, h, grid).bound_ok);
    }

    CHECK_THROWS_AS(gradient_decay(k2, p2, f, {0.5, 0.1}), std::invalid_argument);
}

TEST_CASE("harmonic solve") {
    const WeightedGraph path3 = generate("path:3", WeightMode::physical);
    const RealFunction mid = harmonic_solve(path3, {0, 2}, {0.0, 1.0});
    CHECK_THAT(mid[1], Catch::Matchers::WithinAbs(0.5, 1e-12));

    // constant boundary data extends to the constant
    const WeightedGraph torus = generate("torus:2:4", WeightMode::normalized);
    const RealFunction flat = harmonic_solve(torus, {0, 5}, {2.0, 2.0});
    CHECK((flat.array() - 2.0).abs().maxCoeff() <= 1e-12);

    // empty interior returns the data
    const RealFunction copy = harmonic_solve(path3, {0, 1, 2}, {3.0, -1.0, 4.0});
    CHECK(copy[0] == 3.0);
    CHECK(copy[1] == -1.0);
    CHECK(copy[2] == 4.0);

    // discrete maximum principle on a bigger Dirichlet problem
    const WeightedGraph grid = generate("torus:2:6", WeightMode::physical);
    const RealFunction u = harmonic_solve(grid, {0, 17, 30}, {0.0, 1.0, -1.0});
    CHECK(u.maxCoeff() <= 1.0 + 1e-12);
    CHECK(u.minCoeff() >= -1.0 - 1e-12);
    const RealFunction residual = laplacian(grid, u);
    for (int x = 0; x < grid.size(); ++x)
        if (x != 0 && x != 17 && x != 30) CHECK(std::abs(residual[x]) <= 1e-10);

    CHECK_THROWS_AS(harmonic_solve(path3, {}, {}), std::invalid_argument);
    CHECK_THROWS_AS(harmonic_solve(path3, {0, 0}, {1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(harmonic_solve(path3, {9}, {1.0}), GraphError);
}

TEST_CASE("cutoff sequences") {
    const WeightedGraph k2 = generate("complete:2", WeightMode::physical);
    const CutoffSequence k2seq = build_cutoffs(k2, 0, 3);
    CHECK(k2seq.rho[1] == 1.0); // sigma = 1 on the single edge
    CHECK(k2seq.k0 == 1);
    for (const double mg : k2seq.max_gamma) CHECK(mg <= 0.5);

    for (const char* spec : {"path:10", "cycle:12", "torus:2:5", "star:6", "regular_tree:3:3"}) {
        for (const WeightMode mode : {WeightMode::physical, WeightMode::normalized}) {
            const WeightedGraph g = generate(spec, mode);
            const CutoffSequence seq = build_cutoffs(g, 0, 20);

            CHECK(seq.intrinsic_metric_max <= 1.0 + 1e-12);
            for (int k = 1; k <= 20; ++k) {
                const double bound = 1.0 / (2.0 * k * k);
                CHECK(seq.max_gamma[static_cast<std::size_t>(k - 1)] <= bound * (1.0 + 1e-12));
                CHECK(seq.max_gamma[static_cast<std::size_t>(k - 1)] <= 1.0 / k);
                const auto& eta = seq.eta[static_cast<std::size_t>(k - 1)];
                CHECK(eta.minCoeff() >= 0.0);
                CHECK(eta.maxCoeff() <= 1.0);
                if (k > 1) { // pointwise monotone, exact in floating point
                    const auto& prev = seq.eta[static_cast<std::size_t>(k - 2)];
                    for (int x = 0; x < g.size(); ++x) CHECK(prev[x] <= eta[x]);
                }
            }

            // saturation: eta_k is the constant 1 exactly from k0 on
            REQUIRE(seq.k0 <= 20);
            const auto& saturated = seq.eta[static_cast<std::size_t>(seq.k0 - 1)];
            CHECK(saturated.minCoeff() == 1.0);
            CHECK(seq.max_gamma[static_cast<std::size_t>(seq.k0 - 1)] == 0.0);
            if (seq.k0 > 1)
                CHECK(seq.eta[static_cast<std::size_t>(seq.k0 - 2)].minCoeff() < 1.0);
        }
    }
}

TEST_CASE("truncation step: f_k converges to f under the semigroup") {
    const WeightedGraph g = generate("torus:2:4", WeightMode::physical);
    const HeatOperator p(g);
    std::mt19937_64 rng(43);
    const RealFunction f = random_function(g.size(), rng);
    const CutoffSequence seq = build_cutoffs(g, 0, 20);
    REQUIRE(seq.k0 <= 20);

    double prev_dev = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= seq.k0; ++k) {
        const RealFunction f_k = f.cwiseProduct(seq.eta[static_cast<std::size_t>(k - 1)]);
        const double dev = (p.apply(0.5, f_k) - p.apply(0.5, f)).cwiseAbs().maxCoeff();
        CHECK(dev <= prev_dev + 1e-12);
        prev_dev = dev;
    }

    // at the saturation index the truncation is the identity, bitwise
    const RealFunction f_sat = f.cwiseProduct(seq.eta[static_cast<std::size_t>(seq.k0 - 1)]);
    CHECK(f_sat == f);
    CHECK(p.apply(0.5, f_sat) == p.apply(0.5, f));
    CHECK(gamma(g, p.apply(0.5, f_sat)) == gamma(g, p.apply(0.5, f)));
}

TEST_CASE("plot data writer") {
    const auto path = std::filesystem::temp_directory_path() / "gcurv_curve.dat";
    write_plot_data(path.string(), {0.5, 1.0}, {0.25, 0.125});
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "0.5 0.25");
    std::getline(in, line);
    CHECK(line == "1 0.125");
    std::filesystem::remove(path);
}
