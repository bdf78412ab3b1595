// gcurv: weighted-graph curvature and heat-semigroup toolkit.
//
// Subcommands: gen, info, curvature, cd-check, semigroup-verify,
// liouville-demo, cutoff-check. Exit codes: 0 success, 1 internal numerical
// failure, 2 bad input, 3 CD(K,n) violated, 4 semigroup margins inconsistent
// with the computed curvature sign, 5 liouville-demo curvature precondition
// failed. Reports go to --out (default stdout); identical configuration and
// seed produce byte-identical JSON up to the timestamp field.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gcurv/curvature.hpp"
#include "gcurv/gamma.hpp"
#include "gcurv/graph.hpp"
#include "gcurv/graph_io.hpp"
#include "gcurv/heat.hpp"
#include "gcurv/random.hpp"
#include "gcurv/verify.hpp"

namespace {

using nlohmann::json;
using namespace gcurv;

constexpr int kExitOk = 0;
constexpr int kExitNumerical = 1;
constexpr int kExitBadInput = 2;
constexpr int kExitCdViolated = 3;
constexpr int kExitInconsistent = 4;
constexpr int kExitPrecondition = 5;

struct CommonOptions {
    std::string graph_file;
    std::string gen_spec;
    std::string mode; // empty = default for the source kind
    std::string dim = "inf";
    double k = 0.0;
    double tol = 1e-10;
    std::string times = "0.01,0.1,0.5,1,5,20";
    int samples = 100;
    std::uint64_t seed = 0;
    std::string out;
    std::string format = "json";
    int threads = 0;
};

void add_source_options(CLI::App* cmd, CommonOptions& o) {
    auto* graph = cmd->add_option("--graph", o.graph_file, "graph file (.json or TSV edge list)");
    auto* gen = cmd->add_option("--gen", o.gen_spec,
                                "generator spec family:params "
                                "(path:N cycle:N torus:d:N hypercube:d complete:N star:N "
                                "regular_tree:deg:depth)");
    graph->excludes(gen);
    gen->excludes(graph);
    cmd->add_option("--mode", o.mode,
                    "weight mode {normalized|physical|custom}; default: custom for JSON files, "
                    "normalized otherwise")
        ->check(CLI::IsMember({"normalized", "physical", "custom"}));
}

void add_output_options(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--out", o.out, "output path (default: stdout)");
    cmd->add_option("--format", o.format, "report format")
        ->check(CLI::IsMember({"json", "csv"}));
}

WeightedGraph load_input(const CommonOptions& o) {
    if (!o.gen_spec.empty()) {
        const WeightMode mode =
            o.mode.empty() ? WeightMode::normalized : weight_mode_from_string(o.mode);
        return generate(o.gen_spec, mode);
    }
    if (!o.graph_file.empty()) {
        WeightMode mode;
        if (o.mode.empty())
            mode = ends_with(o.graph_file, ".json") ? WeightMode::custom : WeightMode::normalized;
        else
            mode = weight_mode_from_string(o.mode);
        return load_graph(o.graph_file, mode);
    }
    throw GraphError(GraphFault::bad_parameter, "supply a graph with --graph FILE or --gen SPEC");
}

double parse_dim(const std::string& text) {
    if (text == "inf") return std::numeric_limits<double>::infinity();
    try {
        std::size_t used = 0;
        const double value = std::stod(text, &used);
        if (used != text.size() || !(value > 0.0)) throw std::invalid_argument(text);
        return value;
    } catch (const std::exception&) {
        throw GraphError(GraphFault::bad_parameter, "--dim needs a positive real or 'inf'");
    }
}

std::vector<double> parse_times(const std::string& text) {
    std::vector<double> times;
    std::stringstream stream(text);
    std::string token;
    while (std::getline(stream, token, ',')) {
        try {
            std::size_t used = 0;
            const double t = std::stod(token, &used);
            if (used != token.size() || !(t > 0.0)) throw std::invalid_argument(token);
            times.push_back(t);
        } catch (const std::exception&) {
            throw GraphError(GraphFault::bad_parameter,
                             "--times needs positive comma-separated reals, got '" + token + "'");
        }
    }
    if (times.empty())
        throw GraphError(GraphFault::bad_parameter, "--times list is empty");
    return times;
}

std::string iso_timestamp() {
    char buf[32];
    const std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json graph_summary(const WeightedGraph& g, const CommonOptions& o) {
    json summary{{"vertices", g.size()},
                 {"edges", g.edge_count()},
                 {"mode", to_string(g.mode())}};
    if (!o.gen_spec.empty()) summary["source"] = o.gen_spec;
    if (!o.graph_file.empty()) summary["source"] = o.graph_file;
    return summary;
}

json dim_to_json(double n) {
    if (std::isinf(n)) return "inf";
    return n;
}

void write_text(const std::string& path, const std::string& body) {
    if (path.empty()) {
        std::cout << body;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << body;
}

void emit_json(const json& report, const CommonOptions& o) {
    write_text(o.out, report.dump(2) + "\n");
}

void emit_csv(const std::vector<std::string>& header,
              const std::vector<std::vector<std::string>>& rows, const CommonOptions& o) {
    std::string body;
    for (std::size_t i = 0; i < header.size(); ++i)
        body += (i ? "," : "") + header[i];
    body += "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            body += (i ? "," : "") + row[i];
        body += "\n";
    }
    write_text(o.out, body);
}

std::string out_stem(const std::string& out) {
    if (out.empty()) return "liouville";
    const std::size_t dot = out.find_last_of('.');
    const std::size_t slash = out.find_last_of('/');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return out;
    return out.substr(0, dot);
}

// --------------------------------------------------------------------------

int cmd_gen(const CommonOptions& o) {
    if (o.gen_spec.empty())
        throw GraphError(GraphFault::bad_parameter, "gen needs --gen SPEC");
    const WeightedGraph g = load_input(o);
    if (!o.out.empty() && ends_with(o.out, ".tsv")) {
        std::string body;
        for (const Edge& e : g.edges())
            body += g.label(e.u) + "\t" + g.label(e.v) + "\t" + fmt17(e.mu) + "\n";
        write_text(o.out, body);
    } else {
        write_text(o.out, graph_to_json(g).dump(2) + "\n");
    }
    return kExitOk;
}

int cmd_info(const CommonOptions& o) {
    const WeightedGraph g = load_input(o);
    const AssumptionReport a = check_assumption_A(g);
    double deg_min = std::numeric_limits<double>::infinity();
    for (int x = 0; x < g.size(); ++x) deg_min = std::min(deg_min, g.weighted_degree(x));

    if (o.format == "csv") {
        emit_csv({"key", "value"},
                 {{"vertices", std::to_string(g.size())},
                  {"edges", std::to_string(g.edge_count())},
                  {"mode", to_string(g.mode())},
                  {"a1_bound", fmt17(a.a1_bound)},
                  {"a2_inf_m", fmt17(a.a2_inf_m)},
                  {"deg_min", fmt17(deg_min)}},
                 o);
        return kExitOk;
    }
    json report{{"command", "info"},
                {"graph", graph_summary(g, o)},
                {"assumption", json{{"a1_bound", a.a1_bound},
                                    {"a2_inf_m", a.a2_inf_m},
                                    {"a1_holds", a.a1_holds},
                                    {"a2_holds", a.a2_holds}}},
                {"deg_min", deg_min},
                {"deg_max", a.a1_bound},
                {"timestamp", iso_timestamp()}};
    emit_json(report, o);
    return kExitOk;
}

int cmd_curvature(const CommonOptions& o) {
    const WeightedGraph g = load_input(o);
    const double n = parse_dim(o.dim);
    const auto profile = curvature_profile(g, n, o.threads);

    std::vector<double> ks;
    for (const auto& r : profile)
        if (r.status == CurvatureStatus::ok) ks.push_back(r.k_max);

    if (o.format == "csv") {
        std::vector<std::vector<std::string>> rows;
        for (const auto& r : profile) {
            if (r.status == CurvatureStatus::ok)
                rows.push_back({g.label(r.vertex), fmt17(r.k_max),
                                fmt17(r.witness.cwiseAbs().maxCoeff()),
                                fmt17(norm_p(g, r.witness, 2.0))});
            else
                rows.push_back({g.label(r.vertex), "undefined", "0", "0"});
        }
        emit_csv({"vertex", "k_max", "witness_sup", "witness_l2m"}, rows, o);
        return kExitOk;
    }

    json per_vertex = json::array();
    for (const auto& r : profile) {
        json entry{{"vertex", g.label(r.vertex)}};
        if (r.status == CurvatureStatus::ok) {
            entry["k_max"] = r.k_max;
            entry["witness_sup"] = r.witness.cwiseAbs().maxCoeff();
            entry["witness_l2m"] = norm_p(g, r.witness, 2.0);
            entry["status"] = "ok";
        } else {
            entry["status"] = "undefined";
        }
        per_vertex.push_back(entry);
    }
    json summary;
    if (!ks.empty()) {
        std::vector<double> sorted = ks;
        std::sort(sorted.begin(), sorted.end());
        const std::size_t mid = sorted.size() / 2;
        const double median = sorted.size() % 2 ? sorted[mid]
                                                : 0.5 * (sorted[mid - 1] + sorted[mid]);
        summary = json{{"min", sorted.front()}, {"median", median}, {"max", sorted.back()}};
    }
    json report{{"command", "curvature"},
                {"dim", dim_to_json(n)},
                {"graph", graph_summary(g, o)},
                {"per_vertex", per_vertex},
                {"summary", summary},
                {"threads", o.threads},
                {"timestamp", iso_timestamp()}};
    emit_json(report, o);
    return kExitOk;
}

int cmd_cd_check(const CommonOptions& o, bool k_given) {
    if (!k_given)
        throw GraphError(GraphFault::bad_parameter, "cd-check needs --K");
    if (!std::isfinite(o.k))
        throw GraphError(GraphFault::bad_parameter, "cd-check needs a finite --K");
    const WeightedGraph g = load_input(o);
    const double n = parse_dim(o.dim);

    bool all_hold = true;
    int worst_vertex = 0;
    double worst_eig = std::numeric_limits<double>::infinity();
    std::optional<RealFunction> worst_witness;
    json per_vertex = json::array();
    std::vector<std::vector<std::string>> rows;
    for (int x = 0; x < g.size(); ++x) {
        const CdCheckResult r = cd_check(g, x, o.k, n, o.tol);
        all_hold = all_hold && r.holds;
        if (r.min_eig < worst_eig) {
            worst_eig = r.min_eig;
            worst_vertex = x;
            worst_witness = r.witness;
        }
        per_vertex.push_back(
            json{{"vertex", g.label(x)}, {"min_eig", r.min_eig}, {"holds", r.holds}});
        rows.push_back({g.label(x), fmt17(r.min_eig), r.holds ? "true" : "false"});
    }

    if (o.format == "csv") {
        emit_csv({"vertex", "min_eig", "holds"}, rows, o);
        return all_hold ? kExitOk : kExitCdViolated;
    }

    json worst{{"vertex", g.label(worst_vertex)}, {"min_eig", worst_eig}};
    if (!all_hold && worst_witness) {
        json witness = json::array();
        for (int x = 0; x < g.size(); ++x)
            if ((*worst_witness)[x] != 0.0)
                witness.push_back(json{{"vertex", g.label(x)}, {"value", (*worst_witness)[x]}});
        worst["witness"] = witness;
    }
    json report{{"command", "cd-check"},
                {"K", o.k},
                {"dim", dim_to_json(n)},
                {"tol", o.tol},
                {"graph", graph_summary(g, o)},
                {"holds", all_hold},
                {"worst", worst},
                {"per_vertex", per_vertex},
                {"timestamp", iso_timestamp()}};
    emit_json(report, o);
    return all_hold ? kExitOk : kExitCdViolated;
}

int cmd_semigroup_verify(const CommonOptions& o) {
    const WeightedGraph g = load_input(o);
    const std::vector<double> times = parse_times(o.times);
    const EquivalenceOutcome outcome =
        equivalence_experiment(g, o.samples, times, o.seed, o.threads);

    const bool certified = outcome.curvature_min >= -1e-9;
    double worst_margin = std::numeric_limits<double>::infinity();
    for (const auto& report : outcome.reports)
        worst_margin = std::min(worst_margin, report.global_worst_margin);

    // margins must match the curvature sign
    bool consistent = true;
    if (certified && worst_margin < -1e-7) consistent = false;
    if (!certified && !outcome.violation.has_value()) consistent = false;

    if (o.format == "csv") {
        std::vector<std::vector<std::string>> rows;
        for (const auto& report : outcome.reports) {
            for (std::size_t ti = 0; ti < report.t_grid.size(); ++ti) {
                double worst_t = std::numeric_limits<double>::infinity();
                for (const auto& per_sample : report.margins)
                    worst_t = std::min(worst_t, per_sample[ti]);
                rows.push_back(
                    {to_string(report.condition), fmt17(report.t_grid[ti]), fmt17(worst_t)});
            }
        }
        emit_csv({"condition", "t", "worst_margin"}, rows, o);
        return consistent ? kExitOk : kExitInconsistent;
    }

    json conditions;
    for (const auto& report : outcome.reports) {
        json entry{{"global_worst_margin", report.global_worst_margin},
                   {"witness",
                    json{{"sample", report.witness_sample},
                         {"t", report.witness_t},
                         {"vertex", report.witness_vertex >= 0 ? g.label(report.witness_vertex)
                                                               : ""}}}};
        json per_t = json::array();
        for (std::size_t ti = 0; ti < report.t_grid.size(); ++ti) {
            double worst_t = std::numeric_limits<double>::infinity();
            for (const auto& per_sample : report.margins)
                worst_t = std::min(worst_t, per_sample[ti]);
            per_t.push_back(json{{"t", report.t_grid[ti]}, {"worst_margin", worst_t}});
        }
        entry["per_t"] = per_t;
        conditions[to_string(report.condition)] = entry;
    }

    json violation;
    if (outcome.violation) {
        violation = json{{"condition", to_string(outcome.violation->condition)},
                         {"t", outcome.violation->t},
                         {"vertex", g.label(outcome.violation->vertex)},
                         {"gap", outcome.violation->gap}};
    }
    json report{{"command", "semigroup-verify"},
                {"curvature_min", outcome.curvature_min},
                {"certified_nonnegative", certified},
                {"consistent", consistent},
                {"conditions", conditions},
                {"violation", violation},
                {"samples", o.samples},
                {"seed", o.seed},
                {"times", times},
                {"graph", graph_summary(g, o)},
                {"timestamp", iso_timestamp()}};
    emit_json(report, o);
    return consistent ? kExitOk : kExitInconsistent;
}

int cmd_liouville_demo(const CommonOptions& o) {
    const WeightedGraph g = load_input(o);
    const std::vector<double> times_raw = parse_times(o.times);
    std::vector<double> times = times_raw;
    std::sort(times.begin(), times.end());

    // curvature precondition: CD(0,inf) at every vertex
    for (int x = 0; x < g.size(); ++x) {
        const CdCheckResult r = cd_check(g, x, 0.0, std::numeric_limits<double>::infinity(), o.tol);
        if (!r.holds) {
            std::cerr << "liouville-demo: CD(0,inf) fails at vertex " << g.label(x)
                      << " (min_eig " << r.min_eig << ")\n";
            return kExitPrecondition;
        }
    }

    const HeatOperator p(g);
    std::mt19937_64 rng(o.seed);
    const int n_functions = std::max(1, o.samples);
    std::vector<double> sup_gamma(times.size(), 0.0);
    double sup_f_sq = 0.0;
    bool bound_ok = true;
    double worst_excess = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_functions; ++i) {
        const RealFunction f = random_function(g.size(), rng);
        const GradientDecayCurve curve = gradient_decay(g, p, f, times);
        bound_ok = bound_ok && curve.bound_ok;
        worst_excess = std::max(worst_excess, curve.worst_excess);
        sup_f_sq = std::max(sup_f_sq, curve.sup_f_sq);
        for (std::size_t ti = 0; ti < times.size(); ++ti)
            sup_gamma[ti] = std::max(sup_gamma[ti], curve.sup_gamma[ti]);
    }
    if (!bound_ok)
        throw NumericalError("gradient-decay bound violated on a CD(0,inf)-certified graph");

    std::vector<double> two_t(times.size());
    for (std::size_t ti = 0; ti < times.size(); ++ti) two_t[ti] = 2.0 * times[ti] * sup_gamma[ti];

    const std::string stem = out_stem(o.out);
    const std::string gamma_file = stem + ".gamma_sup.dat";
    const std::string product_file = stem + ".gamma_sup_2t.dat";
    write_plot_data(gamma_file, times, sup_gamma);
    write_plot_data(product_file, times, two_t);

    if (o.format == "csv") {
        std::vector<std::vector<std::string>> rows;
        for (std::size_t ti = 0; ti < times.size(); ++ti)
            rows.push_back({fmt17(times[ti]), fmt17(sup_gamma[ti]), fmt17(two_t[ti])});
        emit_csv({"t", "sup_gamma", "two_t_sup_gamma"}, rows, o);
        return kExitOk;
    }
    json curve = json::array();
    for (std::size_t ti = 0; ti < times.size(); ++ti)
        curve.push_back(json{{"t", times[ti]},
                             {"sup_gamma", sup_gamma[ti]},
                             {"two_t_sup_gamma", two_t[ti]}});
    json report{{"command", "liouville-demo"},
                {"bound_ok", bound_ok},
                {"sup_f_sq", sup_f_sq},
                {"worst_excess", worst_excess},
                {"curve", curve},
                {"curve_files", json::array({gamma_file, product_file})},
                {"samples", n_functions},
                {"seed", o.seed},
                {"graph", graph_summary(g, o)},
                {"timestamp", iso_timestamp()}};
    emit_json(report, o);
    return kExitOk;
}

int cmd_cutoff_check(const CommonOptions& o, const std::string& base_label, int k_max) {
    const WeightedGraph g = load_input(o);
    const int base = base_label.empty() ? 0 : g.index_of(base_label);
    const CutoffSequence seq = build_cutoffs(g, base, k_max);

    bool all_hold = true;
    json table = json::array();
    std::vector<std::vector<std::string>> rows;
    for (int k = 1; k <= k_max; ++k) {
        const double max_gamma = seq.max_gamma[static_cast<std::size_t>(k - 1)];
        const double bound = 1.0 / static_cast<double>(k);
        const bool holds = max_gamma <= bound;
        const bool saturated = k >= seq.k0;
        all_hold = all_hold && holds;
        table.push_back(json{{"k", k},
                             {"max_gamma", max_gamma},
                             {"half_bound", 1.0 / (2.0 * k * k)},
                             {"bound", bound},
                             {"saturated", saturated}});
        rows.push_back({std::to_string(k), fmt17(max_gamma), fmt17(1.0 / (2.0 * k * k)),
                        fmt17(bound), saturated ? "true" : "false"});
    }

    if (o.format == "csv") {
        emit_csv({"k", "max_gamma", "half_bound", "bound", "saturated"}, rows, o);
        return all_hold ? kExitOk : kExitNumerical;
    }
    json report{{"command", "cutoff-check"},
                {"base", g.label(base)},
                {"k_max", k_max},
                {"k0", seq.k0},
                {"intrinsic_metric_max", seq.intrinsic_metric_max},
                {"holds", all_hold},
                {"table", table},
                {"graph", graph_summary(g, o)},
                {"timestamp", iso_timestamp()}};
    emit_json(report, o);
    return all_hold ? kExitOk : kExitNumerical;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"discrete Gamma-calculus, Bakry-Emery curvature and heat-semigroup "
                 "verification on weighted graphs"};
    app.require_subcommand(1);

    CommonOptions o;
    std::string base_label;
    int k_max = 20;

    auto* gen = app.add_subcommand("gen", "generate a graph and write it (JSON, or TSV when "
                                          "--out ends in .tsv)");
    add_source_options(gen, o);
    gen->add_option("--out", o.out, "output path (default: stdout)");

    auto* info = app.add_subcommand("info", "graph summary and assumption (A) report");
    add_source_options(info, o);
    add_output_options(info, o);

    auto* curvature = app.add_subcommand("curvature", "per-vertex maximal CD(K,n) curvature");
    add_source_options(curvature, o);
    add_output_options(curvature, o);
    curvature->add_option("--dim", o.dim, "dimension parameter n (positive real or 'inf')");
    curvature->add_option("--threads", o.threads, "worker cap (0 = hardware)");

    auto* cdcheck = app.add_subcommand("cd-check", "verify CD(K,n) at every vertex");
    add_source_options(cdcheck, o);
    add_output_options(cdcheck, o);
    cdcheck->add_option("--dim", o.dim, "dimension parameter n (positive real or 'inf')");
    auto* k_opt = cdcheck->add_option("--K", o.k, "curvature lower bound to test");
    cdcheck->add_option("--tol", o.tol, "PSD tolerance on the smallest eigenvalue");

    auto* semigroup = app.add_subcommand("semigroup-verify",
                                         "randomized check of the semigroup inequalities "
                                         "(b), (c), (d) against the curvature sign");
    add_source_options(semigroup, o);
    add_output_options(semigroup, o);
    semigroup->add_option("--times", o.times, "comma-separated positive t grid");
    semigroup->add_option("--samples", o.samples, "random test functions");
    semigroup->add_option("--seed", o.seed, "RNG seed (recorded in the report)");
    semigroup->add_option("--threads", o.threads, "worker cap (0 = hardware)");

    auto* liouville = app.add_subcommand("liouville-demo",
                                         "gradient-decay curves sup Gamma(P_t f) on a "
                                         "CD(0,inf) graph");
    add_source_options(liouville, o);
    add_output_options(liouville, o);
    liouville->add_option("--times", o.times, "comma-separated positive t grid");
    liouville->add_option("--samples", o.samples, "random test functions (default 1)")
        ->default_val(1);
    liouville->add_option("--seed", o.seed, "RNG seed");
    liouville->add_option("--tol", o.tol, "CD(0,inf) certification tolerance");

    auto* cutoff = app.add_subcommand("cutoff-check",
                                      "intrinsic-metric cutoff functions eta_k with "
                                      "Gamma(eta_k) <= 1/k");
    add_source_options(cutoff, o);
    add_output_options(cutoff, o);
    cutoff->add_option("--base", base_label, "base vertex label (default: first vertex)");
    cutoff->add_option("--kmax", k_max, "largest cutoff index")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitBadInput;
    }

    try {
        if (gen->parsed()) return cmd_gen(o);
        if (info->parsed()) return cmd_info(o);
        if (curvature->parsed()) return cmd_curvature(o);
        if (cdcheck->parsed()) return cmd_cd_check(o, k_opt->count() > 0);
        if (semigroup->parsed()) return cmd_semigroup_verify(o);
        if (liouville->parsed()) return cmd_liouville_demo(o);
        if (cutoff->parsed()) return cmd_cutoff_check(o, base_label, k_max);
    } catch (const GraphError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}
