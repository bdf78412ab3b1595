#pragma once

// Weighted-graph data model: vertex measure m, symmetric positive edge
// weights mu, generator families, combinatorial balls, and the boundedness /
// non-degeneracy report used by the curvature and semigroup modules.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace gcurv {

enum class WeightMode { normalized, physical, custom };

enum class GraphFault {
    parse,
    nonpositive_weight,
    nonpositive_measure,
    self_loop,
    duplicate_edge,
    disconnected,
    bad_parameter,
    unknown_vertex,
};

class GraphError : public std::runtime_error {
public:
    GraphError(GraphFault fault, const std::string& what)
        : std::runtime_error(what), fault_(fault) {}
    GraphFault fault() const { return fault_; }

private:
    GraphFault fault_;
};

// Fatal numerical trouble (eigensolver non-convergence, solver residual
// above contract). Distinct from GraphError so the CLI can map exit codes.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline const char* to_string(WeightMode mode) {
    switch (mode) {
    case WeightMode::normalized: return "normalized";
    case WeightMode::physical: return "physical";
    case WeightMode::custom: return "custom";
    }
    return "?";
}

inline WeightMode weight_mode_from_string(const std::string& s) {
    if (s == "normalized") return WeightMode::normalized;
    if (s == "physical") return WeightMode::physical;
    if (s == "custom") return WeightMode::custom;
    throw GraphError(GraphFault::bad_parameter, "unknown weight mode '" + s + "'");
}

struct EdgeRef {
    int to;
    double mu;
};

// Canonical undirected edge, u < v.
struct Edge {
    int u;
    int v;
    double mu;
};

/// Finite connected weighted graph G = (V, E, m, mu). Vertices are dense
/// indices 0..N-1 with an external string-label map; all invariants
/// (mu symmetric positive, m positive, no self-loops or duplicate edges,
/// connected) are enforced at construction. Immutable afterwards, so
/// concurrent reads are safe.
class WeightedGraph {
public:
    WeightedGraph(std::vector<std::string> labels,
                  std::vector<Edge> edge_list,
                  WeightMode mode,
                  std::vector<double> custom_m = {})
        : labels_(std::move(labels)), mode_(mode) {
        const int n = static_cast<int>(labels_.size());
        if (n == 0)
            throw GraphError(GraphFault::bad_parameter, "graph needs at least one vertex");
        index_.reserve(labels_.size());
        for (int i = 0; i < n; ++i) {
            if (!index_.emplace(labels_[i], i).second)
                throw GraphError(GraphFault::parse, "duplicate vertex id '" + labels_[i] + "'");
        }

        adj_.resize(labels_.size());
        std::unordered_set<std::uint64_t> seen;
        seen.reserve(edge_list.size());
        for (auto& e : edge_list) {
            if (e.u < 0 || e.u >= n || e.v < 0 || e.v >= n)
                throw GraphError(GraphFault::parse, "edge endpoint out of range");
            if (e.u == e.v)
                throw GraphError(GraphFault::self_loop,
                                 "self-loop at vertex '" + labels_[e.u] + "'");
            if (!(e.mu > 0.0) || !std::isfinite(e.mu))
                throw GraphError(GraphFault::nonpositive_weight,
                                 "edge {" + labels_[e.u] + "," + labels_[e.v] +
                                     "} has non-positive weight mu=" + std::to_string(e.mu));
            if (e.u > e.v) std::swap(e.u, e.v);
            const std::uint64_t key =
                (static_cast<std::uint64_t>(e.u) << 32) | static_cast<std::uint32_t>(e.v);
            if (!seen.insert(key).second)
                throw GraphError(GraphFault::duplicate_edge,
                                 "duplicate edge {" + labels_[e.u] + "," + labels_[e.v] + "}");
            adj_[e.u].push_back({e.v, e.mu});
            adj_[e.v].push_back({e.u, e.mu});
            edges_.push_back(e);
        }
        std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
            return std::pair(a.u, a.v) < std::pair(b.u, b.v);
        });
        for (auto& nb : adj_)
            std::sort(nb.begin(), nb.end(),
                      [](const EdgeRef& a, const EdgeRef& b) { return a.to < b.to; });

        mu_sum_.assign(labels_.size(), 0.0);
        for (int x = 0; x < n; ++x)
            for (const auto& e : adj_[x]) mu_sum_[x] += e.mu;

        switch (mode_) {
        case WeightMode::normalized:
            m_ = mu_sum_;
            break;
        case WeightMode::physical:
            m_.assign(labels_.size(), 1.0);
            break;
        case WeightMode::custom:
            if (custom_m.size() != labels_.size())
                throw GraphError(GraphFault::bad_parameter,
                                 "custom measure must supply one value per vertex");
            m_ = std::move(custom_m);
            break;
        }
        for (int x = 0; x < n; ++x) {
            if (!(m_[x] > 0.0) || !std::isfinite(m_[x]))
                throw GraphError(GraphFault::nonpositive_measure,
                                 "vertex '" + labels_[x] + "' has non-positive measure m=" +
                                     std::to_string(m_[x]));
        }

        require_connected();
    }

    int size() const { return static_cast<int>(labels_.size()); }
    std::size_t edge_count() const { return edges_.size(); }
    WeightMode mode() const { return mode_; }

    const std::vector<std::string>& labels() const { return labels_; }
    const std::string& label(int x) const { return labels_[static_cast<std::size_t>(x)]; }
    int index_of(const std::string& label) const {
        auto it = index_.find(label);
        if (it == index_.end())
            throw GraphError(GraphFault::unknown_vertex, "unknown vertex '" + label + "'");
        return it->second;
    }
    bool has_vertex(const std::string& label) const { return index_.count(label) != 0; }

    double measure(int x) const { return m_[static_cast<std::size_t>(x)]; }
    const std::vector<double>& measures() const { return m_; }
    const std::vector<EdgeRef>& neighbors(int x) const { return adj_[static_cast<std::size_t>(x)]; }
    const std::vector<Edge>& edges() const { return edges_; }

    /// Sum of incident edge weights at x.
    double edge_weight_sum(int x) const { return mu_sum_[static_cast<std::size_t>(x)]; }

    /// Deg(x) = (1/m(x)) sum_{y~x} mu_xy, the quantity whose supremum
    /// controls boundedness of the Laplacian on l^2(V,m).
    double weighted_degree(int x) const {
        return mu_sum_[static_cast<std::size_t>(x)] / m_[static_cast<std::size_t>(x)];
    }

private:
    void require_connected() const {
        std::vector<char> visited(labels_.size(), 0);
        std::queue<int> frontier;
        frontier.push(0);
        visited[0] = 1;
        std::size_t reached = 1;
        while (!frontier.empty()) {
            const int x = frontier.front();
            frontier.pop();
            for (const auto& e : adj_[static_cast<std::size_t>(x)]) {
                if (!visited[static_cast<std::size_t>(e.to)]) {
                    visited[static_cast<std::size_t>(e.to)] = 1;
                    ++reached;
                    frontier.push(e.to);
                }
            }
        }
        if (reached != labels_.size())
            throw GraphError(GraphFault::disconnected,
                             "graph is disconnected (" + std::to_string(reached) + " of " +
                                 std::to_string(labels_.size()) + " vertices reachable)");
    }

    std::vector<std::string> labels_;
    std::unordered_map<std::string, int> index_;
    std::vector<double> m_;
    std::vector<double> mu_sum_;
    std::vector<std::vector<EdgeRef>> adj_;
    std::vector<Edge> edges_;
    WeightMode mode_;
};

// ---------------------------------------------------------------------------
// Generator families
// ---------------------------------------------------------------------------

struct GeneratorSpec {
    enum class Family { path, cycle, torus, hypercube, complete, star, regular_tree };
    Family family;
    std::vector<long> params;
};

inline const char* to_string(GeneratorSpec::Family f) {
    switch (f) {
    case GeneratorSpec::Family::path: return "path";
    case GeneratorSpec::Family::cycle: return "cycle";
    case GeneratorSpec::Family::torus: return "torus";
    case GeneratorSpec::Family::hypercube: return "hypercube";
    case GeneratorSpec::Family::complete: return "complete";
    case GeneratorSpec::Family::star: return "star";
    case GeneratorSpec::Family::regular_tree: return "regular_tree";
    }
    return "?";
}

/// Parses "family:param1[:param2]" generator syntax, e.g. "torus:2:8".
inline GeneratorSpec parse_generator_spec(const std::string& text) {
    std::vector<std::string> parts;
    std::size_t begin = 0;
    while (begin <= text.size()) {
        const std::size_t colon = text.find(':', begin);
        if (colon == std::string::npos) {
            parts.push_back(text.substr(begin));
            break;
        }
        parts.push_back(text.substr(begin, colon - begin));
        begin = colon + 1;
    }
    if (parts.empty() || parts[0].empty())
        throw GraphError(GraphFault::bad_parameter, "empty generator spec");

    GeneratorSpec spec;
    const std::string& name = parts[0];
    if (name == "path") spec.family = GeneratorSpec::Family::path;
    else if (name == "cycle") spec.family = GeneratorSpec::Family::cycle;
    else if (name == "torus") spec.family = GeneratorSpec::Family::torus;
    else if (name == "hypercube") spec.family = GeneratorSpec::Family::hypercube;
    else if (name == "complete") spec.family = GeneratorSpec::Family::complete;
    else if (name == "star") spec.family = GeneratorSpec::Family::star;
    else if (name == "regular_tree" || name == "tree") spec.family = GeneratorSpec::Family::regular_tree;
    else
        throw GraphError(GraphFault::bad_parameter, "unknown generator family '" + name + "'");

    for (std::size_t i = 1; i < parts.size(); ++i) {
        try {
            std::size_t used = 0;
            const long value = std::stol(parts[i], &used);
            if (used != parts[i].size()) throw std::invalid_argument(parts[i]);
            spec.params.push_back(value);
        } catch (const std::exception&) {
            throw GraphError(GraphFault::bad_parameter,
                             "bad generator parameter '" + parts[i] + "' in '" + text + "'");
        }
    }
    return spec;
}

namespace detail {

inline std::vector<std::string> index_labels(long n) {
    std::vector<std::string> labels;
    labels.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) labels.push_back(std::to_string(i));
    return labels;
}

inline void require_params(const GeneratorSpec& spec, std::size_t count) {
    if (spec.params.size() != count)
        throw GraphError(GraphFault::bad_parameter,
                         std::string(to_string(spec.family)) + " expects " +
                             std::to_string(count) + " parameter(s)");
}

} // namespace detail

/// Builds a graph from one of the unit-weight generator families. Edge
/// weights are mu = 1 throughout; the vertex measure is set by `mode`
/// (`custom` is reserved for file input and rejected here).
inline WeightedGraph generate(const GeneratorSpec& spec, WeightMode mode) {
    using Family = GeneratorSpec::Family;
    if (mode == WeightMode::custom)
        throw GraphError(GraphFault::bad_parameter,
                         "generator families need --mode normalized or physical");

    std::vector<Edge> edges;
    long n = 0;
    switch (spec.family) {
    case Family::path: {
        detail::require_params(spec, 1);
        n = spec.params[0];
        if (n < 1) throw GraphError(GraphFault::bad_parameter, "path needs N >= 1");
        for (long i = 0; i + 1 < n; ++i)
            edges.push_back({static_cast<int>(i), static_cast<int>(i + 1), 1.0});
        break;
    }
    case Family::cycle: {
        detail::require_params(spec, 1);
        n = spec.params[0];
        if (n < 3) throw GraphError(GraphFault::bad_parameter, "cycle needs N >= 3");
        for (long i = 0; i < n; ++i)
            edges.push_back({static_cast<int>(i), static_cast<int>((i + 1) % n), 1.0});
        break;
    }
    case Family::torus: {
        detail::require_params(spec, 2);
        const long d = spec.params[0];
        const long side = spec.params[1];
        if (d < 1 || side < 3)
            throw GraphError(GraphFault::bad_parameter, "torus needs d >= 1 and N >= 3");
        n = 1;
        for (long k = 0; k < d; ++k) {
            if (n > 1'000'000 / side)
                throw GraphError(GraphFault::bad_parameter, "torus too large");
            n *= side;
        }
        // Vertex index in mixed radix: coordinate k has stride side^k.
        long stride = 1;
        for (long k = 0; k < d; ++k) {
            for (long v = 0; v < n; ++v) {
                const long coord = (v / stride) % side;
                const long w = v + ((coord + 1) % side - coord) * stride;
                edges.push_back({static_cast<int>(v), static_cast<int>(w), 1.0});
            }
            stride *= side;
        }
        break;
    }
    case Family::hypercube: {
        detail::require_params(spec, 1);
        const long d = spec.params[0];
        if (d < 1 || d > 20) throw GraphError(GraphFault::bad_parameter, "hypercube needs 1 <= d <= 20");
        n = 1L << d;
        for (long v = 0; v < n; ++v)
            for (long b = 0; b < d; ++b) {
                const long w = v ^ (1L << b);
                if (v < w) edges.push_back({static_cast<int>(v), static_cast<int>(w), 1.0});
            }
        break;
    }
    case Family::complete: {
        detail::require_params(spec, 1);
        n = spec.params[0];
        if (n < 1) throw GraphError(GraphFault::bad_parameter, "complete needs N >= 1");
        for (long u = 0; u < n; ++u)
            for (long v = u + 1; v < n; ++v)
                edges.push_back({static_cast<int>(u), static_cast<int>(v), 1.0});
        break;
    }
    case Family::star: {
        detail::require_params(spec, 1);
        const long leaves = spec.params[0];
        if (leaves < 1) throw GraphError(GraphFault::bad_parameter, "star needs N >= 1 leaves");
        n = leaves + 1;
        for (long v = 1; v <= leaves; ++v)
            edges.push_back({0, static_cast<int>(v), 1.0});
        break;
    }
    case Family::regular_tree: {
        detail::require_params(spec, 2);
        const long degree = spec.params[0];
        const long depth = spec.params[1];
        if (degree < 1 || depth < 0)
            throw GraphError(GraphFault::bad_parameter, "regular_tree needs degree >= 1, depth >= 0");
        if (degree < 2 && depth > 1)
            throw GraphError(GraphFault::bad_parameter, "regular_tree with degree 1 cannot exceed depth 1");
        n = 1;
        std::vector<long> level = {0};
        for (long ell = 0; ell < depth; ++ell) {
            std::vector<long> next;
            for (const long parent : level) {
                const long children = (ell == 0) ? degree : degree - 1;
                for (long c = 0; c < children; ++c) {
                    if (n > 2'000'000)
                        throw GraphError(GraphFault::bad_parameter, "regular_tree too large");
                    edges.push_back({static_cast<int>(parent), static_cast<int>(n), 1.0});
                    next.push_back(n);
                    ++n;
                }
            }
            level = std::move(next);
        }
        break;
    }
    }
    return WeightedGraph(detail::index_labels(n), std::move(edges), mode);
}

inline WeightedGraph generate(const std::string& spec_text, WeightMode mode) {
    return generate(parse_generator_spec(spec_text), mode);
}

// ---------------------------------------------------------------------------
// Combinatorial balls
// ---------------------------------------------------------------------------

/// B_r(center): center first, then each sphere S_1, ..., S_r sorted by
/// vertex index. Ordering is deterministic across calls.
struct Ball {
    int center = 0;
    int radius = 0;
    std::vector<int> members;
    std::vector<std::size_t> sphere_start; // size radius + 2; S_r spans [start[r], start[r+1])

    std::size_t sphere_size(int r) const {
        return sphere_start[static_cast<std::size_t>(r) + 1] - sphere_start[static_cast<std::size_t>(r)];
    }
};

inline Ball ball(const WeightedGraph& g, int center, int radius) {
    if (center < 0 || center >= g.size())
        throw GraphError(GraphFault::unknown_vertex, "ball center out of range");
    if (radius < 0)
        throw GraphError(GraphFault::bad_parameter, "ball radius must be >= 0");

    Ball b;
    b.center = center;
    b.radius = radius;
    b.members.push_back(center);
    b.sphere_start = {0, 1};

    std::vector<char> visited(static_cast<std::size_t>(g.size()), 0);
    visited[static_cast<std::size_t>(center)] = 1;
    std::vector<int> sphere = {center};
    for (int r = 1; r <= radius; ++r) {
        std::vector<int> next;
        for (const int x : sphere)
            for (const auto& e : g.neighbors(x))
                if (!visited[static_cast<std::size_t>(e.to)]) {
                    visited[static_cast<std::size_t>(e.to)] = 1;
                    next.push_back(e.to);
                }
        std::sort(next.begin(), next.end());
        b.members.insert(b.members.end(), next.begin(), next.end());
        b.sphere_start.push_back(b.members.size());
        sphere = std::move(next);
    }
    return b;
}

// ---------------------------------------------------------------------------
// Assumption (A) report
// ---------------------------------------------------------------------------

/// (A1): sup Deg < infinity, automatic on finite graphs; the bound is still
/// reported for truncation studies. (A2): inf m > 0 plus completeness; the
/// completeness certificate is produced constructively by build_cutoffs.
struct AssumptionReport {
    double a1_bound = 0.0;  // max_x Deg(x)
    double a2_inf_m = 0.0;  // min_x m(x)
    bool a1_holds = false;
    bool a2_holds = false;
};

inline AssumptionReport check_assumption_A(const WeightedGraph& g) {
    AssumptionReport report;
    report.a1_bound = 0.0;
    report.a2_inf_m = std::numeric_limits<double>::infinity();
    for (int x = 0; x < g.size(); ++x) {
        report.a1_bound = std::max(report.a1_bound, g.weighted_degree(x));
        report.a2_inf_m = std::min(report.a2_inf_m, g.measure(x));
    }
    report.a1_holds = std::isfinite(report.a1_bound);
    report.a2_holds = report.a2_inf_m > 0.0;
    return report;
}

} // namespace gcurv
