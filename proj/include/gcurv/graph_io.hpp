#pragma once

// Graph file formats.
//
// JSON: {"vertices":[{"id":"a","m":1.0},...],
//        "edges":[{"u":"a","v":"b","mu":1.0},...]}
// TSV:  one edge per line, `u v mu`, with the measure supplied by a
//       WeightMode (custom is not representable in TSV).
//
// save/load round-trips the JSON form exactly (labels, measure, edges).

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gcurv/graph.hpp"

namespace gcurv {

inline nlohmann::json graph_to_json(const WeightedGraph& g) {
    nlohmann::json vertices = nlohmann::json::array();
    for (int x = 0; x < g.size(); ++x)
        vertices.push_back({{"id", g.label(x)}, {"m", g.measure(x)}});
    nlohmann::json edges = nlohmann::json::array();
    for (const Edge& e : g.edges())
        edges.push_back({{"u", g.label(e.u)}, {"v", g.label(e.v)}, {"mu", e.mu}});
    return nlohmann::json{{"vertices", vertices}, {"edges", edges}};
}

/// Parses the JSON schema above. The file's measure is kept when mode is
/// custom; normalized/physical recompute m from the edge weights.
inline WeightedGraph graph_from_json(const nlohmann::json& doc,
                                     WeightMode mode = WeightMode::custom) {
    if (!doc.is_object() || !doc.contains("vertices") || !doc.contains("edges") ||
        !doc["vertices"].is_array() || !doc["edges"].is_array())
        throw GraphError(GraphFault::parse,
                         "graph JSON must be an object with 'vertices' and 'edges' arrays");

    std::vector<std::string> labels;
    std::vector<double> m;
    std::unordered_map<std::string, int> index;
    for (const auto& v : doc["vertices"]) {
        if (!v.is_object() || !v.contains("id") || !v["id"].is_string())
            throw GraphError(GraphFault::parse, "vertex entry needs a string 'id'");
        if (!v.contains("m") || !v["m"].is_number())
            throw GraphError(GraphFault::parse, "vertex entry needs a numeric 'm'");
        const std::string id = v["id"].get<std::string>();
        if (!index.emplace(id, static_cast<int>(labels.size())).second)
            throw GraphError(GraphFault::parse, "duplicate vertex id '" + id + "'");
        labels.push_back(id);
        m.push_back(v["m"].get<double>());
    }

    std::vector<Edge> edges;
    for (const auto& e : doc["edges"]) {
        if (!e.is_object() || !e.contains("u") || !e.contains("v") || !e.contains("mu") ||
            !e["u"].is_string() || !e["v"].is_string() || !e["mu"].is_number())
            throw GraphError(GraphFault::parse, "edge entry needs string 'u','v' and numeric 'mu'");
        const auto u = index.find(e["u"].get<std::string>());
        const auto v = index.find(e["v"].get<std::string>());
        if (u == index.end() || v == index.end())
            throw GraphError(GraphFault::unknown_vertex,
                             "edge references a vertex missing from 'vertices'");
        edges.push_back({u->second, v->second, e["mu"].get<double>()});
    }

    if (mode == WeightMode::custom)
        return WeightedGraph(std::move(labels), std::move(edges), WeightMode::custom, std::move(m));
    return WeightedGraph(std::move(labels), std::move(edges), mode);
}

/// Parses `u v mu` edge lines (whitespace separated; blank lines and lines
/// starting with '#' are skipped). Vertices are indexed in order of first
/// appearance. The measure comes from `mode`.
inline WeightedGraph graph_from_tsv(std::istream& in, WeightMode mode) {
    if (mode == WeightMode::custom)
        throw GraphError(GraphFault::bad_parameter,
                         "TSV edge lists carry no vertex measure; use --mode normalized or physical");

    std::vector<std::string> labels;
    std::unordered_map<std::string, int> index;
    auto intern = [&](const std::string& id) {
        auto [it, inserted] = index.emplace(id, static_cast<int>(labels.size()));
        if (inserted) labels.push_back(id);
        return it->second;
    };

    std::vector<Edge> edges;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream fields(line);
        std::string u, v, mu_text, extra;
        if (!(fields >> u)) continue; // blank line
        if (u[0] == '#') continue;
        if (!(fields >> v >> mu_text) || (fields >> extra))
            throw GraphError(GraphFault::parse,
                             "line " + std::to_string(line_no) + ": expected 'u v mu'");
        double mu = 0.0;
        try {
            std::size_t used = 0;
            mu = std::stod(mu_text, &used);
            if (used != mu_text.size()) throw std::invalid_argument(mu_text);
        } catch (const std::exception&) {
            throw GraphError(GraphFault::parse,
                             "line " + std::to_string(line_no) + ": bad weight '" + mu_text + "'");
        }
        edges.push_back({intern(u), intern(v), mu});
    }
    if (labels.empty())
        throw GraphError(GraphFault::parse, "edge list is empty");
    return WeightedGraph(std::move(labels), std::move(edges), mode);
}

inline bool ends_with(const std::string& text, const std::string& suffix) {
    return text.size() >= suffix.size() &&
           text.compare(text.size() - suffix.size(), suffix.size(), suffix) == 0;
}

/// Loads a graph file, dispatching on extension: .json uses the JSON schema,
/// anything else is read as a TSV edge list.
inline WeightedGraph load_graph(const std::string& path, WeightMode mode = WeightMode::custom) {
    std::ifstream in(path);
    if (!in)
        throw GraphError(GraphFault::parse, "cannot open '" + path + "'");
    if (ends_with(path, ".json")) {
        nlohmann::json doc;
        try {
            in >> doc;
        } catch (const nlohmann::json::exception& e) {
            throw GraphError(GraphFault::parse, "malformed JSON in '" + path + "': " + e.what());
        }
        return graph_from_json(doc, mode);
    }
    return graph_from_tsv(in, mode);
}

inline void save_graph(const WeightedGraph& g, const std::string& path) {
    std::ofstream out(path, std::ios::binary); // LF line endings on all platforms
    if (!out)
        throw GraphError(GraphFault::parse, "cannot write '" + path + "'");
    out << graph_to_json(g).dump(2) << "\n";
}

} // namespace gcurv
