#include "betamq/graph.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <tuple>
#include <unordered_set>

#include "betamq/errors.hpp"
#include "betamq/rng.hpp"

namespace betamq {

Graph Graph::from_edge_list(
    std::size_t vertex_count,
    const std::vector<std::tuple<std::uint32_t, std::uint32_t, std::int64_t>>&
        edges) {
    Graph g;
    g.vertex_count_ = vertex_count;
    std::vector<std::size_t> degree(vertex_count + 2, 0);
    for (const auto& [u, v, w] : edges) {
        if (u < 1 || u > vertex_count || v < 1 || v > vertex_count) {
            throw ParseError("edge endpoint outside [1, V]");
        }
        if (w < 0) throw NegativeWeight("edge weight must be nonnegative");
        if (w > static_cast<std::int64_t>(~std::uint32_t{0})) {
            throw ParseError("edge weight exceeds 32 bits");
        }
        ++degree[u];
    }
    g.offsets_.assign(vertex_count + 2, 0);
    for (std::size_t v = 1; v <= vertex_count; ++v) {
        g.offsets_[v + 1] = g.offsets_[v] + degree[v];
    }
    g.edges_.resize(edges.size());
    std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end());
    for (const auto& [u, v, w] : edges) {
        g.edges_[cursor[u]++] = Edge{v, static_cast<std::uint32_t>(w)};
    }
    return g;
}

std::pair<const Graph::Edge*, const Graph::Edge*> Graph::out_edges(
    std::uint32_t v) const {
    if (v < 1 || v > vertex_count_) throw ParseError("vertex id outside [1, V]");
    const Edge* base = edges_.data();
    return {base + offsets_[v], base + offsets_[v + 1]};
}

std::string Graph::to_dimacs() const {
    std::ostringstream out;
    out << "c generated graph\n";
    out << "p sp " << vertex_count_ << ' ' << edges_.size() << '\n';
    for (std::size_t v = 1; v <= vertex_count_; ++v) {
        for (std::size_t k = offsets_[v]; k < offsets_[v + 1]; ++k) {
            out << "a " << v << ' ' << edges_[k].to << ' ' << edges_[k].weight
                << '\n';
        }
    }
    return out.str();
}

Graph load_dimacs_stream(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    bool have_problem = false;
    std::size_t vertex_count = 0, edge_count = 0;
    std::vector<std::tuple<std::uint32_t, std::uint32_t, std::int64_t>> edges;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == 'c') continue;
        std::istringstream fields(line);
        char tag = 0;
        fields >> tag;
        if (tag == 'p') {
            std::string kind;
            if (!(fields >> kind >> vertex_count >> edge_count) || kind != "sp") {
                throw ParseError("line " + std::to_string(line_no) +
                                 ": malformed problem line");
            }
            if (have_problem) {
                throw ParseError("line " + std::to_string(line_no) +
                                 ": duplicate problem line");
            }
            have_problem = true;
            edges.reserve(edge_count);
        } else if (tag == 'a') {
            if (!have_problem) {
                throw ParseError("line " + std::to_string(line_no) +
                                 ": arc before problem line");
            }
            std::int64_t u = 0, v = 0, w = 0;
            if (!(fields >> u >> v >> w)) {
                throw ParseError("line " + std::to_string(line_no) +
                                 ": malformed arc line");
            }
            if (w < 0) {
                throw NegativeWeight("line " + std::to_string(line_no) +
                                     ": negative arc weight");
            }
            if (u < 1 || v < 1) {
                throw ParseError("line " + std::to_string(line_no) +
                                 ": vertex ids must be >= 1");
            }
            edges.emplace_back(static_cast<std::uint32_t>(u),
                               static_cast<std::uint32_t>(v), w);
        } else {
            throw ParseError("line " + std::to_string(line_no) +
                             ": unknown line tag '" + std::string(1, tag) + "'");
        }
    }
    if (!have_problem) throw ParseError("missing problem line (p sp V E)");
    if (edges.size() != edge_count) {
        throw CountMismatch("arc count " + std::to_string(edges.size()) +
                            " != declared E = " + std::to_string(edge_count));
    }
    return Graph::from_edge_list(vertex_count, edges);
}

Graph load_dimacs(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open graph file: " + path);
    return load_dimacs_stream(in);
}

Graph make_random_graph(std::size_t vertex_count, std::size_t edge_count,
                        std::uint32_t max_weight, std::uint64_t seed) {
    if (vertex_count < 2) throw ParseError("random graph needs >= 2 vertices");
    const std::size_t max_edges = vertex_count * (vertex_count - 1);
    if (edge_count > max_edges) {
        throw ParseError("too many edges for a simple digraph");
    }
    Rng rng(seed, "random-graph");
    std::unordered_set<std::uint64_t> used;
    used.reserve(edge_count * 2);
    std::vector<std::tuple<std::uint32_t, std::uint32_t, std::int64_t>> edges;
    edges.reserve(edge_count);
    while (edges.size() < edge_count) {
        const auto u =
            static_cast<std::uint32_t>(rng.uniform_index(vertex_count)) + 1;
        const auto v =
            static_cast<std::uint32_t>(rng.uniform_index(vertex_count)) + 1;
        if (u == v) continue;
        const std::uint64_t code =
            static_cast<std::uint64_t>(u) << 32 | static_cast<std::uint64_t>(v);
        if (!used.insert(code).second) continue;
        const auto w = static_cast<std::int64_t>(rng.uniform_index(max_weight)) + 1;
        edges.emplace_back(u, v, w);
    }
    return Graph::from_edge_list(vertex_count, edges);
}

}  // namespace betamq
