#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <vector>

namespace betamq {

/// Directed weighted graph, vertex ids 1..V, nonnegative 32-bit weights,
/// CSR adjacency.
class Graph {
   public:
    struct Edge {
        std::uint32_t to = 0;
        std::uint32_t weight = 0;
    };

    Graph() = default;

    /// Edges as (from, to, weight); weight < 0 throws NegativeWeight,
    /// out-of-range ids throw ParseError.
    static Graph from_edge_list(
        std::size_t vertex_count,
        const std::vector<std::tuple<std::uint32_t, std::uint32_t, std::int64_t>>&
            edges);

    std::size_t vertex_count() const { return vertex_count_; }
    std::size_t edge_count() const { return edges_.size(); }

    /// Out-edges of vertex v (1-based).
    std::pair<const Edge*, const Edge*> out_edges(std::uint32_t v) const;

    std::string to_dimacs() const;

   private:
    std::size_t vertex_count_ = 0;
    std::vector<std::size_t> offsets_;  // size vertex_count_ + 2, slot 0 unused
    std::vector<Edge> edges_;
};

/// 9th-DIMACS shortest-path format: `c` comments, one `p sp V E` line,
/// `a u v w` arcs. Throws ParseError (with line number) on malformed input
/// and CountMismatch when the arc count differs from E.
Graph load_dimacs(const std::string& path);
Graph load_dimacs_stream(std::istream& in);

/// Uniform random multigraph-free digraph for benchmarks: `edge_count`
/// distinct (u, v) pairs, weights uniform in [1, max_weight].
Graph make_random_graph(std::size_t vertex_count, std::size_t edge_count,
                        std::uint32_t max_weight, std::uint64_t seed);

}  // namespace betamq
