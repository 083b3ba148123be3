#include <doctest.h>

#include <sstream>

#include "betamq/errors.hpp"
#include "betamq/graph.hpp"
#include "betamq/sssp.hpp"

using namespace betamq;

TEST_CASE("dimacs: minimal file") {
    std::istringstream in("c tiny\np sp 2 1\na 1 2 5\n");
    const auto g = load_dimacs_stream(in);
    CHECK(g.vertex_count() == 2);
    CHECK(g.edge_count() == 1);
    const auto [begin, end] = g.out_edges(1);
    REQUIRE(end - begin == 1);
    CHECK(begin->to == 2);
    CHECK(begin->weight == 5);
}

TEST_CASE("dimacs: malformed inputs") {
    std::istringstream no_p("a 1 2 5\n");
    CHECK_THROWS_AS(load_dimacs_stream(no_p), ParseError);

    std::istringstream only_comments("c nothing else\n");
    CHECK_THROWS_AS(load_dimacs_stream(only_comments), ParseError);

    std::istringstream mismatch("p sp 2 2\na 1 2 5\n");
    CHECK_THROWS_AS(load_dimacs_stream(mismatch), CountMismatch);

    std::istringstream negative("p sp 2 1\na 1 2 -5\n");
    CHECK_THROWS_AS(load_dimacs_stream(negative), NegativeWeight);

    std::istringstream bad_tag("p sp 2 1\nz 1 2 5\n");
    CHECK_THROWS_AS(load_dimacs_stream(bad_tag), ParseError);

    std::istringstream out_of_range("p sp 2 1\na 1 5 3\n");
    CHECK_THROWS_AS(load_dimacs_stream(out_of_range), ParseError);

    CHECK_THROWS_AS(load_dimacs("/nonexistent/path.gr"), ParseError);
}

TEST_CASE("dimacs: serialization round trip") {
    const auto g = make_random_graph(50, 300, 100, 17);
    std::istringstream in(g.to_dimacs());
    const auto h = load_dimacs_stream(in);
    CHECK(h.vertex_count() == g.vertex_count());
    CHECK(h.edge_count() == g.edge_count());
    for (std::uint32_t v = 1; v <= 50; ++v) {
        const auto [gb, ge] = g.out_edges(v);
        const auto [hb, he] = h.out_edges(v);
        REQUIRE(ge - gb == he - hb);
        for (auto *p = gb, *q = hb; p != ge; ++p, ++q) {
            CHECK(p->to == q->to);
            CHECK(p->weight == q->weight);
        }
    }
}

TEST_CASE("sssp: path graph hand computation") {
    const auto g = Graph::from_edge_list(3, {{1, 2, 1}, {2, 3, 2}});
    const auto ref = sssp_reference(g, 1);
    CHECK(ref.dist[1] == 0);
    CHECK(ref.dist[2] == 1);
    CHECK(ref.dist[3] == 3);

    const auto relaxed =
        sssp_multiqueue(g, 1, 1, 4, 1.0, MqMode::kFineGrained, 7);
    CHECK(relaxed.dist == ref.dist);
}

TEST_CASE("sssp: unreachable vertices stay unreachable") {
    const auto g = Graph::from_edge_list(4, {{1, 2, 3}});
    const auto ref = sssp_reference(g, 1);
    CHECK(ref.dist[3] == kUnreachable);
    CHECK(ref.dist[4] == kUnreachable);
    const auto relaxed =
        sssp_multiqueue(g, 1, 2, 4, 0.5, MqMode::kFineGrained, 8);
    CHECK(relaxed.dist == ref.dist);
}

TEST_CASE("sssp: relaxed distances equal the reference on random graphs") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto g = make_random_graph(500, 2500, 1000, seed);
        const auto ref = sssp_reference(g, 1);
        for (double beta : {1.0, 0.5}) {
            for (std::size_t threads : {std::size_t{1}, std::size_t{4}}) {
                const auto relaxed = sssp_multiqueue(g, 1, threads, 8, beta,
                                                     MqMode::kFineGrained, seed);
                CHECK(relaxed.dist == ref.dist);
                CHECK(relaxed.pops >= relaxed.stale_pops);
            }
        }
    }
}

TEST_CASE("sssp: negative weights rejected at construction") {
    CHECK_THROWS_AS(Graph::from_edge_list(2, {{1, 2, -1}}), NegativeWeight);
}

TEST_CASE("random graph: respects simple-digraph constraints") {
    const auto g = make_random_graph(20, 100, 50, 5);
    CHECK(g.vertex_count() == 20);
    CHECK(g.edge_count() == 100);
    CHECK_THROWS_AS(make_random_graph(3, 100, 10, 5), ParseError);
}
