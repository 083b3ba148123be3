#pragma once

#include <cstdint>
#include <vector>

#include "betamq/graph.hpp"
#include "betamq/multiqueue.hpp"

namespace betamq {

constexpr std::uint64_t kUnreachable = ~std::uint64_t{0};

struct SsspResult {
    std::vector<std::uint64_t> dist;  // index 0 unused; kUnreachable if not reached
    std::uint64_t pops = 0;
    std::uint64_t stale_pops = 0;  // discarded: popped distance already beaten
    std::uint64_t relaxations = 0;
};

/// Exact baseline: binary-heap Dijkstra with lazy deletion.
SsspResult sssp_reference(const Graph& graph, std::uint32_t source);

/// Relaxed-queue Dijkstra on the MultiQueue: stale pops are discarded,
/// improved neighbors reinserted, so the distances match the reference
/// exactly for any beta; priority inversions only cost extra work. Threads
/// terminate when the queue is empty and no pop is still being processed.
SsspResult sssp_multiqueue(const Graph& graph, std::uint32_t source,
                           std::size_t threads, std::size_t queue_count,
                           double beta, MqMode mode, std::uint64_t seed);

}  // namespace betamq
