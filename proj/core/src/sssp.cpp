#include "betamq/sssp.hpp"

#include <atomic>
#include <queue>
#include <thread>

#include "betamq/errors.hpp"

namespace betamq {

namespace {

void check_source(const Graph& graph, std::uint32_t source) {
    if (source < 1 || source > graph.vertex_count()) {
        throw ParseError("source vertex outside [1, V]");
    }
}

}  // namespace

SsspResult sssp_reference(const Graph& graph, std::uint32_t source) {
    check_source(graph, source);
    SsspResult result;
    result.dist.assign(graph.vertex_count() + 1, kUnreachable);
    result.dist[source] = 0;
    using Entry = std::pair<std::uint64_t, std::uint32_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    heap.emplace(0, source);
    while (!heap.empty()) {
        const auto [d, v] = heap.top();
        heap.pop();
        ++result.pops;
        if (d > result.dist[v]) {
            ++result.stale_pops;
            continue;
        }
        const auto [begin, end] = graph.out_edges(v);
        for (const auto* e = begin; e != end; ++e) {
            ++result.relaxations;
            const std::uint64_t nd = d + e->weight;
            if (nd < result.dist[e->to]) {
                result.dist[e->to] = nd;
                heap.emplace(nd, e->to);
            }
        }
    }
    return result;
}

SsspResult sssp_multiqueue(const Graph& graph, std::uint32_t source,
                           std::size_t threads, std::size_t queue_count,
                           double beta, MqMode mode, std::uint64_t seed) {
    check_source(graph, source);
    if (threads == 0) throw ParameterOutOfRange("sssp: threads must be >= 1");
    if (queue_count == 0) queue_count = std::max<std::size_t>(2, 2 * threads);

    std::vector<std::atomic<std::uint64_t>> dist(graph.vertex_count() + 1);
    for (auto& d : dist) d.store(kUnreachable, std::memory_order_relaxed);
    dist[source].store(0, std::memory_order_relaxed);

    MultiQueue mq(queue_count, beta, mode, seed);
    // Items not yet fully processed: incremented before an insert becomes
    // visible, decremented when the popped item's relaxations are done.
    // pending == 0 with an empty queue means no further work can appear.
    std::atomic<std::uint64_t> pending{1};
    {
        auto seeder = mq.make_handle(~0u);
        seeder.insert(0, source);
    }

    std::atomic<std::uint64_t> pops{0}, stale{0}, relax{0};
    auto worker = [&](std::uint32_t tid) {
        auto handle = mq.make_handle(tid);
        std::uint64_t local_pops = 0, local_stale = 0, local_relax = 0;
        unsigned backoff = 1;
        while (true) {
            const auto item = handle.delete_min();
            if (!item.has_value()) {
                if (pending.load(std::memory_order_acquire) == 0) break;
                for (unsigned k = 0; k < backoff; ++k) std::this_thread::yield();
                backoff = std::min(backoff * 2, 1024u);
                continue;
            }
            backoff = 1;
            ++local_pops;
            const std::uint64_t d = item->first;
            const auto v = static_cast<std::uint32_t>(item->second);
            if (d > dist[v].load(std::memory_order_acquire)) {
                ++local_stale;
                pending.fetch_sub(1, std::memory_order_acq_rel);
                continue;
            }
            const auto [begin, end] = graph.out_edges(v);
            for (const auto* e = begin; e != end; ++e) {
                ++local_relax;
                const std::uint64_t nd = d + e->weight;
                std::uint64_t old = dist[e->to].load(std::memory_order_acquire);
                bool improved = false;
                while (nd < old) {
                    if (dist[e->to].compare_exchange_weak(
                            old, nd, std::memory_order_acq_rel)) {
                        improved = true;
                        break;
                    }
                }
                if (improved) {
                    pending.fetch_add(1, std::memory_order_acq_rel);
                    handle.insert(nd, e->to);
                }
            }
            pending.fetch_sub(1, std::memory_order_acq_rel);
        }
        pops.fetch_add(local_pops);
        stale.fetch_add(local_stale);
        relax.fetch_add(local_relax);
    };

    if (threads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back(worker, static_cast<std::uint32_t>(t));
        }
        for (auto& t : pool) t.join();
    }

    SsspResult result;
    result.dist.resize(dist.size());
    for (std::size_t v = 0; v < dist.size(); ++v) {
        result.dist[v] = dist[v].load(std::memory_order_relaxed);
    }
    result.pops = pops.load();
    result.stale_pops = stale.load();
    result.relaxations = relax.load();
    return result;
}

}  // namespace betamq
