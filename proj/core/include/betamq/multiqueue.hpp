#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>
#include <optional>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "betamq/process.hpp"
#include "betamq/rng.hpp"

namespace betamq {

enum class MqMode { kFineGrained, kCoarseAtomic };

const char* to_string(MqMode mode);

enum class EventKind { kInsert, kRemove };

struct LogRecord {
    EventKind kind = EventKind::kInsert;
    std::uint32_t thread = 0;
    std::uint64_t timestamp_ns = 0;
    std::uint64_t key = 0;
    std::uint32_t queue = 0;
    std::uint64_t queue_seq = 0;  // order under the queue's gate
};

/// n lock-protected binary min-heaps with randomized insertion and
/// two-choice-with-probability-beta removal.
///
/// Fine-grained mode reads the published top keys without holding gates,
/// locks the winning queue with a try-acquire and revalidates the observed
/// top under the gate; any failure restarts the whole operation. The
/// coarse-atomic mode serializes the sample-compare-pop triple under one
/// global gate, which makes the removal stream distributionally equivalent
/// to the sequential process.
///
/// Fine-grained mode is NOT claimed distributionally linearizable: a thread
/// parked while holding a gate blocks removals from that queue while other
/// threads complete arbitrarily many operations, which skews the removal
/// distribution in a way no retry scheme repairs. Only the coarse-atomic
/// mode carries the distributional guarantee.
class MultiQueue {
   public:
    static constexpr std::uint64_t kEmptyKey = ~std::uint64_t{0};

    using Item = std::pair<std::uint64_t, std::uint64_t>;  // key, payload

    MultiQueue(std::size_t n, double beta, MqMode mode, std::uint64_t seed);

    MultiQueue(const MultiQueue&) = delete;
    MultiQueue& operator=(const MultiQueue&) = delete;

    std::size_t queue_count() const { return queues_.size(); }
    MqMode mode() const { return mode_; }
    double beta() const { return beta_; }

    /// Single-threaded setup helper: places a key into a chosen queue
    /// (used to mirror a simulator state exactly).
    void seed_queue(std::size_t queue, std::uint64_t key, std::uint64_t payload);

    /// Total keys currently resident (exact only at quiescence).
    std::size_t size_estimate() const;

    class Handle {
       public:
        void insert(std::uint64_t key, std::uint64_t payload);
        std::optional<Item> delete_min();

        /// One fine-grained two-choice attempt over an explicit index pair;
        /// nullopt when the try-acquire or the top revalidation fails, or
        /// when both sampled tops are empty.
        std::optional<Item> try_delete_min_from_pair(std::size_t a, std::size_t b);

        void set_logging(bool on) { logging_ = on; }
        std::vector<LogRecord> take_log() { return std::move(log_); }
        std::uint32_t thread_id() const { return thread_id_; }

       private:
        friend class MultiQueue;
        Handle(MultiQueue& mq, std::uint32_t thread_id, Rng rng)
            : mq_(&mq), thread_id_(thread_id), rng_(std::move(rng)) {}

        std::optional<Item> delete_min_fine();
        std::optional<Item> delete_min_coarse();
        bool any_queue_nonempty();
        void log_event(EventKind kind, std::uint64_t key, std::uint32_t queue,
                       std::uint64_t seq);
        std::uint64_t now_ns();

        MultiQueue* mq_;
        std::uint32_t thread_id_;
        Rng rng_;
        bool logging_ = false;
        std::uint64_t last_ts_ = 0;
        std::vector<LogRecord> log_;
    };

    /// Per-thread handle; its stream is (seed, "thread-<id>").
    Handle make_handle(std::uint32_t thread_id);
    /// Handle with a caller-supplied stream (coupling against a simulator).
    Handle make_handle_with_rng(Rng rng, std::uint32_t thread_id = 0);

   private:
    struct alignas(64) Queue {
        std::mutex gate;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
        std::atomic<std::uint64_t> top_key{kEmptyKey};
        std::uint64_t seq = 0;

        void refresh_top() {
            top_key.store(heap.empty() ? kEmptyKey : heap.top().first,
                          std::memory_order_release);
        }
    };

    std::vector<Queue> queues_;
    std::mutex global_gate_;
    MqMode mode_;
    double beta_;
    std::uint64_t seed_;
};

/// Per-removal rank errors of a merged operation log, replayed in timestamp
/// order: at each removal the error is 1 + the number of smaller keys
/// inserted earlier (in log order) and not yet removed. Throws IncompleteLog
/// when the replay sees a removal of a key that is not present.
struct RankErrorResult {
    std::vector<std::int64_t> series;
    double mean = 0.0;
    std::int64_t max = 0;
};
RankErrorResult rank_error_postprocess(std::vector<LogRecord> log);

struct ThroughputReport {
    std::size_t threads = 0;
    double duration_s = 0.0;
    std::size_t prefill = 0;
    MqMode mode = MqMode::kFineGrained;
    double beta = 1.0;
    double ops_per_sec = 0.0;  // mean over trials
    std::vector<double> trial_ops_per_sec;
    std::vector<std::uint64_t> per_thread_ops;  // last trial
    std::uint64_t empty_count = 0;
    bool valid = true;  // false when Empty was observed
    std::size_t trials = 0;
    std::string to_json() const;
};

/// Alternating insert / delete_min per thread for `duration_s` wall-clock
/// seconds after a prefill, averaged over `trials`. Empty observations
/// invalidate the run and are counted.
ThroughputReport throughput_benchmark(std::size_t n, double beta, MqMode mode,
                                      std::uint64_t seed, std::size_t threads,
                                      double duration_s, std::size_t prefill,
                                      std::size_t trials);

}  // namespace betamq
