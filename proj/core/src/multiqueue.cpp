#include "betamq/multiqueue.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <thread>

#include <nlohmann/json.hpp>

#include "betamq/detail/fenwick.hpp"
#include "betamq/errors.hpp"

namespace betamq {

const char* to_string(MqMode mode) {
    return mode == MqMode::kFineGrained ? "fine-grained" : "coarse-atomic";
}

MultiQueue::MultiQueue(std::size_t n, double beta, MqMode mode,
                       std::uint64_t seed)
    : queues_(n), mode_(mode), beta_(beta), seed_(seed) {
    if (n == 0) throw ParameterOutOfRange("MultiQueue: n must be positive");
    if (!(beta >= 0.0) || beta > 1.0) {
        throw ParameterOutOfRange("MultiQueue: beta must be in [0,1]");
    }
}

void MultiQueue::seed_queue(std::size_t queue, std::uint64_t key,
                            std::uint64_t payload) {
    if (queue >= queues_.size()) {
        throw ParameterOutOfRange("seed_queue: bad queue index");
    }
    if (key == kEmptyKey) throw ParameterOutOfRange("key 2^64-1 is reserved");
    std::lock_guard<std::mutex> guard(queues_[queue].gate);
    queues_[queue].heap.emplace(key, payload);
    ++queues_[queue].seq;
    queues_[queue].refresh_top();
}

std::size_t MultiQueue::size_estimate() const {
    std::size_t total = 0;
    for (const auto& q : queues_) total += q.heap.size();
    return total;
}

MultiQueue::Handle MultiQueue::make_handle(std::uint32_t thread_id) {
    return Handle(*this, thread_id,
                  Rng(seed_, "thread-" + std::to_string(thread_id)));
}

MultiQueue::Handle MultiQueue::make_handle_with_rng(Rng rng,
                                                    std::uint32_t thread_id) {
    return Handle(*this, thread_id, std::move(rng));
}

std::uint64_t MultiQueue::Handle::now_ns() {
    const auto now = static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(
            std::chrono::steady_clock::now().time_since_epoch())
            .count());
    // Strictly increasing per thread even on a coarse clock.
    last_ts_ = std::max(now, last_ts_ + 1);
    return last_ts_;
}

void MultiQueue::Handle::log_event(EventKind kind, std::uint64_t key,
                                   std::uint32_t queue, std::uint64_t seq) {
    if (!logging_) return;
    log_.push_back(LogRecord{kind, thread_id_, now_ns(), key, queue, seq});
}

void MultiQueue::Handle::insert(std::uint64_t key, std::uint64_t payload) {
    if (key == kEmptyKey) throw ParameterOutOfRange("key 2^64-1 is reserved");
    if (mq_->mode_ == MqMode::kCoarseAtomic) {
        std::lock_guard<std::mutex> global(mq_->global_gate_);
        const auto q = static_cast<std::size_t>(
            rng_.uniform_index(mq_->queues_.size()));
        auto& queue = mq_->queues_[q];
        std::lock_guard<std::mutex> guard(queue.gate);
        queue.heap.emplace(key, payload);
        const std::uint64_t seq = ++queue.seq;
        queue.refresh_top();
        log_event(EventKind::kInsert, key, static_cast<std::uint32_t>(q), seq);
        return;
    }
    while (true) {
        const auto q = static_cast<std::size_t>(
            rng_.uniform_index(mq_->queues_.size()));
        auto& queue = mq_->queues_[q];
        if (!queue.gate.try_lock()) continue;  // fresh random queue next round
        queue.heap.emplace(key, payload);
        const std::uint64_t seq = ++queue.seq;
        queue.refresh_top();
        queue.gate.unlock();
        log_event(EventKind::kInsert, key, static_cast<std::uint32_t>(q), seq);
        return;
    }
}

std::optional<MultiQueue::Item> MultiQueue::Handle::try_delete_min_from_pair(
    std::size_t a, std::size_t b) {
    auto& queues = mq_->queues_;
    if (a >= queues.size() || b >= queues.size()) {
        throw ParameterOutOfRange("try_delete_min_from_pair: bad index");
    }
    const std::uint64_t ka = queues[a].top_key.load(std::memory_order_acquire);
    const std::uint64_t kb = queues[b].top_key.load(std::memory_order_acquire);
    const std::size_t chosen = ka <= kb ? a : b;
    const std::uint64_t observed = std::min(ka, kb);
    if (observed == kEmptyKey) return std::nullopt;  // both looked empty
    auto& queue = queues[chosen];
    if (!queue.gate.try_lock()) return std::nullopt;
    if (queue.heap.empty() || queue.heap.top().first != observed) {
        queue.gate.unlock();  // top changed since the unlocked read
        return std::nullopt;
    }
    const Item item = queue.heap.top();
    queue.heap.pop();
    const std::uint64_t seq = ++queue.seq;
    queue.refresh_top();
    queue.gate.unlock();
    log_event(EventKind::kRemove, item.first,
              static_cast<std::uint32_t>(chosen), seq);
    return item;
}

bool MultiQueue::Handle::any_queue_nonempty() {
    // Empty is reported only after a full sweep finds every queue empty
    // under its gate; a non-empty queue aborts the sweep and the caller
    // restarts. Holds one gate at a time.
    for (auto& queue : mq_->queues_) {
        std::lock_guard<std::mutex> guard(queue.gate);
        if (!queue.heap.empty()) return true;
    }
    return false;
}

std::optional<MultiQueue::Item> MultiQueue::Handle::delete_min_fine() {
    while (true) {
        const RemovalChoice choice =
            draw_removal_choice(rng_, mq_->beta_, mq_->queues_.size());
        const std::size_t a = choice.first;
        const std::size_t b = choice.two_choice ? choice.second : choice.first;
        const std::uint64_t ka =
            mq_->queues_[a].top_key.load(std::memory_order_acquire);
        const std::uint64_t kb =
            mq_->queues_[b].top_key.load(std::memory_order_acquire);
        if (std::min(ka, kb) == kEmptyKey) {
            if (!any_queue_nonempty()) return std::nullopt;
            continue;  // something was resident after all
        }
        const std::size_t chosen = ka <= kb ? a : b;
        const std::uint64_t observed = std::min(ka, kb);
        auto& queue = mq_->queues_[chosen];
        if (!queue.gate.try_lock()) continue;  // restart the whole operation
        if (queue.heap.empty() || queue.heap.top().first != observed) {
            queue.gate.unlock();
            continue;
        }
        const Item item = queue.heap.top();
        queue.heap.pop();
        const std::uint64_t seq = ++queue.seq;
        queue.refresh_top();
        queue.gate.unlock();
        log_event(EventKind::kRemove, item.first,
                  static_cast<std::uint32_t>(chosen), seq);
        return item;
    }
}

std::optional<MultiQueue::Item> MultiQueue::Handle::delete_min_coarse() {
    while (true) {
        std::lock_guard<std::mutex> global(mq_->global_gate_);
        const RemovalChoice choice =
            draw_removal_choice(rng_, mq_->beta_, mq_->queues_.size());
        auto top_of = [&](std::size_t q) {
            return mq_->queues_[q].heap.empty() ? kEmptyKey
                                                : mq_->queues_[q].heap.top().first;
        };
        std::size_t chosen;
        if (choice.two_choice) {
            chosen = top_of(choice.first) <= top_of(choice.second) ? choice.first
                                                                   : choice.second;
        } else {
            chosen = choice.first;
        }
        auto& queue = mq_->queues_[chosen];
        {
            std::lock_guard<std::mutex> guard(queue.gate);
            if (!queue.heap.empty()) {
                const Item item = queue.heap.top();
                queue.heap.pop();
                const std::uint64_t seq = ++queue.seq;
                queue.refresh_top();
                log_event(EventKind::kRemove, item.first,
                          static_cast<std::uint32_t>(chosen), seq);
                return item;
            }
        }
        // Sampled queue was empty. Everything is quiescent under the global
        // gate, so a full sweep decides Empty; a resident key elsewhere means
        // restart with fresh draws.
        if (!any_queue_nonempty()) return std::nullopt;
    }
}

std::optional<MultiQueue::Item> MultiQueue::Handle::delete_min() {
    return mq_->mode_ == MqMode::kCoarseAtomic ? delete_min_coarse()
                                               : delete_min_fine();
}

RankErrorResult rank_error_postprocess(std::vector<LogRecord> log) {
    std::stable_sort(log.begin(), log.end(),
                     [](const LogRecord& a, const LogRecord& b) {
                         if (a.timestamp_ns != b.timestamp_ns) {
                             return a.timestamp_ns < b.timestamp_ns;
                         }
                         if (a.kind != b.kind) {
                             return a.kind == EventKind::kInsert;
                         }
                         return a.thread < b.thread;
                     });

    // Coordinate-compress keys; the rank metric needs distinct keys.
    std::vector<std::uint64_t> keys;
    keys.reserve(log.size());
    for (const auto& rec : log) {
        if (rec.kind == EventKind::kInsert) keys.push_back(rec.key);
    }
    std::sort(keys.begin(), keys.end());
    if (std::adjacent_find(keys.begin(), keys.end()) != keys.end()) {
        throw IncompleteLog("rank replay requires distinct keys");
    }
    auto position = [&](std::uint64_t key) -> std::size_t {
        const auto it = std::lower_bound(keys.begin(), keys.end(), key);
        if (it == keys.end() || *it != key) {
            throw IncompleteLog("removal of a key never inserted");
        }
        return static_cast<std::size_t>(it - keys.begin()) + 1;
    };

    detail::Fenwick present(keys.size());
    RankErrorResult result;
    std::size_t inserted = 0, removed = 0;
    for (const auto& rec : log) {
        const std::size_t pos = position(rec.key);
        if (rec.kind == EventKind::kInsert) {
            present.add(pos, +1);
            ++inserted;
        } else {
            if (present.at(pos) <= 0) {
                throw IncompleteLog("removal replayed before its insertion");
            }
            const std::int64_t rank = present.prefix(pos);
            present.add(pos, -1);
            result.series.push_back(rank);
            ++removed;
        }
    }
    if (present.total() != static_cast<std::int64_t>(inserted - removed)) {
        throw IncompleteLog("conservation failed on replay");
    }
    if (!result.series.empty()) {
        double sum = 0.0;
        for (std::int64_t r : result.series) {
            sum += static_cast<double>(r);
            result.max = std::max(result.max, r);
        }
        result.mean = sum / static_cast<double>(result.series.size());
    }
    return result;
}

std::string ThroughputReport::to_json() const {
    nlohmann::json j;
    j["threads"] = threads;
    j["duration_s"] = duration_s;
    j["prefill"] = prefill;
    j["mode"] = to_string(mode);
    j["beta"] = beta;
    j["ops_per_sec"] = ops_per_sec;
    j["trial_ops_per_sec"] = trial_ops_per_sec;
    j["per_thread_ops"] = per_thread_ops;
    j["empty_count"] = empty_count;
    j["valid"] = valid;
    j["trials"] = trials;
    return j.dump(2);
}

ThroughputReport throughput_benchmark(std::size_t n, double beta, MqMode mode,
                                      std::uint64_t seed, std::size_t threads,
                                      double duration_s, std::size_t prefill,
                                      std::size_t trials) {
    if (threads == 0) throw ParameterOutOfRange("threads must be >= 1");
    ThroughputReport report;
    report.threads = threads;
    report.duration_s = duration_s;
    report.prefill = prefill;
    report.mode = mode;
    report.beta = beta;
    report.trials = trials;

    std::atomic<std::uint64_t> empties{0};
    for (std::size_t trial = 0; trial < trials; ++trial) {
        MultiQueue mq(n, beta, mode, seed + trial);
        {
            auto filler = mq.make_handle(1000000);
            Rng key_rng(seed + trial, "prefill-keys");
            for (std::size_t k = 0; k < prefill; ++k) {
                filler.insert(key_rng.uniform_index(std::uint64_t{1} << 32), k);
            }
        }
        std::vector<std::uint64_t> ops(threads, 0);
        std::atomic<bool> go{false};
        std::vector<std::thread> workers;
        workers.reserve(threads);
        for (std::size_t tid = 0; tid < threads; ++tid) {
            workers.emplace_back([&, tid] {
                auto handle = mq.make_handle(static_cast<std::uint32_t>(tid));
                Rng key_rng(seed + trial, "keys-" + std::to_string(tid));
                while (!go.load(std::memory_order_acquire)) {
                    std::this_thread::yield();
                }
                const auto deadline =
                    std::chrono::steady_clock::now() +
                    std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                        std::chrono::duration<double>(duration_s));
                std::uint64_t local = 0;
                while (std::chrono::steady_clock::now() < deadline) {
                    handle.insert(key_rng.uniform_index(std::uint64_t{1} << 32),
                                  local);
                    ++local;
                    if (handle.delete_min().has_value()) {
                        ++local;
                    } else {
                        empties.fetch_add(1, std::memory_order_relaxed);
                    }
                }
                ops[tid] = local;
            });
        }
        go.store(true, std::memory_order_release);
        for (auto& w : workers) w.join();
        const double total = static_cast<double>(
            std::accumulate(ops.begin(), ops.end(), std::uint64_t{0}));
        report.trial_ops_per_sec.push_back(duration_s > 0.0 ? total / duration_s
                                                            : 0.0);
        if (trial + 1 == trials) report.per_thread_ops = ops;
    }
    report.empty_count = empties.load();
    report.valid = report.empty_count == 0;
    if (!report.trial_ops_per_sec.empty()) {
        double sum = 0.0;
        for (double v : report.trial_ops_per_sec) sum += v;
        report.ops_per_sec = sum / static_cast<double>(report.trial_ops_per_sec.size());
    }
    return report;
}

}  // namespace betamq
