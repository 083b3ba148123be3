#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "betamq/detail/fenwick.hpp"
#include "betamq/process.hpp"
#include "betamq/rng.hpp"

namespace betamq {

enum class ChoiceKind { kSingle, kTwoChoice };

const char* to_string(ChoiceKind kind);

/// One removal event. rank is the removed label's position among all labels
/// present at removal time (the global minimum has rank 1).
struct RankRecord {
    std::uint64_t step = 0;
    std::size_t queue = 0;
    std::int64_t label = 0;
    std::int64_t rank = 0;
    ChoiceKind choice_kind = ChoiceKind::kTwoChoice;
};

/// The n labelled FIFO queues plus an order-statistics index over present
/// labels, so rank queries are O(log max_label) instead of a rescan.
class SystemState {
   public:
    explicit SystemState(std::size_t n, std::size_t capacity_hint = 0);

    /// Builds a state from explicit per-queue label sequences (used by the
    /// rank coupling). Sequences must be strictly increasing front-to-back
    /// and globally distinct.
    static SystemState from_queues(std::vector<std::vector<std::int64_t>> queues);

    std::size_t queue_count() const { return queues_.size(); }
    std::size_t present_count() const { return present_count_; }
    std::uint64_t step() const { return step_; }
    std::int64_t max_label_inserted() const { return max_label_; }

    bool queue_empty(std::size_t q) const { return heads_[q] >= queues_[q].size(); }
    std::int64_t top(std::size_t q) const;

    bool contains(std::int64_t label) const;
    std::int64_t rank_of(std::int64_t label) const;

    /// Max over non-empty queues of rank_of(top); throws EmptyQueueTouched
    /// when every queue is empty.
    std::int64_t max_top_rank() const;

    /// Appends label to queue q. Labels must arrive in strictly increasing
    /// order across the whole state.
    void insert_into(std::size_t q, std::int64_t label);

    /// Live labels of queue q, top first.
    std::vector<std::int64_t> queue_contents(std::size_t q) const;

    friend RankRecord apply_single(SystemState& state, std::size_t q);
    friend RankRecord apply_two_choice(SystemState& state, std::size_t i,
                                       std::size_t j);

   private:
    std::int64_t pop(std::size_t q);

    std::vector<std::vector<std::int64_t>> queues_;
    std::vector<std::size_t> heads_;
    detail::Fenwick present_;
    std::int64_t max_label_ = 0;
    std::size_t present_count_ = 0;
    std::uint64_t step_ = 0;
};

/// Appends `label` to a queue drawn from pi.
void insert_random(SystemState& state, std::int64_t label,
                   const std::vector<double>& pi, Rng& rng);

/// Removal with an explicit queue choice (single) or index pair (two-choice).
/// The two-choice form pops the smaller top of the two sampled queues.
/// Both throw EmptyQueueTouched when a sampled queue is empty.
RankRecord apply_single(SystemState& state, std::size_t q);
RankRecord apply_two_choice(SystemState& state, std::size_t i, std::size_t j);

RankRecord remove_two_choice(SystemState& state, Rng& rng);
RankRecord remove_one_beta(SystemState& state, double beta, Rng& rng);

struct TraceResult {
    std::vector<RankRecord> records;
    SystemState state;
    bool valid = true;
    std::size_t insert_count = 0;
    std::size_t removal_count = 0;
    std::uint64_t wallclock_ns = 0;
};

/// Prefill slack that keeps EmptyQueueTouched unobserved at desk scale
/// for two-choice runs: 4 * n * ceil(log2 n) + 32 * n.
std::size_t default_prefill_buffer(std::size_t n);

/// Insert count M for a run of `removals` removals: the default buffer,
/// plus a sqrt(T n log n) term for beta = 0 (the single-choice top spread
/// grows at that rate).
std::size_t recommended_prefill(std::size_t n, double beta,
                                std::size_t removals);

/// Inserts labels 1..M (insert stream), then T removals (remove stream).
/// On EmptyQueueTouched the partial trace is returned with valid = false.
TraceResult run_prefixed_trace(const ProcessConfig& config, std::size_t M,
                               std::size_t T);

/// Runs two-choice removals on round-robin-filled queues and, with the same
/// index pairs, the classic two-choice insertion into n virtual bins
/// (less-loaded of the pair, ties to the lower id). The removed-from queue
/// must equal the chosen bin at every step; a disagreement throws
/// CouplingBroken. Returns true on success.
bool round_robin_reduction_check(std::size_t n, std::size_t T, Rng& rng);

struct RoundRobinStep {
    std::size_t removed_queue = 0;
    std::size_t virtual_bin = 0;
};

/// Explicit-pair variant for hand-traced cases; prefills labels 1..M
/// round-robin and replays the given index pairs.
std::vector<RoundRobinStep> round_robin_steps(
    std::size_t n, std::size_t prefill,
    std::span<const std::pair<std::size_t, std::size_t>> pairs);

struct CheckpointSeries {
    std::vector<std::uint64_t> checkpoints;
    std::vector<std::int64_t> max_top_rank;
};

/// Runs the process of `config` (any beta; beta = 0 is the single-choice
/// variant) and records max_top_rank at each checkpoint step.
CheckpointSeries single_choice_trace(const ProcessConfig& config,
                                     std::vector<std::uint64_t> checkpoints);

/// Mean of max_top_rank per checkpoint over `reps` independent seeds
/// (seed, seed+1, ...).
std::vector<double> mean_max_rank_at_checkpoints(
    const ProcessConfig& base, std::vector<std::uint64_t> checkpoints,
    std::size_t reps);

}  // namespace betamq
