#include "betamq/sequential.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "betamq/errors.hpp"

namespace betamq {

const char* to_string(ChoiceKind kind) {
    return kind == ChoiceKind::kSingle ? "single" : "two-choice";
}

SystemState::SystemState(std::size_t n, std::size_t capacity_hint)
    : queues_(n), heads_(n, 0) {
    if (n == 0) throw ParameterOutOfRange("SystemState: n must be positive");
    if (capacity_hint > 0) present_.ensure_capacity(capacity_hint);
}

SystemState SystemState::from_queues(
    std::vector<std::vector<std::int64_t>> queues) {
    SystemState state(queues.size());
    // Merge-insert in global label order so the monotonicity invariant is
    // checked by the same path as live insertions.
    std::vector<std::pair<std::int64_t, std::size_t>> all;
    for (std::size_t q = 0; q < queues.size(); ++q) {
        std::int64_t prev = 0;
        bool first = true;
        for (std::int64_t label : queues[q]) {
            if (!first && label <= prev) {
                throw NonMonotoneLabel("from_queues: queue not strictly increasing");
            }
            prev = label;
            first = false;
            all.emplace_back(label, q);
        }
    }
    std::sort(all.begin(), all.end());
    for (std::size_t k = 0; k + 1 < all.size(); ++k) {
        if (all[k].first == all[k + 1].first) {
            throw DuplicateLabel("from_queues: duplicate label");
        }
    }
    for (const auto& [label, q] : all) state.insert_into(q, label);
    return state;
}

std::int64_t SystemState::top(std::size_t q) const {
    if (q >= queues_.size()) throw ParameterOutOfRange("top: bad queue index");
    if (queue_empty(q)) throw EmptyQueueTouched("top of empty queue");
    return queues_[q][heads_[q]];
}

bool SystemState::contains(std::int64_t label) const {
    if (label < 1 || static_cast<std::size_t>(label) > present_.capacity()) {
        return false;
    }
    return present_.at(static_cast<std::size_t>(label)) > 0;
}

std::int64_t SystemState::rank_of(std::int64_t label) const {
    if (!contains(label)) throw LabelAbsent("rank_of: label not present");
    return present_.prefix(static_cast<std::size_t>(label));
}

std::int64_t SystemState::max_top_rank() const {
    std::int64_t best = -1;
    for (std::size_t q = 0; q < queues_.size(); ++q) {
        if (queue_empty(q)) continue;
        best = std::max(best, rank_of(queues_[q][heads_[q]]));
    }
    if (best < 0) throw EmptyQueueTouched("max_top_rank: all queues empty");
    return best;
}

void SystemState::insert_into(std::size_t q, std::int64_t label) {
    if (q >= queues_.size()) {
        throw ParameterOutOfRange("insert_into: bad queue index");
    }
    if (label <= max_label_) {
        throw NonMonotoneLabel("insert: label not greater than previous maximum");
    }
    if (label < 1) throw ParameterOutOfRange("insert: labels start at 1");
    queues_[q].push_back(label);
    present_.ensure_capacity(static_cast<std::size_t>(label));
    present_.add(static_cast<std::size_t>(label), +1);
    max_label_ = label;
    ++present_count_;
}

std::vector<std::int64_t> SystemState::queue_contents(std::size_t q) const {
    if (q >= queues_.size()) {
        throw ParameterOutOfRange("queue_contents: bad queue index");
    }
    return {queues_[q].begin() + static_cast<std::ptrdiff_t>(heads_[q]),
            queues_[q].end()};
}

std::int64_t SystemState::pop(std::size_t q) {
    const std::int64_t label = queues_[q][heads_[q]++];
    present_.add(static_cast<std::size_t>(label), -1);
    --present_count_;
    return label;
}

void insert_random(SystemState& state, std::int64_t label,
                   const std::vector<double>& pi, Rng& rng) {
    if (pi.size() != state.queue_count()) {
        throw ParameterOutOfRange("insert_random: pi length != queue count");
    }
    state.insert_into(draw_insertion_queue(rng, pi), label);
}

RankRecord apply_single(SystemState& state, std::size_t q) {
    if (q >= state.queue_count()) {
        throw ParameterOutOfRange("apply_single: bad queue index");
    }
    if (state.queue_empty(q)) {
        throw EmptyQueueTouched("removal sampled an empty queue");
    }
    RankRecord rec;
    rec.queue = q;
    rec.label = state.queues_[q][state.heads_[q]];
    rec.rank = state.rank_of(rec.label);
    rec.choice_kind = ChoiceKind::kSingle;
    state.pop(q);
    rec.step = ++state.step_;
    return rec;
}

RankRecord apply_two_choice(SystemState& state, std::size_t i, std::size_t j) {
    if (i >= state.queue_count() || j >= state.queue_count()) {
        throw ParameterOutOfRange("apply_two_choice: bad queue index");
    }
    if (state.queue_empty(i) || state.queue_empty(j)) {
        throw EmptyQueueTouched("removal sampled an empty queue");
    }
    const std::int64_t ti = state.queues_[i][state.heads_[i]];
    const std::int64_t tj = state.queues_[j][state.heads_[j]];
    const std::size_t chosen = ti <= tj ? i : j;  // labels distinct, no real tie
    RankRecord rec;
    rec.queue = chosen;
    rec.label = std::min(ti, tj);
    rec.rank = state.rank_of(rec.label);
    rec.choice_kind = ChoiceKind::kTwoChoice;
    state.pop(chosen);
    rec.step = ++state.step_;
    return rec;
}

RankRecord remove_two_choice(SystemState& state, Rng& rng) {
    const auto i = static_cast<std::size_t>(rng.uniform_index(state.queue_count()));
    const auto j = static_cast<std::size_t>(rng.uniform_index(state.queue_count()));
    return apply_two_choice(state, i, j);
}

RankRecord remove_one_beta(SystemState& state, double beta, Rng& rng) {
    const RemovalChoice choice = draw_removal_choice(rng, beta, state.queue_count());
    if (choice.two_choice) {
        return apply_two_choice(state, choice.first, choice.second);
    }
    return apply_single(state, choice.first);
}

std::size_t default_prefill_buffer(std::size_t n) {
    // 4n log2(n) alone is not enough headroom: near the end of a run the
    // remaining pool per queue is buffer/n +- multinomial noise +- the
    // two-choice top spread, and small n empties a queue. The 32n term keeps
    // the per-queue remainder well above both at desk scale.
    const auto log2n = static_cast<std::size_t>(
        std::ceil(std::log2(static_cast<double>(std::max<std::size_t>(n, 2)))));
    return 4 * n * log2n + 32 * n;
}

std::size_t recommended_prefill(std::size_t n, double beta,
                                std::size_t removals) {
    std::size_t buffer = default_prefill_buffer(n);
    if (beta == 0.0) {
        // Single-choice top spread grows like sqrt(t n log n); the buffer
        // has to track it or the run stops being prefixed.
        const double dn = static_cast<double>(n);
        const double dt = static_cast<double>(removals);
        buffer += static_cast<std::size_t>(
            std::ceil(4.0 * std::sqrt(dt * dn * std::max(1.0, std::log(dn)))));
    }
    return removals + buffer;
}

TraceResult run_prefixed_trace(const ProcessConfig& config, std::size_t M,
                               std::size_t T) {
    const auto start = std::chrono::steady_clock::now();
    TraceResult result{.records = {},
                       .state = SystemState(config.n, M),
                       .valid = true,
                       .insert_count = M,
                       .removal_count = T};
    Rng insert_rng = config.stream("insert");
    for (std::size_t label = 1; label <= M; ++label) {
        insert_random(result.state, static_cast<std::int64_t>(label), config.pi,
                      insert_rng);
    }
    Rng remove_rng = config.stream("remove");
    result.records.reserve(T);
    try {
        for (std::size_t t = 0; t < T; ++t) {
            result.records.push_back(
                remove_one_beta(result.state, config.beta, remove_rng));
        }
    } catch (const EmptyQueueTouched&) {
        result.valid = false;
    }
    result.wallclock_ns = static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(
            std::chrono::steady_clock::now() - start)
            .count());
    return result;
}

namespace {

SystemState round_robin_state(std::size_t n, std::size_t prefill) {
    // Label t goes to bin (t-1) mod n, so bin b's top after l removals is
    // b+1+n*l and the lower bin id always holds the smaller top at equal
    // loads, matching the virtual-bin tie-break below.
    SystemState state(n, prefill);
    for (std::size_t t = 1; t <= prefill; ++t) {
        state.insert_into((t - 1) % n, static_cast<std::int64_t>(t));
    }
    return state;
}

RoundRobinStep coupled_step(SystemState& state, std::vector<std::size_t>& loads,
                            std::size_t i, std::size_t j) {
    const RankRecord rec = apply_two_choice(state, i, j);
    std::size_t bin;
    if (loads[i] < loads[j]) {
        bin = i;
    } else if (loads[j] < loads[i]) {
        bin = j;
    } else {
        bin = std::min(i, j);
    }
    ++loads[bin];
    return {rec.queue, bin};
}

}  // namespace

bool round_robin_reduction_check(std::size_t n, std::size_t T, Rng& rng) {
    SystemState state = round_robin_state(n, T + default_prefill_buffer(n));
    std::vector<std::size_t> loads(n, 0);
    std::vector<std::size_t> removals(n, 0);
    for (std::size_t t = 0; t < T; ++t) {
        const auto i = static_cast<std::size_t>(rng.uniform_index(n));
        const auto j = static_cast<std::size_t>(rng.uniform_index(n));
        const RoundRobinStep step = coupled_step(state, loads, i, j);
        if (step.removed_queue != step.virtual_bin) {
            throw CouplingBroken("round-robin reduction disagrees at step " +
                                 std::to_string(t + 1));
        }
        ++removals[step.removed_queue];
    }
    if (removals != loads) {
        throw CouplingBroken("round-robin reduction: final counts disagree");
    }
    return true;
}

std::vector<RoundRobinStep> round_robin_steps(
    std::size_t n, std::size_t prefill,
    std::span<const std::pair<std::size_t, std::size_t>> pairs) {
    SystemState state = round_robin_state(n, prefill);
    std::vector<std::size_t> loads(n, 0);
    std::vector<RoundRobinStep> steps;
    steps.reserve(pairs.size());
    for (const auto& [i, j] : pairs) {
        steps.push_back(coupled_step(state, loads, i, j));
    }
    return steps;
}

CheckpointSeries single_choice_trace(const ProcessConfig& config,
                                     std::vector<std::uint64_t> checkpoints) {
    std::sort(checkpoints.begin(), checkpoints.end());
    checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()),
                      checkpoints.end());
    const std::uint64_t horizon = checkpoints.empty() ? 0 : checkpoints.back();
    const std::size_t M = recommended_prefill(
        config.n, config.beta, static_cast<std::size_t>(horizon));
    TraceResult run{.records = {},
                    .state = SystemState(config.n, M),
                    .valid = true};
    Rng insert_rng = config.stream("insert");
    for (std::size_t label = 1; label <= M; ++label) {
        insert_random(run.state, static_cast<std::int64_t>(label), config.pi,
                      insert_rng);
    }
    Rng remove_rng = config.stream("remove");
    CheckpointSeries series;
    series.checkpoints = checkpoints;
    std::size_t next = 0;
    for (std::uint64_t t = 0; t <= horizon && next < checkpoints.size(); ++t) {
        if (t == checkpoints[next]) {
            series.max_top_rank.push_back(run.state.max_top_rank());
            ++next;
            if (next == checkpoints.size()) break;
        }
        remove_one_beta(run.state, config.beta, remove_rng);
    }
    return series;
}

std::vector<double> mean_max_rank_at_checkpoints(
    const ProcessConfig& base, std::vector<std::uint64_t> checkpoints,
    std::size_t reps) {
    std::vector<double> sums(checkpoints.size(), 0.0);
    for (std::size_t r = 0; r < reps; ++r) {
        ProcessConfig cfg = base;
        cfg.seed = base.seed + r;
        const CheckpointSeries series = single_choice_trace(cfg, checkpoints);
        for (std::size_t k = 0; k < series.max_top_rank.size(); ++k) {
            sums[k] += static_cast<double>(series.max_top_rank[k]);
        }
    }
    for (double& s : sums) s /= static_cast<double>(reps);
    return sums;
}

}  // namespace betamq
