#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "betamq/process.hpp"
#include "betamq/rng.hpp"

namespace betamq {

/// Continuous-label state: bin j holds successive partial sums of i.i.d.
/// Exp(rate pi_j) increments (mean 1/pi_j), strictly increasing within a bin.
class ExponentialState {
   public:
    explicit ExponentialState(std::vector<std::vector<double>> bins);

    std::size_t bin_count() const { return bins_.size(); }
    bool bin_empty(std::size_t j) const { return heads_[j] >= bins_[j].size(); }
    std::size_t remaining(std::size_t j) const { return bins_[j].size() - heads_[j]; }
    std::size_t total_remaining() const;

    double top(std::size_t j) const;  // throws EmptyBin
    double pop(std::size_t j);        // throws EmptyBin

    /// Current top weight of every bin; throws EmptyBin if any bin is empty.
    std::vector<double> top_weights() const;

    /// All labels of bin j (including already-popped ones), in order.
    const std::vector<double>& bin_labels(std::size_t j) const { return bins_[j]; }
    std::size_t head(std::size_t j) const { return heads_[j]; }

   private:
    std::vector<std::vector<double>> bins_;
    std::vector<std::size_t> heads_;
};

/// Bin j receives the first counts[j] partial sums of Exp(rate pi[j]).
ExponentialState generate_exponential_labels(const std::vector<double>& pi,
                                             const std::vector<std::size_t>& counts,
                                             Rng& rng);

/// The first `labels` arrivals of the superposed per-bin processes: bin j
/// keeps its arrivals among the `labels` globally smallest. Per-bin counts
/// are multinomial(labels, pi) by thinning, and every bin's range is cut at
/// the same global value, which is what keeps long runs prefixed. Fixing
/// counts first and generating independently instead misaligns the ranges
/// by ~sqrt(labels*n) and starves low-count bins near the end.
/// Bin streams are (seed, "<tag>-bin-<j>").
ExponentialState generate_superposed_labels(const std::vector<double>& pi,
                                            std::size_t labels,
                                            std::uint64_t seed,
                                            const std::string& tag = "labels");

/// Global ranks of all labels (ascending sort); ranks[j] is bin j's label
/// ranks in bin order, strictly increasing. Ranks cover exactly 1..M.
struct RankAssignment {
    std::vector<std::vector<std::int64_t>> ranks;
    std::size_t total = 0;
};
RankAssignment assign_ranks(const ExponentialState& state);

struct ProbeResult {
    std::string name;
    double statistic = 0.0;
    double p_value = 1.0;
    double threshold = 0.0;  // acceptance band for band-type probes
    bool pass = true;
};

/// Statistical check that after insertion the label of any fixed rank lands
/// in bin j with probability pi_j, independently across ranks: per-rank
/// chi-square marginals plus pairwise chi-square independence probes over R
/// repetitions, Holm-corrected at `significance`. The adversarial flag
/// replaces the sampler with a deterministic round-robin placement (a power
/// check: the report must fail).
struct EquivalenceReport {
    std::vector<ProbeResult> marginal_probes;
    std::vector<ProbeResult> independence_probes;
    bool aggregate_pass = false;
    std::string to_json() const;
};
EquivalenceReport rank_placement_test(const std::vector<double>& pi,
                                      std::size_t labels, std::size_t reps,
                                      double significance, std::uint64_t seed,
                                      bool adversarial_round_robin = false);

/// Builds the rank-labelled integer state from assign_ranks and the
/// real-labelled state, runs T removals on both with identical Bernoulli and
/// index draws, and asserts bin choice and rank cost agree at every step.
/// Throws CouplingBroken on any disagreement. Returns true.
bool coupled_cost_identity_check(const ProcessConfig& config, std::size_t M,
                                 std::size_t T);

/// Memorylessness product identity on a (s,t) grid, Poisson interval counts
/// of the partial sums, and the exponential MGF identity at rate/2.
struct MemorylessReport {
    std::vector<ProbeResult> probes;
    bool all_pass = true;
    std::string to_json() const;
};
MemorylessReport memorylessness_and_poisson_checks(double rate, double horizon,
                                                   Rng& rng);

}  // namespace betamq
