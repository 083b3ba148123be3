#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "betamq/exponential.hpp"
#include "betamq/process.hpp"

namespace betamq {

/// Exponential potentials of the normalized top-weight deviations at one
/// step: x_j = w_j/n, mu = mean(x), y = sorted(x - mu),
/// phi = sum exp(alpha*y), psi = sum exp(-alpha*y), gamma_pot = phi + psi.
struct PotentialSnapshot {
    std::uint64_t t = 0;
    std::vector<double> x;  // bin order
    double mu = 0.0;
    std::vector<double> y;  // ascending
    double phi = 0.0;
    double psi = 0.0;
    double gamma_pot = 0.0;
    double gap = 0.0;  // w_max - w_min, unnormalized
};

PotentialSnapshot snapshot(std::span<const double> top_weights, double alpha,
                           std::uint64_t t = 0);
PotentialSnapshot snapshot(const ExponentialState& state, double alpha,
                           std::uint64_t t = 0);

struct TrajectoryResult {
    std::vector<PotentialSnapshot> series;  // includes t = 0
    double c_est = 0.0;             // mean gamma_pot/n over second-half samples
    double c_est_first_half = 0.0;  // same over the first half
    bool valid = true;
};

/// Prefixed exponential run: multinomial bin occupancies from the insert
/// stream, M labels, T (1+beta) removals, a snapshot every sample_every
/// steps. EmptyBin marks the result invalid and truncates the series.
TrajectoryResult potential_trajectory(const ProcessConfig& config, std::size_t M,
                                      std::size_t T, std::size_t sample_every);

/// Monte-Carlo estimate of E[gamma_pot(t+1) - gamma_pot(t) | state] under the
/// config's removal rule, from k one-step continuations of the frozen tops.
struct DriftEstimate {
    double mean = 0.0;
    double half_width_99 = 0.0;
    std::size_t k = 0;
};
DriftEstimate drift_estimate(std::span<const double> top_weights,
                             const ProcessConfig& config, std::size_t k,
                             Rng& rng);

/// Top-weight vectors sampled from a run whenever gamma_pot/n exceeds
/// `threshold`, at least `spacing` removals apart, up to max_states.
std::vector<std::vector<double>> harvest_states(const ProcessConfig& config,
                                                std::size_t M, std::size_t T,
                                                double threshold,
                                                std::size_t spacing,
                                                std::size_t max_states);

/// Counts of bins whose top weight deviates from the unnormalized mean by at
/// least (s + a) * n, per grid value s; bound carries n*exp(-alpha*s).
struct StripeReport {
    double a = 0.0;
    std::vector<double> s_grid;
    std::vector<std::size_t> b_gt;
    std::vector<std::size_t> b_lt;
    std::vector<double> bound;
};
StripeReport stripe_counts(std::span<const double> top_weights, double alpha,
                           double a, std::span<const double> s_grid);

/// Number of live labels of one bin with value in [lo, hi].
struct IntervalCount {
    std::size_t bin = 0;
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 0;
};
IntervalCount interval_count(const ExponentialState& state, std::size_t bin,
                             double lo, double hi);

/// One aggregated metric of a scaling experiment.
struct ExperimentRow {
    std::size_t n = 0;
    double beta = 0.0;
    std::string metric;
    double mean = 0.0;
    double stderr_mean = 0.0;
    std::size_t seeds = 0;
};

struct ScalingTable {
    std::vector<ExperimentRow> rows;
};

/// Coupled rank-and-weight runs, T = t_factor * n^2 removals per (n, seed),
/// second half only. Emits, per n: mean removed-rank / n
/// ("mean_rank_over_n"), mean over sampled steps of max top-rank / (n ln n)
/// ("max_top_rank_over_nlogn") and of (w_max - w_min) / (n ln n)
/// ("gap_over_nlogn"), and mean gamma_pot/n ("gamma_over_n").
ScalingTable scaling_experiment(std::span<const std::size_t> n_list, double beta,
                                std::size_t t_factor, std::size_t seeds,
                                std::uint64_t base_seed);

/// scaling_experiment filtered to the weight-gap and max-rank metrics.
ScalingTable gap_scaling_experiment(std::span<const std::size_t> n_list,
                                    double beta, std::size_t t_factor,
                                    std::size_t seeds, std::uint64_t base_seed);

/// scaling_experiment filtered to the mean removed-rank metric.
ScalingTable average_rank_experiment(std::span<const std::size_t> n_list,
                                     double beta, std::size_t t_factor,
                                     std::size_t seeds, std::uint64_t base_seed);

}  // namespace betamq
