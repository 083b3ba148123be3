#include "betamq/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "betamq/detail/fenwick.hpp"
#include "betamq/errors.hpp"
#include "betamq/sequential.hpp"
#include "betamq/stats.hpp"

namespace betamq {

PotentialSnapshot snapshot(std::span<const double> top_weights, double alpha,
                           std::uint64_t t) {
    const std::size_t n = top_weights.size();
    if (n == 0) throw EmptyBin("snapshot: no bins");
    PotentialSnapshot snap;
    snap.t = t;
    snap.x.resize(n);
    const double dn = static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) snap.x[j] = top_weights[j] / dn;
    snap.mu = std::accumulate(snap.x.begin(), snap.x.end(), 0.0) / dn;
    snap.y.resize(n);
    for (std::size_t j = 0; j < n; ++j) snap.y[j] = snap.x[j] - snap.mu;
    std::sort(snap.y.begin(), snap.y.end());
    for (double yj : snap.y) {
        snap.phi += std::exp(alpha * yj);
        snap.psi += std::exp(-alpha * yj);
    }
    snap.gamma_pot = snap.phi + snap.psi;
    const auto [min_it, max_it] =
        std::minmax_element(top_weights.begin(), top_weights.end());
    snap.gap = *max_it - *min_it;
    return snap;
}

PotentialSnapshot snapshot(const ExponentialState& state, double alpha,
                           std::uint64_t t) {
    return snapshot(state.top_weights(), alpha, t);
}

namespace {

/// Picks the removal bin: smaller top weight of the sampled pair, or the
/// single sampled bin. Throws EmptyBin via top() when a sampled bin is empty.
std::size_t choose_bin(const ExponentialState& state, const RemovalChoice& choice) {
    if (!choice.two_choice) {
        if (state.bin_empty(choice.first)) {
            throw EmptyBin("removal sampled an empty bin");
        }
        return choice.first;
    }
    const double a = state.top(choice.first);
    const double b = state.top(choice.second);
    return a <= b ? choice.first : choice.second;
}

}  // namespace

TrajectoryResult potential_trajectory(const ProcessConfig& config, std::size_t M,
                                      std::size_t T, std::size_t sample_every) {
    if (sample_every == 0) {
        throw ParameterOutOfRange("potential_trajectory: sample_every must be > 0");
    }
    ExponentialState state =
        generate_superposed_labels(config.pi, M, config.seed);

    TrajectoryResult result;
    result.series.push_back(snapshot(state, config.alpha, 0));
    Rng remove_rng = config.stream("remove");
    try {
        for (std::size_t t = 1; t <= T; ++t) {
            const RemovalChoice choice =
                draw_removal_choice(remove_rng, config.beta, config.n);
            state.pop(choose_bin(state, choice));
            if (t % sample_every == 0) {
                result.series.push_back(snapshot(state, config.alpha, t));
            }
        }
    } catch (const EmptyBin&) {
        result.valid = false;
    }

    const double dn = static_cast<double>(config.n);
    double first = 0.0, second = 0.0;
    std::size_t first_count = 0, second_count = 0;
    for (const auto& snap : result.series) {
        if (snap.t * 2 < T) {
            first += snap.gamma_pot / dn;
            ++first_count;
        } else {
            second += snap.gamma_pot / dn;
            ++second_count;
        }
    }
    result.c_est_first_half = first_count > 0 ? first / static_cast<double>(first_count) : 0.0;
    result.c_est = second_count > 0 ? second / static_cast<double>(second_count) : 0.0;
    return result;
}

DriftEstimate drift_estimate(std::span<const double> top_weights,
                             const ProcessConfig& config, std::size_t k,
                             Rng& rng) {
    if (k < 10000) {
        throw ParameterOutOfRange("drift_estimate: k must be >= 10^4");
    }
    const std::size_t n = top_weights.size();
    if (n != config.n) throw ParameterOutOfRange("drift_estimate: size mismatch");
    const double dn = static_cast<double>(n);
    std::vector<double> x(n);
    for (std::size_t j = 0; j < n; ++j) x[j] = top_weights[j] / dn;
    const double mu = std::accumulate(x.begin(), x.end(), 0.0) / dn;
    double gamma0 = 0.0;
    for (double xj : x) {
        gamma0 += std::exp(config.alpha * (xj - mu)) +
                  std::exp(-config.alpha * (xj - mu));
    }

    // Rank the bins once so the two-choice comparison is a table lookup.
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t trial = 0; trial < k; ++trial) {
        const RemovalChoice choice = draw_removal_choice(rng, config.beta, n);
        std::size_t bin;
        if (choice.two_choice) {
            bin = top_weights[choice.first] <= top_weights[choice.second]
                      ? choice.first
                      : choice.second;
        } else {
            bin = choice.first;
        }
        const double kappa_x = rng.exponential(config.pi[bin]) / dn;
        const double mu_new = mu + kappa_x / dn;
        double gamma1 = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double xj = j == bin ? x[j] + kappa_x : x[j];
            gamma1 += std::exp(config.alpha * (xj - mu_new)) +
                      std::exp(-config.alpha * (xj - mu_new));
        }
        const double d = gamma1 - gamma0;
        sum += d;
        sum_sq += d * d;
    }
    DriftEstimate est;
    est.k = k;
    const double dk = static_cast<double>(k);
    est.mean = sum / dk;
    const double var = std::max(0.0, (sum_sq - dk * est.mean * est.mean) / (dk - 1.0));
    est.half_width_99 = stats::normal_quantile(0.995) * std::sqrt(var / dk);
    return est;
}

std::vector<std::vector<double>> harvest_states(const ProcessConfig& config,
                                                std::size_t M, std::size_t T,
                                                double threshold,
                                                std::size_t spacing,
                                                std::size_t max_states) {
    ExponentialState state =
        generate_superposed_labels(config.pi, M, config.seed);

    std::vector<std::vector<double>> harvested;
    Rng remove_rng = config.stream("remove");
    const double dn = static_cast<double>(config.n);
    std::size_t last_harvest = 0;
    bool have_harvest = false;
    try {
        for (std::size_t t = 1; t <= T && harvested.size() < max_states; ++t) {
            const RemovalChoice choice =
                draw_removal_choice(remove_rng, config.beta, config.n);
            state.pop(choose_bin(state, choice));
            if (have_harvest && t - last_harvest < spacing) continue;
            const auto tops = state.top_weights();
            const PotentialSnapshot snap = snapshot(tops, config.alpha, t);
            if (snap.gamma_pot / dn > threshold) {
                harvested.push_back(tops);
                last_harvest = t;
                have_harvest = true;
            }
        }
    } catch (const EmptyBin&) {
        // Truncated harvest; callers check the count.
    }
    return harvested;
}

StripeReport stripe_counts(std::span<const double> top_weights, double alpha,
                           double a, std::span<const double> s_grid) {
    if (a < 0.0) throw ParameterOutOfRange("stripe_counts: A must be >= 0");
    const std::size_t n = top_weights.size();
    const double dn = static_cast<double>(n);
    const double w_bar =
        std::accumulate(top_weights.begin(), top_weights.end(), 0.0) / dn;
    StripeReport report;
    report.a = a;
    report.s_grid.assign(s_grid.begin(), s_grid.end());
    for (double s : s_grid) {
        const double offset = (s + a) * dn;
        std::size_t gt = 0, lt = 0;
        for (double w : top_weights) {
            if (w >= w_bar + offset) ++gt;
            if (w <= w_bar - offset) ++lt;
        }
        report.b_gt.push_back(gt);
        report.b_lt.push_back(lt);
        report.bound.push_back(dn * std::exp(-alpha * s));
    }
    return report;
}

IntervalCount interval_count(const ExponentialState& state, std::size_t bin,
                             double lo, double hi) {
    if (bin >= state.bin_count()) {
        throw ParameterOutOfRange("interval_count: bad bin");
    }
    const auto& labels = state.bin_labels(bin);
    const auto begin = labels.begin() + static_cast<std::ptrdiff_t>(state.head(bin));
    const auto from = std::lower_bound(begin, labels.end(), lo);
    const auto to = std::upper_bound(begin, labels.end(), hi);
    return IntervalCount{bin, lo, hi,
                         static_cast<std::size_t>(std::distance(from, to))};
}

namespace {

struct CoupledRunStats {
    double mean_rank = 0.0;
    double mean_max_top_rank = 0.0;
    double mean_gap = 0.0;
    double mean_gamma = 0.0;
};

CoupledRunStats run_coupled(const ProcessConfig& config, std::size_t T,
                            std::size_t sample_count) {
    const std::size_t n = config.n;
    const std::size_t M = recommended_prefill(n, config.beta, T);

    ExponentialState state =
        generate_superposed_labels(config.pi, M, config.seed);
    const RankAssignment assignment = assign_ranks(state);

    detail::Fenwick present(M);
    for (std::size_t pos = 1; pos <= M; ++pos) present.add(pos, +1);
    std::vector<std::size_t> next_index(n, 0);

    const std::size_t half = T / 2;
    const std::size_t sample_every = std::max<std::size_t>(1, (T - half) / sample_count);

    Rng remove_rng = config.stream("remove");
    double rank_sum = 0.0;
    std::size_t rank_count = 0;
    double max_rank_sum = 0.0, gap_sum = 0.0, gamma_sum = 0.0;
    std::size_t sample_hits = 0;
    for (std::size_t t = 1; t <= T; ++t) {
        const RemovalChoice choice =
            draw_removal_choice(remove_rng, config.beta, config.n);
        const std::size_t bin = choose_bin(state, choice);
        const auto pos = static_cast<std::size_t>(assignment.ranks[bin][next_index[bin]]);
        ++next_index[bin];
        const std::int64_t rank = present.prefix(pos);
        present.add(pos, -1);
        state.pop(bin);

        if (t <= half) continue;
        rank_sum += static_cast<double>(rank);
        ++rank_count;
        if ((t - half) % sample_every == 0) {
            // Max top-rank and weight gap from the same coupled view.
            std::int64_t max_rank = 0;
            double w_min = std::numeric_limits<double>::infinity();
            double w_max = -w_min;
            for (std::size_t j = 0; j < n; ++j) {
                if (state.bin_empty(j)) throw EmptyBin("coupled run: empty bin");
                const auto top_pos =
                    static_cast<std::size_t>(assignment.ranks[j][next_index[j]]);
                max_rank = std::max(max_rank, present.prefix(top_pos));
                const double w = state.top(j);
                w_min = std::min(w_min, w);
                w_max = std::max(w_max, w);
            }
            max_rank_sum += static_cast<double>(max_rank);
            gap_sum += w_max - w_min;
            gamma_sum += snapshot(state, config.alpha, t).gamma_pot /
                         static_cast<double>(n);
            ++sample_hits;
        }
    }

    CoupledRunStats out;
    out.mean_rank = rank_sum / static_cast<double>(rank_count);
    out.mean_max_top_rank = max_rank_sum / static_cast<double>(sample_hits);
    out.mean_gap = gap_sum / static_cast<double>(sample_hits);
    out.mean_gamma = gamma_sum / static_cast<double>(sample_hits);
    return out;
}

void push_metric(ScalingTable& table, std::size_t n, double beta,
                 const std::string& metric, std::vector<double> values) {
    ExperimentRow row;
    row.n = n;
    row.beta = beta;
    row.metric = metric;
    row.mean = stats::mean(values);
    row.stderr_mean = values.size() > 1 ? stats::stderr_of_mean(values) : 0.0;
    row.seeds = values.size();
    table.rows.push_back(std::move(row));
}

}  // namespace

ScalingTable scaling_experiment(std::span<const std::size_t> n_list, double beta,
                                std::size_t t_factor, std::size_t seeds,
                                std::uint64_t base_seed) {
    ScalingTable table;
    for (std::size_t n : n_list) {
        std::vector<double> v_rank, v_max, v_gap, v_gamma;
        const double log_n = std::log(static_cast<double>(n));
        for (std::size_t s = 0; s < seeds; ++s) {
            ProcessConfig cfg = ProcessConfig::uniform(n, beta, base_seed + s);
            const CoupledRunStats run = run_coupled(cfg, t_factor * n * n, 500);
            const double dn = static_cast<double>(n);
            v_rank.push_back(run.mean_rank / dn);
            v_max.push_back(run.mean_max_top_rank / (dn * log_n));
            v_gap.push_back(run.mean_gap / (dn * log_n));
            v_gamma.push_back(run.mean_gamma);
        }
        push_metric(table, n, beta, "mean_rank_over_n", std::move(v_rank));
        push_metric(table, n, beta, "max_top_rank_over_nlogn", std::move(v_max));
        push_metric(table, n, beta, "gap_over_nlogn", std::move(v_gap));
        push_metric(table, n, beta, "gamma_over_n", std::move(v_gamma));
    }
    return table;
}

namespace {

ScalingTable filter_metrics(ScalingTable table,
                            std::span<const std::string> keep) {
    ScalingTable out;
    for (auto& row : table.rows) {
        if (std::find(keep.begin(), keep.end(), row.metric) != keep.end()) {
            out.rows.push_back(std::move(row));
        }
    }
    return out;
}

}  // namespace

ScalingTable gap_scaling_experiment(std::span<const std::size_t> n_list,
                                    double beta, std::size_t t_factor,
                                    std::size_t seeds, std::uint64_t base_seed) {
    const std::vector<std::string> keep = {"gap_over_nlogn",
                                           "max_top_rank_over_nlogn"};
    return filter_metrics(scaling_experiment(n_list, beta, t_factor, seeds, base_seed),
                          keep);
}

ScalingTable average_rank_experiment(std::span<const std::size_t> n_list,
                                     double beta, std::size_t t_factor,
                                     std::size_t seeds, std::uint64_t base_seed) {
    const std::vector<std::string> keep = {"mean_rank_over_n"};
    return filter_metrics(scaling_experiment(n_list, beta, t_factor, seeds, base_seed),
                          keep);
}

}  // namespace betamq
