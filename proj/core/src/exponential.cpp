#include "betamq/exponential.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "betamq/detail/fenwick.hpp"
#include "betamq/errors.hpp"
#include "betamq/sequential.hpp"
#include "betamq/stats.hpp"

namespace betamq {

ExponentialState::ExponentialState(std::vector<std::vector<double>> bins)
    : bins_(std::move(bins)), heads_(bins_.size(), 0) {
    for (const auto& bin : bins_) {
        double prev = 0.0;
        for (double v : bin) {
            if (!(v > prev)) {
                throw ParameterOutOfRange(
                    "ExponentialState: labels must be strictly increasing");
            }
            prev = v;
        }
    }
}

std::size_t ExponentialState::total_remaining() const {
    std::size_t total = 0;
    for (std::size_t j = 0; j < bins_.size(); ++j) total += remaining(j);
    return total;
}

double ExponentialState::top(std::size_t j) const {
    if (j >= bins_.size()) throw ParameterOutOfRange("top: bad bin index");
    if (bin_empty(j)) throw EmptyBin("top of empty bin");
    return bins_[j][heads_[j]];
}

double ExponentialState::pop(std::size_t j) {
    const double v = top(j);
    ++heads_[j];
    return v;
}

std::vector<double> ExponentialState::top_weights() const {
    std::vector<double> tops(bins_.size());
    for (std::size_t j = 0; j < bins_.size(); ++j) tops[j] = top(j);
    return tops;
}

ExponentialState generate_exponential_labels(const std::vector<double>& pi,
                                             const std::vector<std::size_t>& counts,
                                             Rng& rng) {
    if (pi.size() != counts.size()) {
        throw ParameterOutOfRange("generate: pi/counts size mismatch");
    }
    std::vector<std::vector<double>> bins(pi.size());
    for (std::size_t j = 0; j < pi.size(); ++j) {
        bins[j].reserve(counts[j]);
        double sum = 0.0;
        for (std::size_t k = 0; k < counts[j]; ++k) {
            sum += rng.exponential(pi[j]);
            bins[j].push_back(sum);
        }
    }
    return ExponentialState(std::move(bins));
}

ExponentialState generate_superposed_labels(const std::vector<double>& pi,
                                            std::size_t labels,
                                            std::uint64_t seed,
                                            const std::string& tag) {
    const std::size_t n = pi.size();
    if (n == 0) throw ParameterOutOfRange("generate_superposed_labels: no bins");
    if (labels == 0) {
        return ExponentialState(std::vector<std::vector<double>>(n));
    }
    struct BinGen {
        Rng rng;
        double next;  // first arrival not yet committed
        std::vector<double> values;
    };
    std::vector<BinGen> gens;
    gens.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
        Rng rng(seed, tag + "-bin-" + std::to_string(j));
        const double first = rng.exponential(pi[j]);
        gens.push_back(BinGen{std::move(rng), first, {}});
    }
    // The merged process has rate sum(pi) = 1, so the labels-th arrival sits
    // near `labels`; extend the horizon until enough committed arrivals exist.
    const double m = static_cast<double>(labels);
    double horizon = m + 10.0 * std::sqrt(m) + 50.0;
    while (true) {
        std::size_t total = 0;
        for (std::size_t j = 0; j < n; ++j) {
            auto& g = gens[j];
            while (g.next <= horizon) {
                g.values.push_back(g.next);
                g.next += g.rng.exponential(pi[j]);
            }
            total += g.values.size();
        }
        if (total >= labels) break;
        horizon *= 1.3;
    }
    // Cut every bin at the labels-th smallest committed value.
    std::vector<double> all;
    for (const auto& g : gens) {
        all.insert(all.end(), g.values.begin(), g.values.end());
    }
    std::nth_element(all.begin(),
                     all.begin() + static_cast<std::ptrdiff_t>(labels - 1),
                     all.end());
    const double cut = all[labels - 1];
    std::vector<std::vector<double>> bins(n);
    for (std::size_t j = 0; j < n; ++j) {
        auto& values = gens[j].values;
        const auto end = std::upper_bound(values.begin(), values.end(), cut);
        bins[j].assign(values.begin(), end);
    }
    return ExponentialState(std::move(bins));
}

RankAssignment assign_ranks(const ExponentialState& state) {
    std::vector<std::pair<double, std::uint32_t>> all;
    for (std::size_t j = 0; j < state.bin_count(); ++j) {
        for (double v : state.bin_labels(j)) {
            all.emplace_back(v, static_cast<std::uint32_t>(j));
        }
    }
    std::sort(all.begin(), all.end());
    for (std::size_t k = 0; k + 1 < all.size(); ++k) {
        if (all[k].first == all[k + 1].first) {
            throw DuplicateLabel("assign_ranks: duplicate real label");
        }
    }
    RankAssignment assignment;
    assignment.total = all.size();
    assignment.ranks.resize(state.bin_count());
    for (std::size_t j = 0; j < state.bin_count(); ++j) {
        assignment.ranks[j].reserve(state.bin_labels(j).size());
    }
    for (std::size_t k = 0; k < all.size(); ++k) {
        assignment.ranks[all[k].second].push_back(static_cast<std::int64_t>(k + 1));
    }
    return assignment;
}

namespace {

std::string probe_array_json(const std::vector<ProbeResult>& probes) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : probes) {
        arr.push_back({{"name", p.name},
                       {"statistic", p.statistic},
                       {"p_value", p.p_value},
                       {"threshold", p.threshold},
                       {"pass", p.pass}});
    }
    return arr.dump();
}

/// Bin of each of the `labels` globally smallest labels.
std::vector<std::uint32_t> sample_rank_bins(const std::vector<double>& pi,
                                            std::size_t labels,
                                            std::uint64_t seed,
                                            std::size_t rep) {
    const auto state = generate_superposed_labels(
        pi, labels, seed, "equiv-rep-" + std::to_string(rep));
    const auto assignment = assign_ranks(state);
    std::vector<std::uint32_t> bins(labels);
    for (std::size_t j = 0; j < assignment.ranks.size(); ++j) {
        for (std::int64_t rank : assignment.ranks[j]) {
            bins[static_cast<std::size_t>(rank - 1)] =
                static_cast<std::uint32_t>(j);
        }
    }
    return bins;
}

}  // namespace

std::string EquivalenceReport::to_json() const {
    nlohmann::json j;
    j["marginal_probes"] = nlohmann::json::parse(probe_array_json(marginal_probes));
    j["independence_probes"] =
        nlohmann::json::parse(probe_array_json(independence_probes));
    j["aggregate_pass"] = aggregate_pass;
    return j.dump(2);
}

EquivalenceReport rank_placement_test(const std::vector<double>& pi,
                                      std::size_t labels, std::size_t reps,
                                      double significance, std::uint64_t seed,
                                      bool adversarial_round_robin) {
    const std::size_t n = pi.size();
    if (labels < 100 * n) {
        throw ParameterOutOfRange("rank_placement_test: labels must be >= 100n");
    }
    if (reps < 100) {
        throw ParameterOutOfRange("rank_placement_test: reps must be >= 100");
    }

    // Deterministic probe ranks: 20 quantiles plus the extremes.
    std::vector<std::size_t> probes;
    for (std::size_t k = 1; k <= 20; ++k) {
        probes.push_back(std::max<std::size_t>(1, k * labels / 21));
    }
    probes.push_back(1);
    probes.push_back(labels);
    std::sort(probes.begin(), probes.end());
    probes.erase(std::unique(probes.begin(), probes.end()), probes.end());

    // 20 reproducible random rank pairs for the independence probes.
    Rng pair_rng(seed, "equiv-pairs");
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    while (pairs.size() < 20) {
        const auto a = static_cast<std::size_t>(pair_rng.uniform_index(labels)) + 1;
        const auto b = static_cast<std::size_t>(pair_rng.uniform_index(labels)) + 1;
        if (a == b) continue;
        pairs.emplace_back(a, b);
    }

    std::vector<std::vector<std::uint64_t>> marginal_counts(
        probes.size(), std::vector<std::uint64_t>(n, 0));
    std::vector<std::vector<std::vector<std::uint64_t>>> pair_tables(
        pairs.size(),
        std::vector<std::vector<std::uint64_t>>(n, std::vector<std::uint64_t>(n, 0)));

    for (std::size_t r = 0; r < reps; ++r) {
        std::vector<std::uint32_t> bins;
        if (adversarial_round_robin) {
            bins.resize(labels);
            for (std::size_t k = 0; k < labels; ++k) {
                bins[k] = static_cast<std::uint32_t>(k % n);
            }
        } else {
            bins = sample_rank_bins(pi, labels, seed, r);
        }
        for (std::size_t p = 0; p < probes.size(); ++p) {
            ++marginal_counts[p][bins[probes[p] - 1]];
        }
        for (std::size_t q = 0; q < pairs.size(); ++q) {
            ++pair_tables[q][bins[pairs[q].first - 1]][bins[pairs[q].second - 1]];
        }
    }

    EquivalenceReport report;
    std::vector<double> p_values;
    for (std::size_t p = 0; p < probes.size(); ++p) {
        const auto res = stats::chi_square_gof(marginal_counts[p], pi);
        report.marginal_probes.push_back(
            ProbeResult{.name = "rank-" + std::to_string(probes[p]),
                        .statistic = res.statistic,
                        .p_value = res.p_value});
        p_values.push_back(res.p_value);
    }
    for (std::size_t q = 0; q < pairs.size(); ++q) {
        const auto res = stats::chi_square_independence(pair_tables[q]);
        report.independence_probes.push_back(
            ProbeResult{.name = "pair-" + std::to_string(pairs[q].first) + "-" +
                                std::to_string(pairs[q].second),
                        .statistic = res.statistic,
                        .p_value = res.p_value});
        p_values.push_back(res.p_value);
    }

    const auto holm = stats::holm_correct(p_values, significance);
    for (std::size_t k = 0; k < p_values.size(); ++k) {
        const bool pass = !holm.rejected[k];
        if (k < report.marginal_probes.size()) {
            report.marginal_probes[k].pass = pass;
        } else {
            report.independence_probes[k - report.marginal_probes.size()].pass = pass;
        }
    }
    report.aggregate_pass = holm.all_pass;
    return report;
}

bool coupled_cost_identity_check(const ProcessConfig& config, std::size_t M,
                                 std::size_t T) {
    // The real-valued process is generated first; its per-bin counts are the
    // shared occupancies, and the integer process gets the rank sequences.
    ExponentialState real_state =
        generate_superposed_labels(config.pi, M, config.seed);
    const RankAssignment assignment = assign_ranks(real_state);

    // Rank-labelled integer process.
    std::vector<std::vector<std::int64_t>> rank_queues = assignment.ranks;
    SystemState rank_state = SystemState::from_queues(std::move(rank_queues));

    // The real-labelled side keeps its own order-statistics index over the
    // positions of the sorted values, updated only by its own w-driven pops.
    detail::Fenwick real_present(M);
    for (std::size_t pos = 1; pos <= M; ++pos) real_present.add(pos, +1);
    // Position of each bin's next label in the global sort order.
    std::vector<std::size_t> next_pos_index(config.n, 0);

    Rng remove_rng = config.stream("remove");
    for (std::size_t t = 0; t < T; ++t) {
        const RemovalChoice choice =
            draw_removal_choice(remove_rng, config.beta, config.n);

        // Real-labelled side decides by comparing top values.
        std::size_t real_bin;
        if (choice.two_choice) {
            if (real_state.bin_empty(choice.first) ||
                real_state.bin_empty(choice.second)) {
                throw EmptyBin("coupled check: removal sampled an empty bin");
            }
            real_bin = real_state.top(choice.first) <= real_state.top(choice.second)
                           ? choice.first
                           : choice.second;
        } else {
            real_bin = choice.first;
        }
        const auto pos =
            static_cast<std::size_t>(assignment.ranks[real_bin][next_pos_index[real_bin]]);
        ++next_pos_index[real_bin];
        const std::int64_t real_rank = real_present.prefix(pos);
        real_present.add(pos, -1);
        real_state.pop(real_bin);

        // Rank-labelled side decides by comparing integer labels.
        const RankRecord rec =
            choice.two_choice
                ? apply_two_choice(rank_state, choice.first, choice.second)
                : apply_single(rank_state, choice.first);

        if (rec.queue != real_bin) {
            throw CouplingBroken("coupled check: bin choice differs at step " +
                                 std::to_string(t + 1));
        }
        if (rec.rank != real_rank) {
            throw CouplingBroken("coupled check: rank cost differs at step " +
                                 std::to_string(t + 1));
        }
        if (rec.label != static_cast<std::int64_t>(pos)) {
            throw CouplingBroken("coupled check: removed label differs at step " +
                                 std::to_string(t + 1));
        }
    }
    return true;
}

std::string MemorylessReport::to_json() const {
    nlohmann::json j;
    j["probes"] = nlohmann::json::parse(probe_array_json(probes));
    j["all_pass"] = all_pass;
    return j.dump(2);
}

MemorylessReport memorylessness_and_poisson_checks(double rate, double horizon,
                                                   Rng& rng) {
    if (!(rate > 0.0)) throw ParameterOutOfRange("rate must be positive");
    if (!(horizon > 10.0 / rate)) {
        throw ParameterOutOfRange("horizon must be >> 1/rate");
    }
    MemorylessReport report;
    auto add_band_probe = [&](std::string name, double stat, double band, bool pass) {
        report.probes.push_back(
            ProbeResult{.name = std::move(name), .statistic = stat,
                        .threshold = band, .pass = pass});
        report.all_pass = report.all_pass && pass;
    };
    auto add_p_probe = [&](std::string name, double stat, double p, bool pass) {
        report.probes.push_back(
            ProbeResult{.name = std::move(name), .statistic = stat,
                        .p_value = p, .threshold = 0.001, .pass = pass});
        report.all_pass = report.all_pass && pass;
    };

    // (a) Product identity P[X > s+t] = P[X > s] P[X > t] on a grid,
    //     each probability estimated from its own block of draws.
    const std::size_t block = 200000;
    const double median = std::log(2.0) / rate;
    const std::vector<double> grid = {median, 1.0 / rate, 1.5 / rate};
    for (double s : grid) {
        for (double t : grid) {
            auto tail_estimate = [&](double threshold) {
                std::size_t hits = 0;
                for (std::size_t k = 0; k < block; ++k) {
                    if (rng.exponential(rate) > threshold) ++hits;
                }
                return static_cast<double>(hits) / static_cast<double>(block);
            };
            const double p_st = tail_estimate(s + t);
            const double p_s = tail_estimate(s);
            const double p_t = tail_estimate(t);
            const double diff = p_st - p_s * p_t;
            auto var_of = [&](double p) { return p * (1.0 - p) / static_cast<double>(block); };
            const double var = var_of(p_st) + p_s * p_s * var_of(p_t) +
                               p_t * p_t * var_of(p_s) + var_of(p_s) * var_of(p_t);
            const double band = 3.0 * std::sqrt(var);
            add_band_probe("memoryless-s" + std::to_string(s) + "-t" + std::to_string(t),
                           diff, band, std::abs(diff) <= band);
        }
    }

    // (b) Counts of partial sums in disjoint unit intervals ~ Poi(rate).
    {
        const auto intervals = static_cast<std::size_t>(std::floor(horizon));
        std::vector<std::uint64_t> counts(intervals, 0);
        double sum = 0.0;
        while (true) {
            sum += rng.exponential(rate);
            if (sum >= static_cast<double>(intervals)) break;
            ++counts[static_cast<std::size_t>(sum)];
        }
        // Histogram over occupancy k, tail-merged so expected counts stay >= 5.
        const std::size_t max_k = 30;
        std::vector<std::uint64_t> histogram(max_k + 1, 0);
        for (std::uint64_t c : counts) {
            ++histogram[std::min<std::uint64_t>(c, max_k)];
        }
        std::vector<double> pmf(max_k + 1, 0.0);
        double acc = 0.0;
        double term = std::exp(-rate);
        for (std::size_t k = 0; k < max_k; ++k) {
            pmf[k] = term;
            acc += term;
            term *= rate / static_cast<double>(k + 1);
        }
        pmf[max_k] = 1.0 - acc;
        // Merge rare categories into the tail.
        std::vector<std::uint64_t> obs;
        std::vector<double> prob;
        std::uint64_t tail_obs = 0;
        double tail_prob = 0.0;
        for (std::size_t k = 0; k <= max_k; ++k) {
            if (pmf[k] * static_cast<double>(intervals) >= 5.0) {
                obs.push_back(histogram[k]);
                prob.push_back(pmf[k]);
            } else {
                tail_obs += histogram[k];
                tail_prob += pmf[k];
            }
        }
        if (tail_prob > 0.0) {
            obs.push_back(tail_obs);
            prob.push_back(tail_prob);
        }
        const auto res = stats::chi_square_gof(obs, prob);
        add_p_probe("poisson-unit-intervals", res.statistic, res.p_value,
                    res.p_value > 0.001);
    }

    // (c) MGF at t = rate/2 equals 2. The summand has tail index 2, so the
    //     sample mean converges slowly; wide band, many draws.
    {
        const std::size_t draws = 4000000;
        const double t = rate / 2.0;
        double sum = 0.0;
        for (std::size_t k = 0; k < draws; ++k) {
            sum += std::exp(t * rng.exponential(rate));
        }
        const double mgf = sum / static_cast<double>(draws);
        add_band_probe("mgf-at-half-rate", mgf - 2.0, 0.1, std::abs(mgf - 2.0) <= 0.1);
    }

    return report;
}

}  // namespace betamq
