#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "betamq/errors.hpp"
#include "betamq/exponential.hpp"
#include "betamq/stats.hpp"

using namespace betamq;

TEST_CASE("generate: zero counts give an empty state") {
    Rng rng(1, "labels");
    const auto state =
        generate_exponential_labels({0.5, 0.5}, {0, 0}, rng);
    CHECK(state.total_remaining() == 0);
    CHECK(state.bin_empty(0));
    CHECK_THROWS_AS(state.top(0), EmptyBin);
}

TEST_CASE("generate: per-bin mean increment is 1/pi_j") {
    Rng rng(2, "labels");
    const std::size_t count = 100000;
    SUBCASE("uniform n=4") {
        const auto state = generate_exponential_labels(
            {0.25, 0.25, 0.25, 0.25}, {count, count, count, count}, rng);
        for (std::size_t j = 0; j < 4; ++j) {
            const double mean_increment =
                state.bin_labels(j).back() / static_cast<double>(count);
            CHECK(std::abs(mean_increment - 4.0) <= 0.04);
        }
    }
    SUBCASE("biased (1/3, 2/3)") {
        const auto state = generate_exponential_labels({1.0 / 3.0, 2.0 / 3.0},
                                                       {count, count}, rng);
        CHECK(std::abs(state.bin_labels(0).back() / count - 3.0) <= 0.03);
        CHECK(std::abs(state.bin_labels(1).back() / count - 1.5) <= 0.015);
    }
}

TEST_CASE("generate: increments pass a KS test against Exp(rate pi_j)") {
    Rng rng(3, "labels");
    const std::vector<double> pi = {0.2, 0.3, 0.5};
    const auto state = generate_exponential_labels(pi, {5000, 5000, 5000}, rng);
    for (std::size_t j = 0; j < pi.size(); ++j) {
        std::vector<double> increments;
        double prev = 0.0;
        for (double v : state.bin_labels(j)) {
            increments.push_back(v - prev);
            prev = v;
        }
        const double rate = pi[j];
        const auto res = stats::ks_one_sample(
            increments, [rate](double x) { return 1.0 - std::exp(-rate * x); });
        CHECK(res.p_value > 0.001);
    }
}

TEST_CASE("assign_ranks: hand-sorted example and identities") {
    const auto state = ExponentialState({{0.3, 1.1}, {0.7}});
    const auto assignment = assign_ranks(state);
    CHECK(assignment.ranks[0] == std::vector<std::int64_t>{1, 3});
    CHECK(assignment.ranks[1] == std::vector<std::int64_t>{2});

    const auto single = ExponentialState({{0.5, 1.2, 3.3, 4.0}});
    const auto sr = assign_ranks(single);
    CHECK(sr.ranks[0] == std::vector<std::int64_t>{1, 2, 3, 4});

    CHECK_THROWS_AS(assign_ranks(ExponentialState({{1.0}, {1.0}})),
                    DuplicateLabel);
}

TEST_CASE("assign_ranks: bijection onto 1..M and per-bin monotonicity") {
    Rng rng(4, "labels");
    const std::vector<double> pi = {0.1, 0.2, 0.3, 0.4};
    const auto state = generate_exponential_labels(pi, {97, 211, 301, 391}, rng);
    const auto assignment = assign_ranks(state);
    std::vector<std::int64_t> all;
    for (const auto& ranks : assignment.ranks) {
        CHECK(std::is_sorted(ranks.begin(), ranks.end()));
        all.insert(all.end(), ranks.begin(), ranks.end());
    }
    std::sort(all.begin(), all.end());
    REQUIRE(all.size() == 1000);
    for (std::size_t k = 0; k < all.size(); ++k) {
        CHECK(all[k] == static_cast<std::int64_t>(k + 1));
    }
}

TEST_CASE("assign_ranks: per-bin rank frequency approximates pi") {
    Rng rng(5, "labels");
    const std::size_t n = 8;
    const std::size_t per_bin = 12500;  // M = 1e5
    const std::vector<double> pi(n, 1.0 / n);
    const auto state = generate_exponential_labels(
        pi, std::vector<std::size_t>(n, per_bin), rng);
    const auto assignment = assign_ranks(state);
    const double m = 100000.0;
    const double band = 3.0 * std::sqrt((1.0 / n) * (1.0 - 1.0 / n) / m);
    for (std::size_t j = 0; j < n; ++j) {
        const double freq = static_cast<double>(assignment.ranks[j].size()) / m;
        CHECK(std::abs(freq - 1.0 / n) <= band);
    }
}

TEST_CASE("rank placement test: uniform and biased pass, round-robin fails") {
    SUBCASE("uniform n=2") {
        const auto report =
            rank_placement_test({0.5, 0.5}, 2000, 100, 0.001, 2024);
        CHECK(report.aggregate_pass);
    }
    SUBCASE("biased (1/3, 2/3)") {
        const auto report = rank_placement_test({1.0 / 3.0, 2.0 / 3.0}, 2000,
                                                100, 0.001, 2025);
        CHECK(report.aggregate_pass);
    }
    SUBCASE("adversarial control fails") {
        const auto report =
            rank_placement_test({0.5, 0.5}, 2000, 100, 0.001, 2026, true);
        CHECK_FALSE(report.aggregate_pass);
    }
}

TEST_CASE("coupled cost identity: exact at every step") {
    SUBCASE("small") {
        const auto cfg = ProcessConfig::uniform(4, 1.0, 42);
        CHECK(coupled_cost_identity_check(cfg, 200, 100));
    }
    SUBCASE("T = 0 vacuous") {
        const auto cfg = ProcessConfig::uniform(4, 1.0, 43);
        CHECK(coupled_cost_identity_check(cfg, 50, 0));
    }
    SUBCASE("mixed beta, several seeds") {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const auto cfg = ProcessConfig::uniform(16, 0.5, seed);
            CHECK(coupled_cost_identity_check(cfg, 10000, 5000));
        }
    }
    SUBCASE("biased insertion") {
        // gamma is capped hard by epsilon >= delta: the gamma-floor of delta
        // is 2*gamma/(1-gamma), so beta=1 admits only gamma <= 1/33.
        const double gamma = 0.03;
        const auto pi =
            make_insertion_distribution(8, gamma, PiMode::kLinearBias);
        const auto cfg =
            ProcessConfig::create(8, 1.0, gamma, PiMode::kLinearBias, pi, 7,
                                  default_alpha(1.0, gamma, 2.0));
        CHECK(coupled_cost_identity_check(cfg, 5000, 2000));
    }
}

TEST_CASE("memorylessness, poisson counts, and the mgf identity") {
    Rng rng(6, "memoryless");
    const auto report = memorylessness_and_poisson_checks(2.0, 4000.0, rng);
    for (const auto& probe : report.probes) {
        INFO(probe.name, " statistic=", probe.statistic, " p=", probe.p_value);
        CHECK(probe.pass);
    }
    CHECK(report.all_pass);
    // The report is serializable.
    CHECK(report.to_json().find("mgf-at-half-rate") != std::string::npos);
}

TEST_CASE("fact-2 example: counts in length-3 intervals have mean=var=3") {
    Rng rng(7, "poisson3");
    const double rate = 1.0;
    const std::size_t intervals = 4000;
    std::vector<double> counts(intervals, 0.0);
    double sum = 0.0;
    while (true) {
        sum += rng.exponential(rate);
        const auto idx = static_cast<std::size_t>(sum / 3.0);
        if (idx >= intervals) break;
        counts[idx] += 1.0;
    }
    const double mean = stats::mean(counts);
    const double var = stats::variance(counts);
    // 3 sigma bands: sd(mean) = sqrt(3/m); var of the sample variance of
    // Poi(3) is about (mu + 2 mu^2)/m = 21/m.
    CHECK(std::abs(mean - 3.0) <= 3.0 * std::sqrt(3.0 / intervals));
    CHECK(std::abs(var - 3.0) <= 3.0 * std::sqrt(21.0 / intervals) + 0.05);
}

TEST_CASE("fact-1 example: both sides equal 1/4 at the median") {
    Rng rng(8, "median");
    const double rate = 2.0;
    const double median = std::log(2.0) / rate;
    const std::size_t draws = 200000;
    std::size_t beyond_two_medians = 0;
    for (std::size_t k = 0; k < draws; ++k) {
        if (rng.exponential(rate) > 2.0 * median) ++beyond_two_medians;
    }
    const double p = static_cast<double>(beyond_two_medians) / draws;
    const double band = 3.0 * std::sqrt(0.25 * 0.75 / draws);
    CHECK(std::abs(p - 0.25) <= band);
}
