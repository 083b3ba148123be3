#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace betamq::stats {

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    std::size_t df = 0;
};

/// Chi-square goodness of fit of observed counts against expected probabilities.
TestResult chi_square_gof(std::span<const std::uint64_t> counts,
                          std::span<const double> probs);

/// Chi-square independence test on a contingency table (rows x cols).
/// Zero-marginal rows/columns are dropped and the df reduced accordingly;
/// a table degenerate to a single cell yields p = 1 (df 0).
TestResult chi_square_independence(
    const std::vector<std::vector<std::uint64_t>>& table);

/// Holm step-down correction. Returns per-test rejection flags at family
/// level `alpha`; all_pass is true when nothing is rejected.
struct HolmResult {
    std::vector<bool> rejected;
    bool all_pass = true;
};
HolmResult holm_correct(std::span<const double> p_values, double alpha);

/// Asymptotic Kolmogorov distribution tail Q(lambda) = P(K > lambda).
double kolmogorov_q(double lambda);

/// One-sample Kolmogorov-Smirnov against a CDF. Samples need not be sorted.
TestResult ks_one_sample(std::vector<double> samples,
                         const std::function<double(double)>& cdf);

/// Two-sample Kolmogorov-Smirnov.
TestResult ks_two_sample(std::vector<double> a, std::vector<double> b);

struct Ols {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double t_statistic = 0.0;
};
Ols ols_slope(std::span<const double> x, std::span<const double> y);

/// Lag-1 Pearson correlation between two equal-length series.
double pearson(std::span<const double> a, std::span<const double> b);

double mean(std::span<const double> v);
double variance(std::span<const double> v);  // unbiased
double stderr_of_mean(std::span<const double> v);

/// Two-sided normal quantile, e.g. normal_quantile(0.995) for a 99% CI.
double normal_quantile(double p);

}  // namespace betamq::stats
