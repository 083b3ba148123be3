#include "betamq/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

namespace betamq::stats {

namespace {

double chi_square_p(double statistic, std::size_t df) {
    if (df == 0) return 1.0;
    boost::math::chi_squared dist(static_cast<double>(df));
    return boost::math::cdf(boost::math::complement(dist, statistic));
}

}  // namespace

TestResult chi_square_gof(std::span<const std::uint64_t> counts,
                          std::span<const double> probs) {
    if (counts.size() != probs.size() || counts.empty()) {
        throw std::invalid_argument("chi_square_gof: size mismatch");
    }
    const double total = static_cast<double>(
        std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}));
    double stat = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double expected = total * probs[i];
        if (expected <= 0.0) {
            if (counts[i] != 0) return {std::numeric_limits<double>::infinity(), 0.0, counts.size() - 1};
            continue;
        }
        const double d = static_cast<double>(counts[i]) - expected;
        stat += d * d / expected;
    }
    const std::size_t df = counts.size() - 1;
    return {stat, chi_square_p(stat, df), df};
}

TestResult chi_square_independence(
    const std::vector<std::vector<std::uint64_t>>& table) {
    const std::size_t rows = table.size();
    const std::size_t cols = rows == 0 ? 0 : table[0].size();
    std::vector<double> row_sum(rows, 0.0), col_sum(cols, 0.0);
    double total = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            row_sum[r] += static_cast<double>(table[r][c]);
            col_sum[c] += static_cast<double>(table[r][c]);
            total += static_cast<double>(table[r][c]);
        }
    }
    const std::size_t live_rows =
        static_cast<std::size_t>(std::count_if(row_sum.begin(), row_sum.end(),
                                               [](double s) { return s > 0; }));
    const std::size_t live_cols =
        static_cast<std::size_t>(std::count_if(col_sum.begin(), col_sum.end(),
                                               [](double s) { return s > 0; }));
    if (live_rows <= 1 || live_cols <= 1 || total <= 0.0) {
        return {0.0, 1.0, 0};
    }
    double stat = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        if (row_sum[r] == 0.0) continue;
        for (std::size_t c = 0; c < cols; ++c) {
            if (col_sum[c] == 0.0) continue;
            const double expected = row_sum[r] * col_sum[c] / total;
            const double d = static_cast<double>(table[r][c]) - expected;
            stat += d * d / expected;
        }
    }
    const std::size_t df = (live_rows - 1) * (live_cols - 1);
    return {stat, chi_square_p(stat, df), df};
}

HolmResult holm_correct(std::span<const double> p_values, double alpha) {
    const std::size_t m = p_values.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return p_values[a] < p_values[b];
    });
    HolmResult result;
    result.rejected.assign(m, false);
    for (std::size_t k = 0; k < m; ++k) {
        const double level = alpha / static_cast<double>(m - k);
        if (p_values[order[k]] <= level) {
            result.rejected[order[k]] = true;
            result.all_pass = false;
        } else {
            break;  // step-down stops at the first acceptance
        }
    }
    return result;
}

double kolmogorov_q(double lambda) {
    if (lambda <= 0.0) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term =
            std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1 ? term : -term);
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

TestResult ks_one_sample(std::vector<double> samples,
                         const std::function<double(double)>& cdf) {
    if (samples.empty()) throw std::invalid_argument("ks_one_sample: empty");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    }
    return {d, kolmogorov_q(std::sqrt(n) * d), samples.size()};
}

TestResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na -
                                 static_cast<double>(j) / nb));
    }
    const double n_eff = na * nb / (na + nb);
    return {d, kolmogorov_q(std::sqrt(n_eff) * d), a.size() + b.size()};
}

Ols ols_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 3) {
        throw std::invalid_argument("ols_slope: need >= 3 points");
    }
    const double n = static_cast<double>(x.size());
    const double mx = mean(x);
    const double my = mean(y);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    Ols out;
    out.slope = sxy / sxx;
    out.intercept = my - out.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (out.intercept + out.slope * x[i]);
        ss_res += r * r;
    }
    out.slope_stderr = std::sqrt(ss_res / (n - 2.0) / sxx);
    out.t_statistic = out.slope_stderr > 0 ? out.slope / out.slope_stderr
                                           : std::numeric_limits<double>::infinity();
    return out;
}

double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) {
        throw std::invalid_argument("pearson: size mismatch");
    }
    const double ma = mean(a);
    const double mb = mean(b);
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
        sab += (a[i] - ma) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

double mean(std::span<const double> v) {
    if (v.empty()) throw std::invalid_argument("mean: empty");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance(std::span<const double> v) {
    if (v.size() < 2) throw std::invalid_argument("variance: need >= 2");
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

double stderr_of_mean(std::span<const double> v) {
    return std::sqrt(variance(v) / static_cast<double>(v.size()));
}

double normal_quantile(double p) {
    boost::math::normal dist;
    return boost::math::quantile(dist, p);
}

}  // namespace betamq::stats
