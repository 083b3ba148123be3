#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "betamq/rng.hpp"

namespace betamq {

enum class PiMode { kUniform, kLinearBias, kExplicit };

std::string to_string(PiMode mode);
PiMode pi_mode_from_string(const std::string& s);

/// Insertion distribution over n queues subject to the bias bound
/// 1 - gamma <= 1/(n*pi_i) <= 1 + gamma.
///
/// uniform: pi_i = 1/n. linear-bias: the values 1/(n*pi_i) are spread evenly
/// across the widest admissible symmetric interval inside [1-gamma, 1+gamma]
/// (the spread is bisected down until the renormalized vector still satisfies
/// the bound). explicit: weights are normalized and validated.
std::vector<double> make_insertion_distribution(
    std::size_t n, double gamma, PiMode mode,
    const std::vector<double>& weights = {});

/// True when pi sums to 1 (1e-12) and every 1/(n*pi_i) is in
/// [1-gamma, 1+gamma] up to a small relative slack.
bool insertion_distribution_admissible(const std::vector<double>& pi,
                                       double gamma);

/// Probability that the i-th ranked queue (by top label, ascending) is the
/// one removed from, for the two-choice-with-probability-beta removal rule:
///   p_i = (1-beta)/n + beta * [ (2/n)(1-(i-1)/n) - 1/n^2 ].
struct RemovalPmf {
    std::vector<double> p;
};
RemovalPmf removal_rank_pmf(std::size_t n, double beta);

/// delta with 1 + delta = (1+gamma+c*alpha*(1+gamma)^2) /
///                        (1-gamma-c*alpha*(1+gamma)^2).
/// Throws ParameterOutOfRange when the denominator is <= 0.
double delta_from_alpha(double alpha, double gamma, double c);

/// Largest alpha of the form beta/2^k (k >= 4) with
/// delta(alpha, gamma, c) <= beta/16. Throws NoAdmissibleAlpha when even
/// k = 30 fails (gamma too large relative to beta).
double default_alpha(double beta, double gamma, double c);

/// All process parameters plus the derived potential parameters.
/// Construction validates every invariant; beta = 0 configs are accepted as
/// single-choice diagnostic controls, in which case the delta <= epsilon
/// admissibility requirement does not apply.
struct ProcessConfig {
    std::size_t n = 0;
    double beta = 1.0;
    double gamma = 0.0;
    PiMode pi_mode = PiMode::kUniform;
    std::vector<double> pi;
    std::uint64_t seed = 0;
    double alpha = 0.0;
    double c = 2.0;

    // Derived.
    double delta = 0.0;
    double epsilon = 0.0;
    double alpha_hat = 0.0;

    static ProcessConfig create(std::size_t n, double beta, double gamma,
                                PiMode pi_mode, std::vector<double> pi,
                                std::uint64_t seed, double alpha, double c = 2.0);

    /// Uniform pi and alpha = default_alpha (or a tiny fixed alpha for
    /// beta = 0 controls, where no admissible alpha exists).
    static ProcessConfig uniform(std::size_t n, double beta, std::uint64_t seed);

    Rng stream(std::string_view stream_id) const { return Rng(seed, stream_id); }

    std::string to_json() const;
    static ProcessConfig from_json(const std::string& text);
};

/// One removal decision; single source of truth for the draw order
/// (Bernoulli first, then indices) shared by every simulator so traces
/// can be coupled across modules. beta = 1 and beta = 0 consume no
/// Bernoulli draw.
struct RemovalChoice {
    bool two_choice = false;
    std::size_t first = 0;
    std::size_t second = 0;  // == first for single-queue removals
};
RemovalChoice draw_removal_choice(Rng& rng, double beta, std::size_t n);

/// One insertion queue index drawn from pi (cumulative inverse transform).
std::size_t draw_insertion_queue(Rng& rng, const std::vector<double>& pi);

}  // namespace betamq
