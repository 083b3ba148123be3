#include "betamq/process.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "betamq/errors.hpp"

namespace betamq {

namespace {

constexpr double kSumTol = 1e-12;
// Relative slack on the bias bound so exact-boundary vectors (e.g. the
// n=2 weights (1,2) at gamma=0.5) validate under floating point.
constexpr double kBiasTol = 1e-9;

void check_probability_vector(const std::vector<double>& pi) {
    if (pi.size() < 2) {
        throw ParameterOutOfRange("insertion distribution needs n >= 2");
    }
    double sum = 0.0;
    for (double p : pi) {
        if (!(p > 0.0) || !(p < 1.0 + kSumTol)) {
            throw ParameterOutOfRange("pi entries must be in (0,1]");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > kSumTol) {
        throw ParameterOutOfRange("pi must sum to 1 within 1e-12");
    }
}

std::vector<double> linear_bias_pi(std::size_t n, double gamma) {
    if (gamma == 0.0) return std::vector<double>(n, 1.0 / static_cast<double>(n));
    auto build = [&](double half_width) {
        std::vector<double> pi(n);
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double frac =
                n == 1 ? 0.0
                       : 2.0 * static_cast<double>(i) / static_cast<double>(n - 1) - 1.0;
            const double target = 1.0 + half_width * frac;  // desired 1/(n*pi_i)
            pi[i] = 1.0 / target;
            total += pi[i];
        }
        for (double& p : pi) p /= total;
        return pi;
    };
    // The renormalization pushes the extreme entries slightly outside the
    // bound, so bisect the spread to the widest admissible half-width.
    double lo = 0.0, hi = gamma;
    if (insertion_distribution_admissible(build(hi), gamma)) {
        return build(hi);
    }
    for (int iter = 0; iter < 64; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (insertion_distribution_admissible(build(mid), gamma)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return build(lo);
}

}  // namespace

std::string to_string(PiMode mode) {
    switch (mode) {
        case PiMode::kUniform: return "uniform";
        case PiMode::kLinearBias: return "linear-bias";
        case PiMode::kExplicit: return "explicit";
    }
    return "uniform";
}

PiMode pi_mode_from_string(const std::string& s) {
    if (s == "uniform") return PiMode::kUniform;
    if (s == "linear-bias") return PiMode::kLinearBias;
    if (s == "explicit") return PiMode::kExplicit;
    throw ParseError("unknown pi_mode: " + s);
}

bool insertion_distribution_admissible(const std::vector<double>& pi,
                                       double gamma) {
    if (pi.empty()) return false;
    double sum = 0.0;
    const double n = static_cast<double>(pi.size());
    for (double p : pi) {
        if (!(p > 0.0)) return false;
        sum += p;
        const double inv = 1.0 / (n * p);
        if (inv < (1.0 - gamma) * (1.0 - kBiasTol) ||
            inv > (1.0 + gamma) * (1.0 + kBiasTol)) {
            return false;
        }
    }
    return std::abs(sum - 1.0) <= kSumTol;
}

std::vector<double> make_insertion_distribution(std::size_t n, double gamma,
                                                PiMode mode,
                                                const std::vector<double>& weights) {
    if (n < 2) throw ParameterOutOfRange("n must be >= 2");
    if (!(gamma >= 0.0) || gamma >= 1.0) {
        throw ParameterOutOfRange("gamma must be in [0,1)");
    }
    switch (mode) {
        case PiMode::kUniform:
            return std::vector<double>(n, 1.0 / static_cast<double>(n));
        case PiMode::kLinearBias:
            return linear_bias_pi(n, gamma);
        case PiMode::kExplicit: {
            if (weights.size() != n) {
                throw ParameterOutOfRange("explicit weights must have length n");
            }
            double total = 0.0;
            for (double w : weights) {
                if (!(w > 0.0)) throw ParameterOutOfRange("weights must be positive");
                total += w;
            }
            std::vector<double> pi(n);
            for (std::size_t i = 0; i < n; ++i) pi[i] = weights[i] / total;
            if (!insertion_distribution_admissible(pi, gamma)) {
                throw BiasBoundViolated("explicit weights violate 1/(n*pi) bias bound");
            }
            return pi;
        }
    }
    throw ParameterOutOfRange("unknown pi mode");
}

RemovalPmf removal_rank_pmf(std::size_t n, double beta) {
    if (n < 2) throw ParameterOutOfRange("removal_rank_pmf: n must be >= 2");
    if (!(beta >= 0.0) || beta > 1.0) {
        throw ParameterOutOfRange("removal_rank_pmf: beta must be in [0,1]");
    }
    const double dn = static_cast<double>(n);
    RemovalPmf pmf;
    pmf.p.resize(n);
    for (std::size_t i = 1; i <= n; ++i) {
        const double di = static_cast<double>(i);
        pmf.p[i - 1] = (1.0 - beta) / dn +
                       beta * ((2.0 / dn) * (1.0 - (di - 1.0) / dn) - 1.0 / (dn * dn));
    }
    return pmf;
}

double delta_from_alpha(double alpha, double gamma, double c) {
    if (!(alpha > 0.0) || alpha >= 1.0) {
        throw ParameterOutOfRange("alpha must be in (0,1)");
    }
    if (!(gamma >= 0.0) || gamma >= 1.0) {
        throw ParameterOutOfRange("gamma must be in [0,1)");
    }
    if (!(c >= 2.0)) throw ParameterOutOfRange("c must be >= 2");
    const double g2 = (1.0 + gamma) * (1.0 + gamma);
    const double denom = 1.0 - gamma - c * alpha * g2;
    if (denom <= 0.0) {
        throw ParameterOutOfRange("alpha too large for gamma, c: denominator <= 0");
    }
    const double numer = 1.0 + gamma + c * alpha * g2;
    return numer / denom - 1.0;
}

double default_alpha(double beta, double gamma, double c) {
    if (!(beta > 0.0) || beta > 1.0) {
        throw ParameterOutOfRange("default_alpha: beta must be in (0,1]");
    }
    const double epsilon = beta / 16.0;
    for (int k = 4; k <= 30; ++k) {
        const double alpha = beta / std::pow(2.0, k);
        double delta;
        try {
            delta = delta_from_alpha(alpha, gamma, c);
        } catch (const ParameterOutOfRange&) {
            continue;
        }
        if (delta <= epsilon) return alpha;
    }
    throw NoAdmissibleAlpha(
        "no alpha = beta/2^k (k <= 30) satisfies delta <= beta/16; "
        "gamma too large relative to beta");
}

ProcessConfig ProcessConfig::create(std::size_t n, double beta, double gamma,
                                    PiMode pi_mode, std::vector<double> pi,
                                    std::uint64_t seed, double alpha, double c) {
    if (n < 2) throw ParameterOutOfRange("config: n must be >= 2");
    if (!(beta >= 0.0) || beta > 1.0) {
        throw ParameterOutOfRange("config: beta must be in [0,1]");
    }
    if (!(gamma >= 0.0) || gamma >= 1.0) {
        throw ParameterOutOfRange("config: gamma must be in [0,1)");
    }
    check_probability_vector(pi);
    if (pi.size() != n) throw ParameterOutOfRange("config: pi length != n");
    if (!insertion_distribution_admissible(pi, gamma)) {
        throw BiasBoundViolated("config: pi violates the 1/(n*pi) bias bound");
    }

    ProcessConfig cfg;
    cfg.n = n;
    cfg.beta = beta;
    cfg.gamma = gamma;
    cfg.pi_mode = pi_mode;
    cfg.pi = std::move(pi);
    cfg.seed = seed;
    cfg.alpha = alpha;
    cfg.c = c;
    cfg.epsilon = beta / 16.0;
    cfg.delta = delta_from_alpha(alpha, gamma, c);
    if (beta > 0.0 && cfg.delta > cfg.epsilon) {
        throw ParameterOutOfRange("config: delta > epsilon = beta/16");
    }
    const double g2 = (1.0 + gamma) * (1.0 + gamma);
    cfg.alpha_hat = alpha * (1.0 - gamma - c * alpha * g2);
    if (!(cfg.alpha_hat > 0.0)) {
        throw ParameterOutOfRange("config: alpha_hat must be positive");
    }
    return cfg;
}

ProcessConfig ProcessConfig::uniform(std::size_t n, double beta,
                                     std::uint64_t seed) {
    const double c = 2.0;
    // beta = 0 controls reuse the beta = 1 alpha so potentials stay comparable.
    const double alpha = beta > 0.0 ? default_alpha(beta, 0.0, c)
                                    : default_alpha(1.0, 0.0, c);
    return create(n, beta, 0.0,
                  PiMode::kUniform,
                  std::vector<double>(n, 1.0 / static_cast<double>(n)), seed,
                  alpha, c);
}

RemovalChoice draw_removal_choice(Rng& rng, double beta, std::size_t n) {
    RemovalChoice choice;
    if (beta >= 1.0) {
        choice.two_choice = true;
    } else if (beta <= 0.0) {
        choice.two_choice = false;
    } else {
        choice.two_choice = rng.bernoulli(beta);
    }
    choice.first = static_cast<std::size_t>(rng.uniform_index(n));
    choice.second =
        choice.two_choice ? static_cast<std::size_t>(rng.uniform_index(n))
                          : choice.first;
    return choice;
}

std::size_t draw_insertion_queue(Rng& rng, const std::vector<double>& pi) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < pi.size(); ++i) {
        acc += pi[i];
        if (u < acc) return i;
    }
    return pi.size() - 1;
}

std::string ProcessConfig::to_json() const {
    nlohmann::json j;
    j["n"] = n;
    j["beta"] = beta;
    j["gamma"] = gamma;
    j["pi_mode"] = to_string(pi_mode);
    j["pi"] = pi;
    j["seed"] = seed;
    j["alpha"] = alpha;
    j["c"] = c;
    j["delta"] = delta;
    j["epsilon"] = epsilon;
    j["alpha_hat"] = alpha_hat;
    return j.dump(2);
}

ProcessConfig ProcessConfig::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("config JSON: ") + e.what());
    }
    ProcessConfig cfg;
    try {
        cfg = create(j.at("n").get<std::size_t>(), j.at("beta").get<double>(),
                     j.at("gamma").get<double>(),
                     pi_mode_from_string(j.at("pi_mode").get<std::string>()),
                     j.at("pi").get<std::vector<double>>(),
                     j.at("seed").get<std::uint64_t>(),
                     j.at("alpha").get<double>(), j.at("c").get<double>());
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("config JSON: ") + e.what());
    }
    // Stored derived fields must agree with the recomputation.
    auto check_derived = [&](const char* key, double actual) {
        if (j.contains(key)) {
            const double stored = j.at(key).get<double>();
            if (std::abs(stored - actual) > 1e-12) {
                throw ConfigMismatch(std::string("config: stored ") + key +
                                     " disagrees with recomputed value");
            }
        }
    };
    check_derived("delta", cfg.delta);
    check_derived("epsilon", cfg.epsilon);
    check_derived("alpha_hat", cfg.alpha_hat);
    return cfg;
}

}  // namespace betamq
