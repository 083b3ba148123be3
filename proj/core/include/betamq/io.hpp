#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "betamq/multiqueue.hpp"
#include "betamq/potential.hpp"
#include "betamq/process.hpp"
#include "betamq/sequential.hpp"

namespace betamq::io {

// Trace CSV: header `step,queue,label,rank,choice_kind`.
std::string trace_csv(const std::vector<RankRecord>& records);
std::vector<RankRecord> parse_trace_csv(const std::string& text);

// Run metadata JSON: {config, M, T, valid, wallclock_ns}.
std::string run_metadata_json(const ProcessConfig& config,
                              const TraceResult& result);

// Trajectory CSV: header `t,mu,phi,psi,gamma,gap`.
std::string trajectory_csv(const std::vector<PotentialSnapshot>& series);
struct TrajectoryRow {
    std::uint64_t t = 0;
    double mu = 0.0, phi = 0.0, psi = 0.0, gamma = 0.0, gap = 0.0;
};
std::vector<TrajectoryRow> parse_trajectory_csv(const std::string& text);

// Stripe CSV: header `s,b_gt,b_lt,bound` (counts may be seed-averaged).
std::string stripe_csv(const std::vector<double>& s_grid,
                       const std::vector<double>& b_gt,
                       const std::vector<double>& b_lt,
                       const std::vector<double>& bound);
struct StripeRow {
    double s = 0.0, b_gt = 0.0, b_lt = 0.0, bound = 0.0;
};
std::vector<StripeRow> parse_stripe_csv(const std::string& text);

// Experiment CSV: header `n,beta,metric,mean,stderr,seeds`.
std::string experiment_csv(const ScalingTable& table);
ScalingTable parse_experiment_csv(const std::string& text);

// Operation log CSV: header `kind,thread,timestamp_ns,key,queue`.
std::string log_csv(const std::vector<LogRecord>& log);
std::vector<LogRecord> parse_log_csv(const std::string& text);

}  // namespace betamq::io
