#pragma once

#include <optional>
#include <vector>

#include "lossnet/model.hpp"

namespace lossnet {

// Birth-death chain on states 0..M. death[0] and birth[M] must be zero.
struct BirthDeathSpec {
  std::vector<double> birth;
  std::vector<double> death;

  std::size_t size() const { return birth.size(); }
};

// Eq.-style deterministic relaxation: N*r_H*lambda_H + N*r_L*(mu - lambda_H).
double fluid_reward(const ModelParams& params);

// The constant C in the sufficient lookahead window w = C*log(N)/N.
double sss_window_constant(const ModelParams& params);

// Lookahead window in hours for the given N; c_override replaces C.
double sss_window(const ModelParams& params, std::optional<double> c_override = std::nullopt);

// Product-form stationary distribution, accumulated in log space.
std::vector<double> stationary_distribution(const BirthDeathSpec& spec);

// Exact long-run reward of the trunk-reservation policy that reserves theta
// idle servers for H jobs (accept L iff idle > theta).
double threshold_reward(const ModelParams& params, int theta);

// Busy-server chain under the trunk-reservation policy.
BirthDeathSpec threshold_busy_chain(const ModelParams& params, int theta);

// Exact H rejection rate (jobs/hour) under the trunk-reservation policy.
double threshold_h_rejection_rate(const ModelParams& params, int theta);

// Best trunk reservation level; ties broken toward smaller theta.
int best_threshold(const ModelParams& params);
double best_threshold_reward(const ModelParams& params);

// The reject-all-L idle-server chain on 0..max_level: up rate mu*(N-y)
// (departures free servers), down rate N*lambda_H (H admissions).
BirthDeathSpec reject_all_l_idle_chain(const ModelParams& params, int max_level);

// P(hit upper before lower | start) for a birth-death chain, via the
// tridiagonal harmonic system (pivot-free elimination).
double hit_probability(const BirthDeathSpec& spec, int start, int lower, int upper);

// hit_probability on the reject-all-L idle chain.
double race_probability(const ModelParams& params, int start, int lower, int upper);

// P(reject-all-L idle process enters {0,1} by time w | start >= 2), via
// uniformization. Poisson tail truncated below 1e-12.
double transient_absorption(const ModelParams& params, int start, double w);

// Classical gambler's ruin: P(reach upper before lower) for a +-1 walk.
double walk_ruin_prob(double p_up, int start, int lower, int upper);

}  // namespace lossnet
