#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lossnet/engine.hpp"
#include "lossnet/model.hpp"

namespace lossnet {

struct EpochRecord {
  double start = 0.0;
  double end = 0.0;
  double idleness = 0.0;  // integral of Y dt over the epoch, server-hours
  std::uint64_t h_rejections = 0;
  std::uint64_t l_acceptances = 0;
  std::uint64_t actions = 0;

  double duration() const { return end - start; }
};

struct GapEstimate {
  enum class Method { Regenerative, BatchMeans, Exact };

  double point = 0.0;
  double std_error = 0.0;
  std::size_t count = 0;  // epochs or batches
  Method method = Method::Regenerative;
};

// Epoch boundaries at action instants with Y = 1 where U fails and P, W hold.
// Returns the fully-covered epochs; pre-first and post-last spans are dropped.
std::vector<EpochRecord> detect_pfi_epochs(std::span<const ActionSnapshot> log);

// Epoch boundaries at action instants with Y = 0.
std::vector<EpochRecord> detect_sss_epochs(std::span<const ActionSnapshot> log);

// Regenerative estimate of the fluid gap:
//   r_L*mu*E[idleness]/E[duration] + (r_H - r_L)*E[H rejections]/E[duration],
// with a delta-method standard error for the ratio.
GapEstimate regenerative_gap(std::span<const EpochRecord> epochs, const ModelParams& params,
                             std::size_t min_epochs = 30);

// Mean and standard error of pre-computed batch values.
GapEstimate batch_means(std::span<const double> batch_values);

// Reward rate over [t0, t1] split into equal time slabs.
GapEstimate reward_rate_batch_means(std::span<const ActionSnapshot> log, double t0, double t1,
                                    int n_batches);

// Lag-1 autocorrelation of epoch durations (renewal-structure diagnostic).
double epoch_duration_lag1_autocorr(std::span<const EpochRecord> epochs);

struct RegretDecomposition {
  double fluid = 0.0;
  double pfi_hat = 0.0, pfi_se = 0.0;
  double sss_hat = 0.0, sss_se = 0.0;
  double online_hat = 0.0;  // best trunk reservation, exact
  // Lemma-style components; pfi_hat lower-bounds the offline value and
  // online_hat lower-bounds the online optimum, so these are one-sided.
  double vol_upper = 0.0;          // fluid - pfi_hat
  double uncertainty_hat = 0.0;    // pfi_hat - online_hat
  double short_run_upper = 0.0;    // sss_hat - online_hat
};

RegretDecomposition decomposition_report(const ModelParams& params, double pfi_reward_hat,
                                         double pfi_se, double sss_reward_hat, double sss_se);

}  // namespace lossnet
