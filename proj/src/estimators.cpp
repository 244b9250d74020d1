#include "lossnet/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lossnet/analytic.hpp"

namespace lossnet {

namespace {

std::vector<EpochRecord> epochs_from_boundaries(std::span<const ActionSnapshot> log,
                                                const std::vector<std::size_t>& boundaries) {
  std::vector<EpochRecord> epochs;
  if (boundaries.size() < 2) return epochs;
  epochs.reserve(boundaries.size() - 1);
  for (std::size_t k = 0; k + 1 < boundaries.size(); ++k) {
    const ActionSnapshot& a = log[boundaries[k]];
    const ActionSnapshot& b = log[boundaries[k + 1]];
    EpochRecord e;
    e.start = a.time;
    e.end = b.time;
    e.idleness = b.idleness_cum - a.idleness_cum;
    e.h_rejections = b.h_rejects - a.h_rejects;
    e.l_acceptances = b.l_accepts - a.l_accepts;
    e.actions = boundaries[k + 1] - boundaries[k];
    epochs.push_back(e);
  }
  return epochs;
}

}  // namespace

std::vector<EpochRecord> detect_pfi_epochs(std::span<const ActionSnapshot> log) {
  std::vector<std::size_t> boundaries;
  for (std::size_t i = 0; i < log.size(); ++i) {
    const ActionSnapshot& s = log[i];
    if (s.y == 1 && !s.u && s.p && s.w) boundaries.push_back(i);
  }
  return epochs_from_boundaries(log, boundaries);
}

std::vector<EpochRecord> detect_sss_epochs(std::span<const ActionSnapshot> log) {
  std::vector<std::size_t> boundaries;
  for (std::size_t i = 0; i < log.size(); ++i) {
    if (log[i].y == 0) boundaries.push_back(i);
  }
  return epochs_from_boundaries(log, boundaries);
}

GapEstimate regenerative_gap(std::span<const EpochRecord> epochs, const ModelParams& params,
                             std::size_t min_epochs) {
  if (epochs.size() < min_epochs)
    throw std::runtime_error("regenerative_gap: need at least " + std::to_string(min_epochs) +
                             " epochs, have " + std::to_string(epochs.size()));
  const double n = static_cast<double>(epochs.size());
  const double c_idle = params.r_l * params.mu;
  const double c_rej = params.r_h - params.r_l;

  double sum_u = 0.0, sum_d = 0.0;
  for (const auto& e : epochs) {
    sum_u += c_idle * e.idleness + c_rej * static_cast<double>(e.h_rejections);
    sum_d += e.duration();
  }
  const double mean_u = sum_u / n, mean_d = sum_d / n;
  const double ratio = mean_u / mean_d;

  // Delta method for U-bar / D-bar: var ~ Var(U - ratio*D) / (n * D-bar^2).
  double ss = 0.0;
  for (const auto& e : epochs) {
    const double u = c_idle * e.idleness + c_rej * static_cast<double>(e.h_rejections);
    const double resid = u - ratio * e.duration();
    ss += resid * resid;
  }
  const double var_resid = epochs.size() > 1 ? ss / (n - 1) : 0.0;

  GapEstimate g;
  g.point = ratio;
  g.std_error = std::sqrt(var_resid / n) / mean_d;
  g.count = epochs.size();
  g.method = GapEstimate::Method::Regenerative;
  return g;
}

GapEstimate batch_means(std::span<const double> batch_values) {
  if (batch_values.size() < 2) throw std::runtime_error("batch_means: need at least 2 batches");
  const double n = static_cast<double>(batch_values.size());
  double mean = 0.0;
  for (double v : batch_values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : batch_values) ss += (v - mean) * (v - mean);

  GapEstimate g;
  g.point = mean;
  g.std_error = std::sqrt(ss / (n - 1) / n);
  g.count = batch_values.size();
  g.method = GapEstimate::Method::BatchMeans;
  return g;
}

GapEstimate reward_rate_batch_means(std::span<const ActionSnapshot> log, double t0, double t1,
                                    int n_batches) {
  if (n_batches < 2) throw std::runtime_error("need at least 2 batches");
  if (!(t1 > t0)) throw std::runtime_error("empty batch-means window");
  if (log.empty()) throw std::runtime_error("empty action log");

  // Cumulative reward is a step function jumping at actions; its value just
  // before time t is the reward_cum of the first snapshot at or after t.
  auto reward_before = [&](double t) {
    auto it = std::lower_bound(log.begin(), log.end(), t,
                               [](const ActionSnapshot& a, double x) { return a.time < x; });
    if (it == log.end())
      throw std::runtime_error("batch-means window extends past the logged horizon");
    return it->reward_cum;
  };

  std::vector<double> rates(n_batches);
  const double slab = (t1 - t0) / n_batches;
  for (int b = 0; b < n_batches; ++b) {
    const double lo = t0 + b * slab, hi = t0 + (b + 1) * slab;
    rates[b] = (reward_before(hi) - reward_before(lo)) / slab;
  }
  return batch_means(rates);
}

double epoch_duration_lag1_autocorr(std::span<const EpochRecord> epochs) {
  if (epochs.size() < 3) throw std::runtime_error("need at least 3 epochs");
  const std::size_t n = epochs.size();
  double mean = 0.0;
  for (const auto& e : epochs) mean += e.duration();
  mean /= static_cast<double>(n);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = epochs[i].duration() - mean;
    den += d * d;
    if (i + 1 < n) num += d * (epochs[i + 1].duration() - mean);
  }
  return den > 0 ? num / den : 0.0;
}

RegretDecomposition decomposition_report(const ModelParams& params, double pfi_reward_hat,
                                         double pfi_se, double sss_reward_hat, double sss_se) {
  RegretDecomposition r;
  r.fluid = fluid_reward(params);
  r.pfi_hat = pfi_reward_hat;
  r.pfi_se = pfi_se;
  r.sss_hat = sss_reward_hat;
  r.sss_se = sss_se;
  r.online_hat = best_threshold_reward(params);
  r.vol_upper = r.fluid - r.pfi_hat;
  r.uncertainty_hat = r.pfi_hat - r.online_hat;
  r.short_run_upper = r.sss_hat - r.online_hat;
  return r;
}

}  // namespace lossnet
